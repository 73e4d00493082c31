#include "mpcl/rs_pointer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "mpcl/errors.hpp"
#include "mpcl/line_class.hpp"

namespace mpcl {

std::vector<std::uint64_t> rs_encode(const RSCode& code, std::span<const std::uint64_t> y) {
    require(y.size() == code.n_sym, ErrorCode::length_mismatch,
            "RS message has " + std::to_string(y.size()) + " symbols, expected " + std::to_string(code.n_sym));
    require(code.n_sym <= code.m_sym && code.m_sym <= code.p, ErrorCode::parameter, "RS code needs n <= m <= p");
    const PrimeField field(code.p);
    std::vector<std::uint64_t> z(code.m_sym, 0);
    for (std::uint64_t j = 0; j < code.m_sym; ++j) {
        // Horner from the top coefficient.
        std::uint64_t acc = 0;
        for (std::size_t i = y.size(); i-- > 0;) acc = field.add(field.mul(acc, j), field.reduce(y[i]));
        z[j] = acc;
    }
    return z;
}

std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    require(a.size() == b.size(), ErrorCode::length_mismatch, "Hamming distance of unequal lengths");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
    return diff;
}

PointerMap identity_map(std::uint64_t n) {
    PointerMap f;
    f.values.resize(n);
    for (std::uint64_t w = 0; w < n; ++w) f.values[w] = w + 1;
    return f;
}

PointerMap random_pointer_map(std::uint64_t n, Rng& rng) {
    PointerMap f;
    f.values.resize(n);
    for (auto& v : f.values) v = rng.below(n) + 1;
    return f;
}

ChaseResult chase_pointers(const PointerMap& f_a, const PointerMap& f_b, unsigned c) {
    require(f_a.size() == f_b.size() && f_a.size() >= 1, ErrorCode::length_mismatch,
            "pointer maps must share a nonempty domain");
    ChaseResult out;
    out.trace.reserve(2 * c + 2);
    out.trace.push_back(1);
    for (unsigned step = 2; step <= 2 * c + 2; ++step) {
        const auto& f = step % 2 == 0 ? f_a : f_b;
        const std::uint64_t w = f(out.trace.back());
        require(w >= 1 && w <= f.size(), ErrorCode::malformed, "pointer map value out of range");
        out.trace.push_back(w);
    }
    out.parity = static_cast<std::uint8_t>(out.trace.back() % 2);
    return out;
}

PcClassSpec PcClassSpec::make(unsigned c, std::uint64_t k, std::uint64_t d, std::uint64_t b) {
    require(c >= 1 && k >= 1 && d >= 1 && b >= 1, ErrorCode::parameter, "c, k, d, b must be positive");
    PcClassSpec spec;
    spec.c = c;
    spec.k = k;
    spec.d = d;
    spec.b = b;
    require(k <= (std::uint64_t{1} << 20) && d <= (std::uint64_t{1} << 20) && b <= 62, ErrorCode::parameter,
            "pointer-chasing parameters out of range");
    spec.pointers = k * d * b;
    std::uint64_t symbols = 1;
    for (std::uint64_t l = 0; l < b; ++l) {
        require(symbols <= (std::uint64_t{1} << 62) / spec.pointers, ErrorCode::parameter,
                "(kdb)^b does not fit in 62 bits");
        symbols *= spec.pointers;
    }
    spec.symbols = symbols;
    spec.p = smallest_prime_at_least(symbols);
    require(2 * d <= spec.p, ErrorCode::parameter, "RS_{d,2d} needs 2d <= p");
    return spec;
}

unsigned PcClassSpec::description_bits() const { return mpcl::description_bits(universe_size()); }

PcPoint PcClassSpec::decode(PointId x) const {
    PcPoint out;
    std::uint64_t v = x.value;
    out.value = v % p;
    v /= p;
    out.column = v % (2 * d);
    v /= 2 * d;
    out.block = v % k;
    out.side = v / k;
    return out;
}

Pointer PcClassSpec::rho_inverse(std::uint64_t w) const {
    require(w >= 1 && w <= pointers, ErrorCode::malformed, "pointer index out of range");
    const std::uint64_t v = w - 1;
    return Pointer{v / (d * b), (v / b) % d, v % b};
}

std::uint64_t PcClassSpec::pack(std::span<const Pointer> pointers_in) const {
    require(pointers_in.size() == b, ErrorCode::length_mismatch, "a symbol packs exactly b pointers");
    std::uint64_t symbol = 0;
    for (std::size_t l = b; l-- > 0;) symbol = symbol * pointers + (rho(pointers_in[l]) - 1);
    return symbol;
}

std::vector<Pointer> PcClassSpec::unpack(std::uint64_t symbol) const {
    require(symbol < symbols, ErrorCode::malformed, "symbol outside B");
    std::vector<Pointer> out;
    out.reserve(b);
    for (std::uint64_t l = 0; l < b; ++l) {
        out.push_back(rho_inverse(symbol % pointers + 1));
        symbol /= pointers;
    }
    return out;
}

Pointer PcClassSpec::unpack_one(std::uint64_t symbol, std::uint64_t slot) const {
    require(symbol < symbols && slot < b, ErrorCode::malformed, "symbol outside B");
    for (std::uint64_t l = 0; l < slot; ++l) symbol /= pointers;
    return rho_inverse(symbol % pointers + 1);
}

PcHypothesis::PcHypothesis(PcClassSpec spec, PcParams params)
    : spec_(spec),
      a_(std::move(params)),
      i_rows_(spec.k, kNil),
      j_rows_(spec.k, kNil),
      codewords_(2 * spec.k) {
    require(a_.size() == spec_.rows() * spec_.d, ErrorCode::malformed,
            "parameter tuple must hold (2c+1)*d symbols");
    for (auto s : a_) require(s < spec_.symbols, ErrorCode::malformed, "parameter symbol outside B");

    const RSCode code{spec_.p, spec_.d, 2 * spec_.d};
    Pointer q{0, 0, 0};
    trace_.push_back(q);
    for (std::uint64_t step = 2; step <= 2 * spec_.c + 2; ++step) {
        const std::uint64_t side = step % 2 == 0 ? 0 : 1;
        auto& rows = side == 0 ? i_rows_ : j_rows_;
        if (rows[q.block] == kNil) {
            rows[q.block] = step - 1;
            const auto begin = a_.begin() + static_cast<std::ptrdiff_t>((step - 2) * spec_.d);
            codewords_[side * spec_.k + q.block] =
                rs_encode(code, std::span<const std::uint64_t>(&*begin, spec_.d));
        }
        q = spec_.unpack_one(this->a(rows[q.block], q.cell), q.slot);
        trace_.push_back(q);
    }
}

bool PcHypothesis::eval(PointId x) const {
    const auto pt = spec_.decode(x);
    const auto& word = codewords_[pt.side * spec_.k + pt.block];
    if (word.empty()) return true;
    return pt.value == word[pt.column];
}

std::uint64_t PcHypothesis::repr_bits() const { return spec_.rows() * spec_.d * ceil_log2(spec_.symbols); }

Hypothesis build_pc_hypothesis(const PcClassSpec& spec, PcParams a) {
    return Hypothesis(std::make_shared<PcHypothesis>(spec, std::move(a)));
}

std::uint8_t decode_pointer_parity(const PcHypothesis& h) {
    return static_cast<std::uint8_t>(h.spec().rho(h.trace().back()) % 2);
}

PcClass::PcClass(PcClassSpec spec) : spec_(spec) {}

std::optional<std::uint64_t> PcClass::cardinality() const {
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < spec_.rows() * spec_.d; ++i) {
        if (count > std::numeric_limits<std::uint64_t>::max() / spec_.symbols) return std::nullopt;
        count *= spec_.symbols;
    }
    return count;
}

void PcClass::enumerate(const std::function<bool(const Hypothesis&)>& visit) const {
    require_enumerable();
    PcParams digits(spec_.rows() * spec_.d, 0);
    while (true) {
        if (!visit(build_pc_hypothesis(spec_, digits))) return;
        std::size_t pos = digits.size();
        while (pos > 0 && ++digits[pos - 1] == spec_.symbols) {
            digits[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) return;
    }
}

Hypothesis PcClass::erm(std::span<const LabeledExample> sample) const {
    require(!sample.empty(), ErrorCode::empty_sample, "ERM over an empty sample");
    const std::uint64_t d = spec_.d;
    std::uint64_t row_space = 1;
    for (std::uint64_t j = 0; j < d; ++j) {
        require(row_space <= row_search_cap_ / spec_.symbols, ErrorCode::budget,
                "greedy pointer-chasing ERM: |B|^d exceeds the row search cap");
        row_space *= spec_.symbols;
    }

    // (column, value, label) -> count, per block side.
    using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint8_t>;
    std::vector<std::map<Key, std::uint64_t>> groups(2 * spec_.k);
    for (const auto& ex : sample) {
        const auto pt = spec_.decode(ex.point);
        ++groups[pt.side * spec_.k + pt.block][Key{pt.column, pt.value, ex.label}];
    }

    const RSCode code{spec_.p, d, 2 * d};
    PcParams a(spec_.rows() * d, 0);
    std::vector<std::uint64_t> i_rows(spec_.k, kNil);
    std::vector<std::uint64_t> j_rows(spec_.k, kNil);
    Pointer q{0, 0, 0};
    std::vector<std::uint64_t> row(d);
    for (std::uint64_t step = 2; step <= 2 * spec_.c + 2; ++step) {
        const std::uint64_t side = step % 2 == 0 ? 0 : 1;
        auto& rows = side == 0 ? i_rows : j_rows;
        if (rows[q.block] == kNil) {
            rows[q.block] = step - 1;
            const auto& group = groups[side * spec_.k + q.block];
            std::uint64_t best_index = 0;
            if (!group.empty()) {
                std::uint64_t best_errors = std::numeric_limits<std::uint64_t>::max();
                for (std::uint64_t index = 0; index < row_space && best_errors > 0; ++index) {
                    // Row index -> symbols with a_{.,1} most significant.
                    std::uint64_t v = index;
                    for (std::size_t j = d; j-- > 0;) {
                        row[j] = v % spec_.symbols;
                        v /= spec_.symbols;
                    }
                    const auto word = rs_encode(code, row);
                    std::uint64_t errors = 0;
                    for (const auto& [key, count] : group) {
                        const auto& [column, value, label] = key;
                        const std::uint8_t predicted = word[column] == value ? 1 : 0;
                        if (predicted != label) errors += count;
                    }
                    if (errors < best_errors) {
                        best_errors = errors;
                        best_index = index;
                    }
                }
            }
            std::uint64_t v = best_index;
            for (std::size_t j = d; j-- > 0;) {
                a[(step - 2) * d + j] = v % spec_.symbols;
                v /= spec_.symbols;
            }
        }
        q = spec_.unpack_one(a[(rows[q.block] - 1) * d + q.cell], q.slot);
    }
    return build_pc_hypothesis(spec_, std::move(a));
}

std::uint64_t map_digest(const PointerMap& f) {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : f.values) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

PcClassSpec resolve_multipass_spec(const MultiPassConfig& config, std::uint64_t& alpha, bool& full_scale) {
    require(config.c >= 1 && config.k_prime >= 1, ErrorCode::parameter, "c and k' must be positive");
    require(config.epsilon > 0.0 && config.epsilon <= 0.25, ErrorCode::parameter, "epsilon must be in (0, 1/4]");
    alpha = static_cast<std::uint64_t>(std::floor(1.0 / (4.0 * config.epsilon)));
    const std::uint64_t k = config.k_prime * alpha;
    const bool desk = config.k || config.d || config.b;
    full_scale = !desk;
    if (desk) {
        require(config.k && config.d && config.b, ErrorCode::parameter, "desk-scale override needs k, d and b");
        require(*config.k == k, ErrorCode::parameter,
                "desk-scale k must equal k' * floor(1/(4 eps)) = " + std::to_string(k));
        return PcClassSpec::make(config.c, *config.k, *config.d, *config.b);
    }
    const std::uint64_t c = config.c;
    require(config.d_prime >= 6 * c + 4, ErrorCode::parameter, "d' too small for d >= 1");
    const std::uint64_t d = (config.d_prime - 2 * c - 2) / (4 * c + 2);
    std::optional<PcClassSpec> best;
    for (std::uint64_t b = 1; b <= 62; ++b) {
        PcClassSpec spec;
        try {
            spec = PcClassSpec::make(config.c, k, d, b);
        } catch (const Error&) {
            break;
        }
        if (spec.description_bits() > config.b_prime) break;
        best = spec;
    }
    require(best.has_value(), ErrorCode::parameter, "no b >= 1 fits the description size b'");
    return *best;
}

MultiPassInstance gen_multipass_instance(const MultiPassConfig& config, const PointerMap& f_a,
                                         const PointerMap& f_b, std::uint64_t seed) {
    MultiPassMeta meta;
    const auto spec = resolve_multipass_spec(config, meta.alpha, meta.full_scale);
    const std::uint64_t n = spec.pointers;
    require(f_a.size() == n && f_b.size() == n, ErrorCode::length_mismatch,
            "pointer maps must be over [kdb] = [" + std::to_string(n) + "]");
    for (const auto* f : {&f_a, &f_b}) {
        for (auto v : f->values) require(v >= 1 && v <= n, ErrorCode::malformed, "pointer map value out of range");
    }

    // y_{i,j} in B from each side's map.
    auto symbols_from = [&](const PointerMap& f) {
        std::vector<std::uint64_t> y(spec.k * spec.d);
        std::vector<Pointer> row(spec.b);
        for (std::uint64_t i = 0; i < spec.k; ++i) {
            for (std::uint64_t j = 0; j < spec.d; ++j) {
                for (std::uint64_t l = 0; l < spec.b; ++l) row[l] = spec.rho_inverse(f(spec.rho({i, j, l})));
                y[i * spec.d + j] = spec.pack(row);
            }
        }
        return y;
    };
    const auto y_a = symbols_from(f_a);
    const auto y_b = symbols_from(f_b);

    const RSCode code{spec.p, spec.d, 2 * spec.d};
    MultiPassInstance out;
    out.spec = spec;
    out.f_a = f_a;
    out.f_b = f_b;
    for (std::uint64_t side = 0; side < 2; ++side) {
        const auto& y = side == 0 ? y_a : y_b;
        for (std::uint64_t task = 0; task < config.k_prime; ++task) {
            std::vector<PointId> points;
            for (std::uint64_t block = task * meta.alpha; block < (task + 1) * meta.alpha; ++block) {
                const auto word = rs_encode(code, std::span<const std::uint64_t>(&y[block * spec.d], spec.d));
                for (std::uint64_t column = 0; column < 2 * spec.d; ++column) {
                    points.push_back(spec.encode({side, block, column, word[column]}));
                }
            }
            out.tasks.push_back(TaskDistribution::uniform(points, 1));
        }
    }

    const auto chase = chase_pointers(f_a, f_b, config.c);
    PcParams a(spec.rows() * spec.d);
    for (std::uint64_t i = 1; i <= spec.rows(); ++i) {
        const auto& y = i % 2 == 1 ? y_a : y_b;
        const std::uint64_t block = spec.rho_inverse(chase.trace[i - 1]).block;
        for (std::uint64_t j = 0; j < spec.d; ++j) a[(i - 1) * spec.d + j] = y[block * spec.d + j];
    }
    out.witness = build_pc_hypothesis(spec, std::move(a));

    meta.c = config.c;
    meta.k = spec.k;
    meta.d = spec.d;
    meta.b = spec.b;
    meta.k_prime = config.k_prime;
    meta.n_pc = n;
    meta.p = spec.p;
    meta.f_a_digest = map_digest(f_a);
    meta.f_b_digest = map_digest(f_b);
    meta.seed = seed;
    meta.description_bits = spec.description_bits();
    out.meta = meta;
    return out;
}

MultiPassInstance gen_multipass_instance(const MultiPassConfig& config, std::uint64_t seed) {
    std::uint64_t alpha = 0;
    bool faithful = true;
    const auto spec = resolve_multipass_spec(config, alpha, faithful);
    Rng rng(seed);
    const auto f_a = random_pointer_map(spec.pointers, rng);
    const auto f_b = random_pointer_map(spec.pointers, rng);
    return gen_multipass_instance(config, f_a, f_b, seed);
}

}  // namespace mpcl
