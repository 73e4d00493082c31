#include "mpcl/line_class.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "mpcl/errors.hpp"

namespace mpcl {

bool on_line(const LineParams& a, std::uint64_t r1, std::uint64_t r2, const PrimeField& field) {
    return field.add(field.mul(a.slope, r1), r2) == field.reduce(a.intercept);
}

unsigned ceil_log2(std::uint64_t n) {
    if (n <= 1) return 0;
    return static_cast<unsigned>(std::bit_width(n - 1));
}

unsigned LineClassSpec::description_bits() const { return mpcl::description_bits(universe_size()); }

LinePoint LineClassSpec::decode(PointId x) const {
    LinePoint out;
    std::uint64_t v = x.value;
    out.r2 = v % p;
    v /= p;
    out.r1 = v % p;
    v /= p;
    out.cell = v % d;
    out.block = v / d;
    return out;
}

LineHypothesis::LineHypothesis(LineClassSpec spec, std::uint64_t block, std::vector<LineParams> lines)
    : spec_(spec), field_(spec.p), block_(block), lines_(std::move(lines)) {
    require(block_ < spec_.n, ErrorCode::malformed, "line hypothesis block out of range");
    require(lines_.size() == spec_.d, ErrorCode::malformed, "line hypothesis needs one line per cell");
    for (const auto& a : lines_) {
        require(a.slope < spec_.p && a.intercept < spec_.p, ErrorCode::malformed,
                "line parameters must be field residues");
    }
}

bool LineHypothesis::eval(PointId x) const {
    const auto pt = spec_.decode(x);
    if (pt.block != block_) return true;
    return on_line(lines_[pt.cell], pt.r1, pt.r2, field_);
}

std::uint64_t LineHypothesis::repr_bits() const {
    return ceil_log2(spec_.n) + 2 * spec_.d * ceil_log2(spec_.p);
}

Hypothesis make_line_hypothesis(const LineClassSpec& spec, std::uint64_t block, std::vector<LineParams> lines) {
    return Hypothesis(std::make_shared<LineHypothesis>(spec, block, std::move(lines)));
}

LineClass::LineClass(LineClassSpec spec) : spec_(spec) {
    require(spec_.n >= 1 && spec_.d >= 1, ErrorCode::parameter, "line class needs n, d >= 1");
    require(is_prime(spec_.p), ErrorCode::parameter, "line class modulus must be prime");
}

std::optional<std::uint64_t> LineClass::cardinality() const {
    const std::uint64_t lines = spec_.p * spec_.p;
    std::uint64_t count = spec_.n;
    for (std::uint64_t j = 0; j < spec_.d; ++j) {
        if (count > std::numeric_limits<std::uint64_t>::max() / lines) return std::nullopt;
        count *= lines;
    }
    return count;
}

void LineClass::enumerate(const std::function<bool(const Hypothesis&)>& visit) const {
    require_enumerable();
    const std::uint64_t lines = spec_.p * spec_.p;
    for (std::uint64_t block = 0; block < spec_.n; ++block) {
        std::vector<std::uint64_t> digits(spec_.d, 0);
        while (true) {
            std::vector<LineParams> params;
            params.reserve(spec_.d);
            for (auto v : digits) params.push_back({v / spec_.p, v % spec_.p});
            if (!visit(make_line_hypothesis(spec_, block, std::move(params)))) return;
            // Odometer with the last cell fastest.
            std::size_t pos = spec_.d;
            while (pos > 0 && ++digits[pos - 1] == lines) {
                digits[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
    }
}

Hypothesis LineClass::erm(std::span<const LabeledExample> sample) const {
    require(!sample.empty(), ErrorCode::empty_sample, "ERM over an empty sample");
    const std::uint64_t p = spec_.p;
    const std::uint64_t lines = p * p;
    require(lines <= (std::uint64_t{1} << 26), ErrorCode::budget, "line ERM needs p^2 <= 2^26");
    const PrimeField field(p);

    // Group samples by (block, cell).
    std::vector<std::vector<const LabeledExample*>> by_cell(spec_.n * spec_.d);
    std::vector<std::uint64_t> zeros_in_block(spec_.n, 0);
    std::uint64_t total_zeros = 0;
    for (const auto& ex : sample) {
        const auto pt = spec_.decode(ex.point);
        by_cell[pt.block * spec_.d + pt.cell].push_back(&ex);
        if (ex.label == 0) {
            ++zeros_in_block[pt.block];
            ++total_zeros;
        }
    }

    // Errors of cell (i, j) under line a: ones off a plus zeros on a.
    // score[a] = ones_on(a) - zeros_on(a); errors = ones_in_cell - score[a].
    std::vector<std::int64_t> score(lines);
    auto best_line = [&](const std::vector<const LabeledExample*>& cell, std::uint64_t& errors) {
        std::fill(score.begin(), score.end(), 0);
        std::int64_t ones = 0;
        for (const auto* ex : cell) {
            const auto pt = spec_.decode(ex->point);
            const std::int64_t delta = ex->label ? 1 : -1;
            ones += ex->label;
            for (std::uint64_t slope = 0; slope < p; ++slope) {
                const std::uint64_t intercept = field.add(field.mul(slope, pt.r1), pt.r2);
                score[slope * p + intercept] += delta;
            }
        }
        const auto it = std::max_element(score.begin(), score.end());  // first maximum
        const auto index = static_cast<std::uint64_t>(it - score.begin());
        errors = static_cast<std::uint64_t>(ones - *it);
        return LineParams{index / p, index % p};
    };

    std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t best_block = 0;
    std::vector<LineParams> best_lines;
    for (std::uint64_t block = 0; block < spec_.n; ++block) {
        std::uint64_t cost = total_zeros - zeros_in_block[block];
        if (cost >= best_cost) continue;
        std::vector<LineParams> chosen(spec_.d, LineParams{0, 0});
        for (std::uint64_t cell = 0; cell < spec_.d && cost < best_cost; ++cell) {
            const auto& members = by_cell[block * spec_.d + cell];
            if (members.empty()) continue;
            std::uint64_t errors = 0;
            chosen[cell] = best_line(members, errors);
            cost += errors;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_block = block;
            best_lines = std::move(chosen);
        }
    }
    return make_line_hypothesis(spec_, best_block, std::move(best_lines));
}

namespace {

// Floyd's algorithm: uniform size-m subset of [0, universe).
std::vector<std::uint64_t> floyd_subset(std::uint64_t universe, std::uint64_t m, Rng& rng) {
    std::unordered_set<std::uint64_t> chosen;
    std::vector<std::uint64_t> out;
    out.reserve(m);
    for (std::uint64_t j = universe - m; j < universe; ++j) {
        const std::uint64_t v = rng.below(j + 1);
        if (chosen.insert(v).second) {
            out.push_back(v);
        } else {
            chosen.insert(j);
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

OnePassInstance gen_onepass_instance(const OnePassConfig& config, std::uint64_t seed) {
    require(config.k >= 1 && config.d >= 1, ErrorCode::parameter, "one-pass instance needs k, d >= 1");
    require(config.epsilon > 0.0 && config.epsilon < 1.0, ErrorCode::parameter, "epsilon must be in (0,1)");
    OnePassMeta meta;
    meta.k = config.k;
    meta.d = config.d;
    meta.seed = seed;
    meta.full_scale = !config.n && !config.p;

    if (config.n) {
        require(*config.n % config.k == 0 && *config.n >= config.k, ErrorCode::parameter,
                "n must be a positive multiple of k");
        meta.n = *config.n;
        meta.alpha = meta.n / config.k;
    } else {
        require(config.epsilon <= 0.01, ErrorCode::parameter, "full-scale one-pass instances need epsilon <= 0.01");
        meta.alpha = static_cast<std::uint64_t>(std::floor(1.0 / (100.0 * config.epsilon)));
        require(meta.alpha >= 1, ErrorCode::parameter, "floor(1/(100 epsilon)) must be >= 1");
        meta.n = config.k * meta.alpha;
    }

    if (config.p) {
        require(is_prime(*config.p), ErrorCode::parameter, "p must be prime");
        meta.p = *config.p;
    } else {
        const double bound = std::ldexp(1.0, static_cast<int>(config.b) / 2) *
                             (config.b % 2 ? std::sqrt(2.0) : 1.0) /
                             std::sqrt(static_cast<double>(meta.n * config.d));
        require(bound >= 2.0 && bound < 1.8e19, ErrorCode::parameter, "description size b out of range");
        meta.p = largest_prime_at_most(static_cast<std::uint64_t>(std::floor(bound)));
    }
    require(meta.p >= config.min_prime, ErrorCode::parameter,
            "prime " + std::to_string(meta.p) + " is below the configured minimum " +
                std::to_string(config.min_prime));
    require(config.d * meta.p * meta.p <= config.atom_cap, ErrorCode::budget,
            "instance would materialize more than the atom cap");

    const LineClassSpec spec{meta.n, config.d, meta.p};
    meta.description_bits = spec.description_bits();
    if (meta.full_scale) {
        require(meta.description_bits <= config.b, ErrorCode::parameter, "derived universe exceeds description size b");
    }
    meta.t = static_cast<std::uint64_t>(std::floor(0.2 * static_cast<double>(meta.p)));
    require(meta.t >= 1, ErrorCode::parameter, "t = floor(0.2 p) must be >= 1");

    const PrimeField field(meta.p);
    const std::uint64_t p = meta.p;
    const std::uint64_t lines = p * p;
    Rng rng(seed);

    std::vector<LineParams> planted(meta.n * config.d);
    for (auto& a : planted) {
        const std::uint64_t v = rng.below(lines);
        a = {v / p, v % p};
    }
    // A_{i,j}: a_{i,j} plus t-1 uniform lines from the rest.
    std::vector<std::vector<LineParams>> line_sets(planted.size());
    for (std::size_t c = 0; c < planted.size(); ++c) {
        const std::uint64_t own = planted[c].slope * p + planted[c].intercept;
        auto& set = line_sets[c];
        set.push_back(planted[c]);
        for (auto v : floyd_subset(lines - 1, meta.t - 1, rng)) {
            const std::uint64_t idx = v >= own ? v + 1 : v;
            set.push_back({idx / p, idx % p});
        }
    }
    meta.i_star = rng.below(meta.n);

    OnePassInstance out;
    out.spec = spec;
    out.meta = meta;
    for (unsigned task = 0; task < config.k; ++task) {
        std::vector<PointId> points;
        points.reserve(meta.alpha * config.d * p);
        for (std::uint64_t block = task * meta.alpha; block < (task + 1) * meta.alpha; ++block) {
            for (std::uint64_t cell = 0; cell < config.d; ++cell) {
                const auto& a = planted[block * config.d + cell];
                for (std::uint64_t r1 = 0; r1 < p; ++r1) {
                    const std::uint64_t r2 = field.sub(a.intercept, field.mul(a.slope, r1));
                    points.push_back(spec.encode({block, cell, r1, r2}));
                }
            }
        }
        std::sort(points.begin(), points.end());
        out.tasks.push_back(TaskDistribution::uniform(points, 1));
    }

    std::vector<PointId> negatives;
    std::vector<std::uint8_t> covered(lines);
    for (std::uint64_t cell = 0; cell < config.d; ++cell) {
        std::fill(covered.begin(), covered.end(), 0);
        const auto& set = line_sets[meta.i_star * config.d + cell];
        for (const auto& a : set) {
            for (std::uint64_t r1 = 0; r1 < p; ++r1) {
                covered[r1 * p + field.sub(a.intercept, field.mul(a.slope, r1))] = 1;
            }
        }
        for (std::uint64_t r = 0; r < lines; ++r) {
            if (!covered[r]) negatives.push_back(spec.encode({meta.i_star, cell, r / p, r % p}));
        }
        out.excluded_lines.push_back(set);
    }
    out.tasks.push_back(TaskDistribution::uniform(negatives, 0));

    std::vector<LineParams> witness_lines(planted.begin() + static_cast<std::ptrdiff_t>(meta.i_star * config.d),
                                          planted.begin() + static_cast<std::ptrdiff_t>((meta.i_star + 1) * config.d));
    out.witness = make_line_hypothesis(spec, meta.i_star, std::move(witness_lines));
    return out;
}

}  // namespace mpcl
