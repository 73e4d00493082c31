#include "mpcl/hypothesis_class.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "mpcl/errors.hpp"

namespace mpcl {

void HypothesisClass::require_enumerable() const {
    const auto count = cardinality();
    require(count.has_value() && *count <= enumeration_cap_, ErrorCode::budget,
            name() + ": class too large to enumerate (cap " + std::to_string(enumeration_cap_) + ")");
}

Hypothesis HypothesisClass::erm(std::span<const LabeledExample> sample) const {
    require(!sample.empty(), ErrorCode::empty_sample, "ERM over an empty sample");
    require_enumerable();
    Hypothesis best;
    std::size_t best_errors = std::numeric_limits<std::size_t>::max();
    enumerate([&](const Hypothesis& h) {
        std::size_t errors = 0;
        for (const auto& ex : sample) {
            errors += h.label(ex.point) != ex.label ? 1 : 0;
            if (errors >= best_errors) break;
        }
        if (errors < best_errors) {
            best_errors = errors;
            best = h;
        }
        return best_errors > 0;
    });
    return best;
}

ExplicitClass::ExplicitClass(std::string name, std::uint64_t universe_size, std::vector<Hypothesis> members,
                             unsigned vc_hint)
    : name_(std::move(name)), universe_size_(universe_size), members_(std::move(members)), vc_hint_(vc_hint) {
    require(!members_.empty(), ErrorCode::malformed, "hypothesis class must be nonempty");
}

void ExplicitClass::enumerate(const std::function<bool(const Hypothesis&)>& visit) const {
    for (const auto& h : members_) {
        if (!visit(h)) return;
    }
}

ExplicitClass constants_class(std::uint64_t universe_size) {
    return ExplicitClass("constants", universe_size,
                         {make_constant(universe_size, 0), make_constant(universe_size, 1)}, 1);
}

ExplicitClass all_tables_class(std::uint64_t universe_size) {
    require(universe_size <= 20, ErrorCode::budget, "all-tables class limited to 20 points");
    std::vector<Hypothesis> members;
    const std::uint64_t count = std::uint64_t{1} << universe_size;
    members.reserve(count);
    for (std::uint64_t m = 0; m < count; ++m) {
        std::vector<std::uint8_t> labels(universe_size);
        for (std::uint64_t x = 0; x < universe_size; ++x) {
            labels[x] = static_cast<std::uint8_t>((m >> (universe_size - 1 - x)) & 1U);
        }
        members.push_back(make_table(std::move(labels)));
    }
    return ExplicitClass("all-tables", universe_size, std::move(members),
                         static_cast<unsigned>(universe_size));
}

ExplicitClass threshold_class(std::uint64_t universe_size) {
    std::vector<Hypothesis> members;
    members.reserve(universe_size + 1);
    for (std::uint64_t theta = 0; theta <= universe_size; ++theta) {
        std::vector<std::uint8_t> labels(universe_size);
        for (std::uint64_t x = 0; x < universe_size; ++x) labels[x] = x >= theta ? 1 : 0;
        members.push_back(make_table(std::move(labels)));
    }
    return ExplicitClass("threshold", universe_size, std::move(members), 1);
}

Hypothesis erm(const HypothesisClass& cls, std::span<const LabeledExample> sample) {
    return cls.erm(sample);
}

std::optional<Hypothesis> check_realizable(const HypothesisClass& cls, std::span<const TaskDistribution> tasks,
                                           std::uint64_t cap) {
    require(!tasks.empty(), ErrorCode::empty_sample, "realizability check needs at least one task");
    // Pool every positive-mass atom. Conflicting labels on one point make the
    // instance unrealizable outright.
    std::vector<LabeledExample> pooled;
    for (const auto& task : tasks) {
        for (const auto& a : task.atoms()) {
            if (a.mass > 0.0) pooled.push_back({a.point, a.label, 0});
        }
    }
    auto consistent = [&](const Hypothesis& h) {
        return std::all_of(pooled.begin(), pooled.end(),
                           [&](const LabeledExample& ex) { return h.label(ex.point) == ex.label; });
    };

    const auto count = cls.cardinality();
    if (count && *count <= cap) {
        std::optional<Hypothesis> witness;
        cls.enumerate([&](const Hypothesis& h) {
            if (consistent(h)) {
                witness = h;
                return false;
            }
            return true;
        });
        return witness;
    }
    require(cls.erm_is_exact(), ErrorCode::budget,
            cls.name() + ": class exceeds the enumeration cap and has no exact ERM");
    auto h = cls.erm(pooled);
    if (consistent(h)) return h;
    return std::nullopt;
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool bit(const Bits& row, std::uint64_t x) { return (row[x >> 6] >> (x & 63)) & 1U; }

double sauer_bound(unsigned set_size, unsigned d) {
    double total = 0.0;
    double binom = 1.0;
    for (unsigned i = 0; i <= std::min(d, set_size); ++i) {
        if (i > 0) binom = binom * (set_size - i + 1) / i;
        total += binom;
    }
    return total;
}

struct Projection {
    bool shattered = false;
    std::uint64_t distinct = 0;
};

Projection project(const std::vector<Bits>& rows, const std::vector<std::uint32_t>& set) {
    const std::size_t patterns = std::size_t{1} << set.size();
    std::vector<std::uint64_t> seen((patterns + 63) / 64, 0);
    Projection out;
    for (const auto& row : rows) {
        std::size_t pattern = 0;
        for (std::size_t j = 0; j < set.size(); ++j) pattern |= static_cast<std::size_t>(bit(row, set[j])) << j;
        auto& word = seen[pattern >> 6];
        const std::uint64_t mask = std::uint64_t{1} << (pattern & 63);
        if (!(word & mask)) {
            word |= mask;
            if (++out.distinct == patterns) {
                out.shattered = true;
                return out;
            }
        }
    }
    return out;
}

struct SetHash {
    std::size_t operator()(const std::vector<std::uint32_t>& s) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto v : s) h = (h ^ v) * 1099511628211ULL;
        return h;
    }
};

}  // namespace

VcResult vc_dimension_bruteforce(const HypothesisClass& cls, std::uint64_t universe_size, unsigned cap,
                                 std::uint64_t subset_limit, Exec exec) {
    require(universe_size > 0 && universe_size <= (std::uint64_t{1} << 20), ErrorCode::budget,
            "universe too large for shattering search");
    const auto count = cls.cardinality();
    require(count && *count <= cls.enumeration_cap(), ErrorCode::budget,
            cls.name() + ": class too large for shattering search");

    // Distinct behaviours only; duplicates cannot add patterns.
    const std::size_t words = (universe_size + 63) / 64;
    std::set<Bits> distinct;
    cls.enumerate([&](const Hypothesis& h) {
        Bits row(words, 0);
        for (std::uint64_t x = 0; x < universe_size; ++x) {
            if (h(PointId{x})) row[x >> 6] |= std::uint64_t{1} << (x & 63);
        }
        distinct.insert(std::move(row));
        return true;
    });
    const std::vector<Bits> rows(distinct.begin(), distinct.end());

    VcResult result;
    result.distinct_hypotheses = rows.size();
    std::vector<std::pair<unsigned, std::uint64_t>> non_shattered_sizes;  // (|S|, |H(S)|)

    std::vector<std::vector<std::uint32_t>> level{{}};  // shattered sets of the current size
    unsigned size = 0;
    while (!level.empty() && size < cap) {
        std::unordered_set<std::vector<std::uint32_t>, SetHash> lookup(level.begin(), level.end());
        std::vector<std::vector<std::uint32_t>> candidates;
        for (const auto& s : level) {
            const std::uint32_t start = s.empty() ? 0 : s.back() + 1;
            for (std::uint32_t e = start; e < universe_size; ++e) {
                auto cand = s;
                cand.push_back(e);
                // Every subset one smaller must already be shattered.
                bool viable = true;
                for (std::size_t drop = 0; drop + 1 < cand.size() && viable; ++drop) {
                    std::vector<std::uint32_t> sub;
                    sub.reserve(cand.size() - 1);
                    for (std::size_t j = 0; j < cand.size(); ++j) {
                        if (j != drop) sub.push_back(cand[j]);
                    }
                    viable = lookup.count(sub) > 0;
                }
                if (viable) candidates.push_back(std::move(cand));
            }
        }
        result.subsets_checked += candidates.size();
        require(result.subsets_checked <= subset_limit, ErrorCode::budget,
                "shattering search exceeded the subset limit");

        std::vector<Projection> projections(candidates.size());
        const auto n = static_cast<std::int64_t>(candidates.size());
        if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
            for (std::int64_t c = 0; c < n; ++c) projections[c] = project(rows, candidates[c]);
        } else {
            for (std::int64_t c = 0; c < n; ++c) projections[c] = project(rows, candidates[c]);
        }

        std::vector<std::vector<std::uint32_t>> next;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (projections[c].shattered) {
                next.push_back(std::move(candidates[c]));
            } else {
                non_shattered_sizes.emplace_back(size + 1, projections[c].distinct);
            }
        }
        if (next.empty()) break;
        level = std::move(next);
        ++size;
    }
    result.dimension = size;
    result.at_least_cap = size >= cap && !level.empty();
    for (auto [set_size, distinct_count] : non_shattered_sizes) {
        if (static_cast<double>(distinct_count) > sauer_bound(set_size, result.dimension)) {
            result.sauer_shelah_ok = false;
        }
    }
    return result;
}

}  // namespace mpcl
