#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "mpcl/hypothesis.hpp"
#include "mpcl/universe.hpp"

namespace mpcl {

// Order key of a sample at one level: weight exp(eta * miss) first, then the
// point, then the tie tag. exp is increasing, so comparing miss counts is
// the same as comparing weights.
struct WeightKey {
    std::uint32_t miss = 0;
    PointId point;
    std::uint64_t tag = 0;

    friend constexpr auto operator<=>(const WeightKey&, const WeightKey&) = default;
};

// Thresholds of one (task, pass): entry tau-1 is the level-tau anchor.
using Thresholds = std::vector<WeightKey>;

// Miss count of the level-(t-1) anchor; 0 (weight 1) when t = 1.
std::uint32_t cap_miss(std::span<const WeightKey> thresholds, unsigned t);

// Admitted tags of one atom: [0, limit), or every tag when `full`.
struct TagWindow {
    bool full = true;
    std::uint64_t limit = 0;

    bool admits(std::uint64_t tag) const { return full || tag < limit; }
    bool empty() const { return !full && limit == 0; }
    long double fraction() const;
    // limit as a real in [0, 2^64].
    long double width() const;
};

// Miss-count prefixes of every atom of a task against h_1..h_{t-1}.
class StageView {
public:
    StageView(const TaskDistribution& task, std::span<const Hypothesis> hypotheses);

    const TaskDistribution& task() const { return *task_; }
    // Pass index t = number of hypotheses + 1.
    unsigned t() const { return t_; }
    std::size_t atoms() const { return task_->size(); }

    // Misses among h_1..h_level; level in [0, t-1].
    std::uint32_t miss(std::size_t atom, unsigned level) const { return misses_[atom * t_ + level]; }
    WeightKey key(std::size_t atom, unsigned level, std::uint64_t tag) const {
        return {miss(atom, level), task_->atom(atom).point, tag};
    }

    // Tags of `atom` whose level-nu key strictly precedes thresholds[nu-1]
    // for every nu in [1, levels].
    TagWindow window(std::size_t atom, std::span<const WeightKey> thresholds, unsigned levels) const;

private:
    const TaskDistribution* task_;
    unsigned t_;
    std::vector<std::uint32_t> misses_;
};

}  // namespace mpcl
