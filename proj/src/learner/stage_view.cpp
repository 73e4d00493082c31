#include "mpcl/learner/stage_view.hpp"

#include <algorithm>
#include <cmath>

#include "mpcl/errors.hpp"

namespace mpcl {

std::uint32_t cap_miss(std::span<const WeightKey> thresholds, unsigned t) {
    if (t <= 1) return 0;
    require(thresholds.size() >= t - 1, ErrorCode::malformed, "missing level t-1 threshold");
    return thresholds[t - 2].miss;
}

long double TagWindow::width() const { return full ? std::ldexp(1.0L, 64) : static_cast<long double>(limit); }

long double TagWindow::fraction() const { return full ? 1.0L : std::ldexp(static_cast<long double>(limit), -64); }

StageView::StageView(const TaskDistribution& task, std::span<const Hypothesis> hypotheses)
    : task_(&task), t_(static_cast<unsigned>(hypotheses.size()) + 1) {
    misses_.assign(task.size() * t_, 0);
    for (std::size_t a = 0; a < task.size(); ++a) {
        const auto& atom = task.atom(a);
        std::uint32_t m = 0;
        for (unsigned level = 1; level < t_; ++level) {
            m += hypotheses[level - 1].label(atom.point) != atom.label ? 1 : 0;
            misses_[a * t_ + level] = m;
        }
    }
}

TagWindow StageView::window(std::size_t atom, std::span<const WeightKey> thresholds, unsigned levels) const {
    require(thresholds.size() >= levels && levels < t_, ErrorCode::malformed, "window needs more thresholds");
    TagWindow w;
    const PointId point = task_->atom(atom).point;
    for (unsigned nu = 1; nu <= levels; ++nu) {
        const auto& thr = thresholds[nu - 1];
        const std::uint32_t m = miss(atom, nu);
        if (m < thr.miss || (m == thr.miss && point < thr.point)) continue;
        if (m > thr.miss || point > thr.point) return TagWindow{false, 0};
        w.limit = w.full ? thr.tag : std::min(w.limit, thr.tag);
        w.full = false;
    }
    return w;
}

}  // namespace mpcl
