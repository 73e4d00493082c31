#include "mpcl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "mpcl/errors.hpp"

namespace mpcl {

OracleSnapshot OracleSnapshot::from_run(std::span<const TaskDistribution> tasks, const LearnerParams& params,
                                        const LearnerRun& run) {
    OracleSnapshot snap(std::vector<TaskDistribution>(tasks.begin(), tasks.end()), params);
    snap.hypotheses = run.hypotheses;
    snap.thresholds = run.thresholds;
    snap.extra_thresholds = run.extra_thresholds;
    snap.w_hat = run.w_hat;
    return snap;
}

const Thresholds& OracleSnapshot::anchors(std::size_t i, unsigned t) const {
    require(i < k() && t >= 1, ErrorCode::malformed, "anchor index out of range");
    if (t <= passes()) return thresholds[t - 1][i];
    require(t == passes() + 1 && extra_thresholds.size() == k(), ErrorCode::malformed,
            "pass " + std::to_string(t) + " anchors were not captured");
    return extra_thresholds[i];
}

void OracleSnapshot::check_cap() const {
    std::set<std::uint64_t> points;
    for (const auto& task : tasks) {
        for (const auto& a : task.atoms()) points.insert(a.point.value);
    }
    require(points.size() <= universe_cap, ErrorCode::budget,
            "oracle universe has " + std::to_string(points.size()) + " points, cap is " +
                std::to_string(universe_cap));
}

namespace {

StageView full_view(const OracleSnapshot& snap, std::size_t i) { return StageView(snap.tasks[i], snap.hypotheses); }

long double kept_mass(const StageView& view, std::span<const WeightKey> anchors, unsigned levels) {
    long double sum = 0.0L;
    for (std::size_t a = 0; a < view.atoms(); ++a) {
        sum += static_cast<long double>(view.task().atom(a).mass) * view.window(a, anchors, levels).fraction();
    }
    return sum;
}

}  // namespace

long double exact_kept_mass(const OracleSnapshot& snap, std::size_t i, unsigned t, unsigned tau) {
    snap.check_cap();
    require(tau >= 1 && tau <= t, ErrorCode::malformed, "kept mass needs 1 <= tau <= t");
    const auto view = full_view(snap, i);
    return kept_mass(view, snap.anchors(i, t), tau - 1);
}

long double exact_tail_fraction(const OracleSnapshot& snap, std::size_t i, unsigned t, unsigned tau) {
    snap.check_cap();
    require(tau >= 1 && tau < t, ErrorCode::malformed, "tail fraction needs 1 <= tau < t");
    const auto view = full_view(snap, i);
    const auto& anchors = snap.anchors(i, t);
    const long double inside = kept_mass(view, anchors, tau - 1);
    const long double below = kept_mass(view, anchors, tau);
    require(inside > 0.0L, ErrorCode::malformed, "empty kept set");
    return (inside - below) / inside;
}

TruncatedPmf exact_truncated_pmf(const OracleSnapshot& snap, std::size_t i, unsigned t) {
    snap.check_cap();
    const auto view = full_view(snap, i);
    const auto& anchors = snap.anchors(i, t);
    const unsigned levels = t >= 2 ? t - 2 : 0;
    const std::uint32_t cap = cap_miss(anchors, t);
    const long double eta = snap.params.eta();
    TruncatedPmf out;
    out.pmf.resize(view.atoms());
    for (std::size_t a = 0; a < view.atoms(); ++a) {
        const std::uint32_t m = std::min(view.miss(a, t - 1), cap);
        const long double w = m == 0 ? 1.0L : std::exp(eta * m);
        out.pmf[a] = static_cast<long double>(view.task().atom(a).mass) * view.window(a, anchors, levels).fraction() * w;
        out.weight += out.pmf[a];
    }
    require(out.weight > 0.0L, ErrorCode::malformed, "truncated distribution has zero mass");
    for (auto& p : out.pmf) p /= out.weight;
    return out;
}

MixturePmf exact_mixture_pmf(const OracleSnapshot& snap, unsigned t, bool from_estimates) {
    const std::size_t k = snap.k();
    std::vector<TruncatedPmf> parts;
    long double total = 0.0L;
    for (std::size_t i = 0; i < k; ++i) {
        parts.push_back(exact_truncated_pmf(snap, i, t));
        total += from_estimates ? static_cast<long double>(snap.w_hat.at(t - 1).at(i)) : parts.back().weight;
    }
    MixturePmf out;
    std::map<std::uint64_t, MixtureAtom> merged;
    for (std::size_t i = 0; i < k; ++i) {
        const long double w = from_estimates ? static_cast<long double>(snap.w_hat[t - 1][i]) : parts[i].weight;
        const long double p = w / total;
        out.task_weights.push_back(p);
        const auto atoms = snap.tasks[i].atoms();
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            auto& slot = merged[atoms[a].point.value];
            slot.point = atoms[a].point;
            slot.label = atoms[a].label;
            slot.mass += p * parts[i].pmf[a];
        }
    }
    for (const auto& [_, atom] : merged) out.atoms.push_back(atom);
    return out;
}

long double mixture_loss(const MixturePmf& mix, const Hypothesis& h) {
    long double loss = 0.0L;
    for (const auto& a : mix.atoms) {
        if (h.label(a.point) != a.label) loss += a.mass;
    }
    return loss;
}

long double tv_distance(std::span<const long double> p, std::span<const long double> q) {
    require(p.size() == q.size(), ErrorCode::length_mismatch, "TV distance of pmfs with different supports");
    long double sum = 0.0L;
    for (std::size_t a = 0; a < p.size(); ++a) sum += std::fabs(p[a] - q[a]);
    return sum / 2.0L;
}

long double tv_distance(const MixturePmf& p, const MixturePmf& q) {
    std::map<std::uint64_t, long double> diff;
    for (const auto& a : p.atoms) diff[a.point.value] += a.mass;
    for (const auto& a : q.atoms) diff[a.point.value] -= a.mass;
    long double sum = 0.0L;
    for (const auto& [_, d] : diff) sum += std::fabs(d);
    return sum / 2.0L;
}

std::vector<HierarchyViolation> check_hierarchy(const OracleSnapshot& snap) {
    snap.check_cap();
    std::vector<HierarchyViolation> out;
    const unsigned c = snap.passes();
    for (std::size_t i = 0; i < snap.k(); ++i) {
        const auto view = full_view(snap, i);
        for (std::size_t a = 0; a < view.atoms(); ++a) {
            const PointId point = view.task().atom(a).point;
            // X_{t,tau} as a tag width per atom.
            auto width = [&](unsigned t, unsigned tau) { return view.window(a, snap.anchors(i, t), tau - 1).width(); };
            for (unsigned t = 1; t <= c; ++t) {
                for (unsigned tau = 1; tau < t; ++tau) {
                    if (width(t, tau + 1) > width(t, tau)) out.push_back({i, false, t, tau, point});
                }
            }
            for (unsigned tau = 1; tau <= c; ++tau) {
                for (unsigned t = tau; t < c; ++t) {
                    if (width(t + 1, tau) > width(t, tau)) out.push_back({i, true, t, tau, point});
                }
            }
        }
    }
    return out;
}

long double potential(const OracleSnapshot& snap, unsigned t) {
    snap.check_cap();
    require(t >= 1 && t <= snap.passes() + 1, ErrorCode::malformed, "potential index out of range");
    const long double eta = snap.params.eta();
    long double sum = 0.0L;
    for (std::size_t i = 0; i < snap.k(); ++i) {
        const auto view = full_view(snap, i);
        const unsigned levels = t >= 2 ? t - 2 : 0;
        const Thresholds none;
        const auto& anchors = levels == 0 ? none : snap.anchors(i, t);
        for (std::size_t a = 0; a < view.atoms(); ++a) {
            const std::uint32_t m = t >= 2 ? view.miss(a, t - 1) : 0;
            const long double w = m == 0 ? 1.0L : std::exp(eta * m);
            sum += static_cast<long double>(view.task().atom(a).mass) * view.window(a, anchors, levels).fraction() * w;
        }
    }
    return sum / static_cast<long double>(snap.k());
}

}  // namespace mpcl
