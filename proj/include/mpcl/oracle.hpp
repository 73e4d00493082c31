#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpcl/learner/learner.hpp"

namespace mpcl {

inline constexpr std::size_t kOracleUniverseCap = 256;

// Everything the exact checks need from one captured run.
struct OracleSnapshot {
    OracleSnapshot(std::vector<TaskDistribution> tasks, LearnerParams params)
        : tasks(std::move(tasks)), params(std::move(params)) {}

    static OracleSnapshot from_run(std::span<const TaskDistribution> tasks, const LearnerParams& params,
                                   const LearnerRun& run);

    std::vector<TaskDistribution> tasks;
    LearnerParams params;
    std::vector<Hypothesis> hypotheses;
    // thresholds[t-1][i] for t in [1, c]; extra_thresholds[i] for t = c+1.
    std::vector<std::vector<Thresholds>> thresholds;
    std::vector<Thresholds> extra_thresholds;
    std::vector<std::vector<double>> w_hat;
    std::size_t universe_cap = kOracleUniverseCap;

    std::size_t k() const { return tasks.size(); }
    unsigned passes() const { return static_cast<unsigned>(thresholds.size()); }
    // Anchors of (i, t); t = passes()+1 reads the extra pass.
    const Thresholds& anchors(std::size_t i, unsigned t) const;
    // Throws budget when the tasks span more points than universe_cap.
    void check_cap() const;
};

// Pr_{D_i}[x in X_{i,t,tau}], threshold atoms split by tag / 2^64.
long double exact_kept_mass(const OracleSnapshot& snap, std::size_t i, unsigned t, unsigned tau);

// Mass of X_{i,t,tau} at or above the level-tau anchor, relative to P_{i,t,tau}.
long double exact_tail_fraction(const OracleSnapshot& snap, std::size_t i, unsigned t, unsigned tau);

struct TruncatedPmf {
    // Indexed like the atoms of task i.
    std::vector<long double> pmf;
    // Unnormalized total mass w_{i,t}.
    long double weight = 0.0L;
};

TruncatedPmf exact_truncated_pmf(const OracleSnapshot& snap, std::size_t i, unsigned t);

struct MixtureAtom {
    PointId point;
    std::uint8_t label = 0;
    long double mass = 0.0L;
};

struct MixturePmf {
    // Sorted by point.
    std::vector<MixtureAtom> atoms;
    // p_{i,t} (exact w) or the plug-in from w_hat.
    std::vector<long double> task_weights;
};

// sum_i p_{i,t} D_{i,t,trun} with p from the exact weights, or from w_hat
// when `from_estimates`.
MixturePmf exact_mixture_pmf(const OracleSnapshot& snap, unsigned t, bool from_estimates = false);

long double mixture_loss(const MixturePmf& mix, const Hypothesis& h);

// Half the L1 distance between two pmfs over the same index set.
long double tv_distance(std::span<const long double> p, std::span<const long double> q);
long double tv_distance(const MixturePmf& p, const MixturePmf& q);

struct HierarchyViolation {
    std::size_t task = 0;
    // Within pass t: X_{t,tau+1} not inside X_{t,tau}. Across passes:
    // X_{t+1,tau} not inside X_{t,tau}.
    bool across_passes = false;
    unsigned t = 0;
    unsigned tau = 0;
    PointId point;
};

std::vector<HierarchyViolation> check_hierarchy(const OracleSnapshot& snap);

// Phi_t for t in [1, passes()+1]; t = passes()+1 needs the extra anchors.
long double potential(const OracleSnapshot& snap, unsigned t);

}  // namespace mpcl
