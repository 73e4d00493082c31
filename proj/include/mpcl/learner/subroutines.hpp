#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mpcl/learner/kernels.hpp"
#include "mpcl/learner/ledger.hpp"
#include "mpcl/learner/params.hpp"

namespace mpcl {

// Where draws are charged. A null ledger charges nothing.
struct Charge {
    Ledger* ledger = nullptr;
    std::size_t task = 0;

    void samples(std::uint64_t n) const {
        if (ledger) ledger->count_samples(task, n);
    }
    void rejections(std::uint64_t n) const {
        if (ledger) ledger->count_rejections(task, n);
    }
};

// Anchors for levels 1..t-1 of pass t = view.t(), with quantile eps_t.
// Throws quantile_sample_depleted when fewer than M1/2 samples survive a filter.
Thresholds estimate_quantile(const StageView& view, const LearnerParams& params, const Rng& rng,
                             Kernel kernel = Kernel::aggregated, Charge charge = {});

// (1/M2) * sum over kept samples of min(exp(eta * miss), anchor weight).
double estimate_weight(const StageView& view, const LearnerParams& params, std::span<const WeightKey> thresholds,
                       const Rng& rng, Kernel kernel = Kernel::aggregated, Charge charge = {});

// Sum of exp(eta * v) * counts[v] / m, in extended precision.
double weight_from_counts(const LearnerParams& params, const WeightCounts& counts, std::uint64_t m);

// One draw from the truncated distribution by rejection. Throws
// rejection_budget_exceeded after `attempt_budget` failed attempts.
LabeledExample truncated_rejection_sample(const TruncationTable& table, Rng& rng, std::uint64_t attempt_budget,
                                          Charge charge = {});

// Same law, with the attempt count drawn as a geometric variable and the
// accepted atom drawn from the exact truncated pmf.
LabeledExample truncated_direct_sample(const TruncationTable& table, Rng& rng, std::uint64_t attempt_budget,
                                       Charge charge = {});

}  // namespace mpcl
