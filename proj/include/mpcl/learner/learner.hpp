#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mpcl/hypothesis_class.hpp"
#include "mpcl/learner/kernels.hpp"
#include "mpcl/learner/ledger.hpp"
#include "mpcl/learner/params.hpp"
#include "mpcl/learner/subroutines.hpp"

namespace mpcl {

// Enforces one left-to-right sweep per pass: stage (t, i) must follow
// (t, i-1), or (t-1, k-1) when i = 0, and only task i is readable in it.
class SequentialAccess {
public:
    explicit SequentialAccess(std::span<const TaskDistribution> tasks) : tasks_(tasks) {}

    void enter(unsigned pass, std::size_t task);
    const TaskDistribution& task(std::size_t i) const;

    unsigned pass() const { return pass_; }
    std::size_t stage() const { return stage_; }

private:
    std::span<const TaskDistribution> tasks_;
    unsigned pass_ = 0;
    std::size_t stage_ = 0;
    bool open_ = false;
};

// Snapshot handed to the observer after each stage. Spans are valid only
// during the callback.
struct StageRecord {
    unsigned t = 0;
    std::size_t task = 0;
    std::span<const WeightKey> thresholds;
    double w_hat = 0.0;
    double w_total = 0.0;
    std::uint64_t peak_bits = 0;
    std::uint64_t current_bits = 0;
    std::uint64_t samples_drawn = 0;
    std::uint64_t rejections = 0;
    std::uint64_t slot_digest = 0;
    std::span<const LabeledExample> slots;
};

struct ReportRow {
    unsigned pass = 0;
    // 1-based task index.
    std::size_t stage = 0;
    double w_hat = 0.0;
    std::uint64_t peak_bits = 0;
    std::uint64_t samples_drawn = 0;
    std::uint64_t rejections = 0;
};

struct LearnerOptions {
    Kernel kernel = Kernel::aggregated;
    // Draw replacements with the explicit rejection loop instead of the
    // geometric-attempts sampler.
    bool rejection_loop = false;
    // Estimate anchors once more at t = c+1 on a separate stream, uncharged.
    bool extra_pass = false;
    // Stop after this many passes (0 = all c).
    unsigned stop_after_pass = 0;
    std::function<void(const StageRecord&)> observer;
};

struct LearnerRun {
    Hypothesis output;
    std::vector<Hypothesis> hypotheses;
    Ledger ledger;
    std::vector<ReportRow> report;
    // thresholds[t-1][i], w_hat[t-1][i].
    std::vector<std::vector<Thresholds>> thresholds;
    std::vector<std::vector<double>> w_hat;
    // Anchors of the extra pass, per task; empty unless requested.
    std::vector<Thresholds> extra_thresholds;
    // Empirical loss of h_t on S_t; nonzero values are also in diagnostics.
    std::vector<double> erm_loss;
    std::vector<std::string> diagnostics;
};

std::uint64_t slot_digest(std::span<const LabeledExample> slots);

LearnerRun run_learner(std::span<const TaskDistribution> tasks, const HypothesisClass& cls,
                       const LearnerParams& params, const Rng& rng, const LearnerOptions& options = {});

}  // namespace mpcl
