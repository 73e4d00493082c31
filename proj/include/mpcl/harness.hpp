#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpcl/exec.hpp"
#include "mpcl/io.hpp"
#include "mpcl/line_class.hpp"
#include "mpcl/rs_pointer.hpp"

namespace mpcl {

// One experiment: where the instance comes from, how the learner is set up,
// and how many seeded trials to run.
struct ExperimentConfig {
    // "line", "line-tiny", "threshold-audit" or "pc"; ignored when
    // instance_file is set.
    std::string preset = "line";
    std::optional<std::string> instance_file;
    // Generator fields layered over the preset (k, d, n, p, b, epsilon, ...).
    Json generator = Json::object();

    unsigned c = 4;
    double epsilon = 0.1;
    double delta = 0.01;
    // Defaults to the class's VC upper bound.
    std::optional<unsigned> vc_bound;
    LearnerConstants constants;
    bool proof_grade = false;
    Kernel kernel = Kernel::aggregated;
    bool rejection_loop = false;

    unsigned trials = 1;
    std::uint64_t seed = 1;
    std::vector<unsigned> c_sweep = {2, 4, 8};
};

ExperimentConfig preset_config(const std::string& name);
// Unknown keys and wrong types are schema errors. A "preset" key seeds the
// defaults before the other keys apply.
ExperimentConfig config_from_json(const Json& j);
// Resolved config with every default spelled out.
Json config_to_json(const ExperimentConfig& config);

Instance to_instance(const OnePassInstance& inst);
Instance to_instance(const MultiPassInstance& inst);

// 64-point threshold class, label 1 on x >= 32. Every task puts dyadic mass
// on all points, with 2^-12 atoms on 28..35 so ERM errs on light points.
Instance threshold_audit_instance(unsigned k, std::uint64_t seed);

// Instance for trial seed `seed` (file instances ignore it).
Instance make_instance(const ExperimentConfig& config, std::uint64_t seed);

LearnerParams learner_params(const ExperimentConfig& config, const Instance& inst, unsigned c);

// Seed of trial j: base + j. The learner runs on Rng(seed).derive(1).
inline std::uint64_t trial_seed(const ExperimentConfig& config, unsigned trial) { return config.seed + trial; }
inline Rng learner_rng(std::uint64_t seed) { return Rng(seed).derive(1); }

struct TrialResult {
    unsigned trial = 0;
    std::uint64_t seed = 0;
    double max_loss = 0.0;
    bool success = false;
    std::uint64_t peak_bits = 0;
    std::uint64_t samples = 0;
    std::uint64_t rejections = 0;
    // Error code name when the trial threw, else empty.
    std::string error;
};

struct CapturedTrial {
    Instance instance;
    LearnerParams params;
    LearnerRun run;
    OracleSnapshot snapshot() const { return OracleSnapshot::from_run(instance.tasks, params, run); }
};

// Re-runs one trial with the extra anchor pass so the oracle can audit it.
CapturedTrial capture_trial(const ExperimentConfig& config, unsigned c, unsigned trial);

std::vector<TrialResult> run_trials(const ExperimentConfig& config, unsigned c, Exec exec = Exec::parallel);

struct BaselineResult {
    Hypothesis output;
    Ledger ledger;
    std::uint64_t per_task = 0;
};

// ceil(c_n * (d + ln(k/delta)) / eps) samples per task, all held at once,
// then one ERM over their union.
std::uint64_t baseline_sample_size(std::size_t k, unsigned d, double epsilon, double delta, double c_n = 4.0);
BaselineResult baseline_store_everything(std::span<const TaskDistribution> tasks, const HypothesisClass& cls,
                                         unsigned d, double epsilon, double delta, const Rng& rng,
                                         double c_n = 4.0);

struct BenchRow {
    unsigned c = 0;
    double success_rate = 0.0;
    std::uint64_t peak_bits = 0;
    // Mean total draws per trial.
    std::uint64_t samples = 0;
};

std::vector<BenchRow> bench_memory_vs_passes(const ExperimentConfig& config, Exec exec = Exec::parallel);

struct VerifyRow {
    std::string check;
    std::uint64_t seed = 0;
    double margin = 0.0;
    bool pass = false;
};

struct VerifyOptions {
    std::uint64_t sampler_draws = 100'000;
    double tv_tolerance = 0.02;
    // Required in-band share for the quantile and weight rows.
    double band_rate = 0.95;
};

// Checks a captured run against the exact oracle. Rows:
// quantile_bounds, hierarchy, truncated_sampler, weight_estimate,
// training_set_mixture, mixture_tv, pass_accuracy, potential_start,
// potential_decrease, final_loss, schedule_inequality.
std::vector<VerifyRow> verify_capture(const OracleSnapshot& snap, std::uint64_t seed, const VerifyOptions& options = {});

// Share of (i, t, tau) triples whose tail fraction lies in [(1-g)eps_t, (1+g)eps_t].
struct BandCount {
    std::uint64_t inside = 0;
    std::uint64_t total = 0;
};
BandCount quantile_band(const OracleSnapshot& snap);
// Same for |w_hat - w| <= (alpha/8) w over (i, t).
BandCount weight_band(const OracleSnapshot& snap);
// Smallest log(2(1-alpha)) - (log Phi_{t+1} - log Phi_t) over the available t.
long double potential_margin(const OracleSnapshot& snap);

void write_trials_csv(std::ostream& out, std::span<const TrialResult> rows);
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);
void write_verify_csv(std::ostream& out, std::span<const VerifyRow> rows);

}  // namespace mpcl
