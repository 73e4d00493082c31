#include "mpcl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "mpcl/errors.hpp"

namespace mpcl {

namespace {

const std::set<std::string> kConfigKeys = {"preset",      "instance_file", "generator",      "c",
                                           "epsilon",     "delta",         "vc_bound",       "constants",
                                           "proof_grade", "kernel",        "rejection_loop", "trials",
                                           "seed",        "c_sweep"};

template <typename T>
T get_as(const Json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::schema, "config key '" + key + "': " + e.what());
    }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = get_as<T>(j, key);
}

template <typename T>
void read_opt(const Json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key)) out = get_as<T>(j, key);
}

Kernel kernel_from_name(const std::string& name) {
    if (name == "aggregated") return Kernel::aggregated;
    if (name == "literal_serial") return Kernel::literal_serial;
    if (name == "literal_parallel") return Kernel::literal_parallel;
    fail(ErrorCode::schema, "unknown kernel '" + name + "'");
}

std::string kernel_name(Kernel k) {
    switch (k) {
        case Kernel::aggregated: return "aggregated";
        case Kernel::literal_serial: return "literal_serial";
        case Kernel::literal_parallel: return "literal_parallel";
    }
    return "aggregated";
}

OnePassConfig onepass_config(const Json& g) {
    OnePassConfig cfg;
    read_opt(g, "k", cfg.k);
    read_opt(g, "d", cfg.d);
    read_opt(g, "b", cfg.b);
    read_opt(g, "epsilon", cfg.epsilon);
    read_opt(g, "n", cfg.n);
    read_opt(g, "p", cfg.p);
    read_opt(g, "min_prime", cfg.min_prime);
    read_opt(g, "atom_cap", cfg.atom_cap);
    return cfg;
}

MultiPassConfig multipass_config(const Json& g) {
    MultiPassConfig cfg;
    read_opt(g, "c", cfg.c);
    read_opt(g, "k_prime", cfg.k_prime);
    read_opt(g, "d_prime", cfg.d_prime);
    read_opt(g, "b_prime", cfg.b_prime);
    read_opt(g, "epsilon", cfg.epsilon);
    read_opt(g, "k", cfg.k);
    read_opt(g, "d", cfg.d);
    read_opt(g, "b", cfg.b);
    return cfg;
}

}  // namespace

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    if (name == "line") {
        cfg.generator = {{"k", 6}, {"d", 2}, {"n", 12}, {"p", 101}, {"epsilon", 0.1}};
        cfg.c = 4;
        cfg.epsilon = 0.1;
        cfg.delta = 0.01;
    } else if (name == "line-tiny") {
        cfg.generator = {{"k", 2}, {"d", 1}, {"n", 2}, {"p", 5}, {"epsilon", 0.1}, {"min_prime", 3}};
        cfg.c = 2;
        cfg.epsilon = 0.1;
        cfg.delta = 0.01;
    } else if (name == "threshold-audit") {
        cfg.generator = {{"k", 2}};
        cfg.c = 3;
        cfg.epsilon = 0.2;
        cfg.delta = 0.05;
        cfg.proof_grade = true;
    } else if (name == "pc") {
        cfg.generator = {{"c", 2}, {"k_prime", 1}, {"epsilon", 0.1}, {"k", 2}, {"d", 2}, {"b", 2}};
        cfg.c = 2;
        cfg.epsilon = 0.1;
        cfg.delta = 0.01;
    } else {
        fail(ErrorCode::usage, "unknown preset '" + name + "'");
    }
    return cfg;
}

ExperimentConfig config_from_json(const Json& j) {
    require(j.is_object(), ErrorCode::schema, "config must be an object");
    for (const auto& [key, _] : j.items()) {
        require(kConfigKeys.count(key) == 1, ErrorCode::schema, "unknown config key '" + key + "'");
    }
    ExperimentConfig cfg = preset_config(j.contains("preset") ? get_as<std::string>(j, "preset") : "line");
    if (j.contains("instance_file")) cfg.instance_file = get_as<std::string>(j, "instance_file");
    if (j.contains("generator")) {
        const Json& g = j.at("generator");
        require(g.is_object(), ErrorCode::schema, "generator must be an object");
        cfg.generator.update(g);
    }
    read_opt(j, "c", cfg.c);
    read_opt(j, "epsilon", cfg.epsilon);
    read_opt(j, "delta", cfg.delta);
    read_opt(j, "vc_bound", cfg.vc_bound);
    read_opt(j, "proof_grade", cfg.proof_grade);
    read_opt(j, "rejection_loop", cfg.rejection_loop);
    read_opt(j, "trials", cfg.trials);
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "c_sweep", cfg.c_sweep);
    if (j.contains("kernel")) cfg.kernel = kernel_from_name(get_as<std::string>(j, "kernel"));
    if (j.contains("constants")) {
        const Json& k = j.at("constants");
        require(k.is_object(), ErrorCode::schema, "constants must be an object");
        read_opt(k, "c_n", cfg.constants.c_n);
        read_opt(k, "c_m1", cfg.constants.c_m1);
        read_opt(k, "c_m2", cfg.constants.c_m2);
        read_opt(k, "c_r", cfg.constants.c_r);
    }
    require(cfg.c >= 1, ErrorCode::schema, "c must be >= 1");
    require(cfg.trials >= 1, ErrorCode::schema, "trials must be >= 1");
    require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, ErrorCode::schema, "epsilon must lie in (0, 1)");
    require(cfg.delta > 0.0 && cfg.delta < 1.0, ErrorCode::schema, "delta must lie in (0, 1)");
    return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
    Json out = {{"preset", cfg.preset},
                {"generator", cfg.generator},
                {"c", cfg.c},
                {"epsilon", cfg.epsilon},
                {"delta", cfg.delta},
                {"constants",
                 {{"c_n", cfg.constants.c_n},
                  {"c_m1", cfg.constants.c_m1},
                  {"c_m2", cfg.constants.c_m2},
                  {"c_r", cfg.constants.c_r}}},
                {"proof_grade", cfg.proof_grade},
                {"kernel", kernel_name(cfg.kernel)},
                {"rejection_loop", cfg.rejection_loop},
                {"trials", cfg.trials},
                {"seed", cfg.seed},
                {"c_sweep", cfg.c_sweep}};
    if (cfg.instance_file) out["instance_file"] = *cfg.instance_file;
    if (cfg.vc_bound) out["vc_bound"] = *cfg.vc_bound;
    return out;
}

Instance to_instance(const OnePassInstance& inst) {
    Instance out;
    out.class_spec = {{"kind", "line"}, {"n", inst.spec.n}, {"d", inst.spec.d}, {"p", inst.spec.p}};
    out.tasks = inst.tasks;
    out.witness = inst.witness;
    Json excluded = Json::array();
    for (const auto& cell : inst.excluded_lines) {
        Json lines = Json::array();
        for (const auto& l : cell) lines.push_back({l.slope, l.intercept});
        excluded.push_back(lines);
    }
    const auto& m = inst.meta;
    out.meta = {{"generator", "onepass"}, {"n", m.n},        {"p", m.p},
                {"t", m.t},               {"alpha", m.alpha}, {"i_star", m.i_star},
                {"seed", m.seed},         {"k", m.k},         {"d", m.d},
                {"full_scale", m.full_scale},         {"excluded_lines", excluded}};
    return out;
}

Instance to_instance(const MultiPassInstance& inst) {
    Instance out;
    out.class_spec = {{"kind", "pointer_chasing"}, {"c", inst.spec.c}, {"k", inst.spec.k}, {"d", inst.spec.d},
                      {"b", inst.spec.b}};
    out.tasks = inst.tasks;
    out.witness = inst.witness;
    const auto& m = inst.meta;
    out.meta = {{"generator", "multipass"},
                {"c", m.c},
                {"k", m.k},
                {"d", m.d},
                {"b", m.b},
                {"k_prime", m.k_prime},
                {"alpha", m.alpha},
                {"n_pc", m.n_pc},
                {"p", m.p},
                {"seed", m.seed},
                {"full_scale", m.full_scale},
                {"f_a", inst.f_a.values},
                {"f_b", inst.f_b.values},
                {"f_a_digest", m.f_a_digest},
                {"f_b_digest", m.f_b_digest},
                {"parity", chase_pointers(inst.f_a, inst.f_b, m.c).parity}};
    return out;
}

Instance threshold_audit_instance(unsigned k, std::uint64_t seed) {
    require(k >= 1, ErrorCode::parameter, "need at least one task");
    constexpr std::uint64_t size = 64;
    constexpr std::uint64_t light_lo = 28;
    constexpr std::uint64_t light_hi = 36;
    std::vector<std::uint64_t> heavy;
    for (std::uint64_t x = 0; x < size; ++x) {
        if (x < light_lo || x >= light_hi) heavy.push_back(x);
    }
    const Rng base(seed);
    Instance out;
    out.class_spec = {{"kind", "threshold"}, {"size", size}};
    for (unsigned i = 0; i < k; ++i) {
        std::vector<double> mass(size, 0.0);
        for (auto x : heavy) mass[x] = std::ldexp(1.0, -6);
        for (auto x = light_lo; x < light_hi; ++x) mass[x] = std::ldexp(1.0, -12);
        // The remaining 63/512 goes to six distinct heavy points.
        Rng rng = base.derive(i);
        auto pool = heavy;
        std::shuffle(pool.begin(), pool.end(), rng.engine());
        for (int bit = 0; bit < 6; ++bit) mass[pool[bit]] += std::ldexp(1.0, -9 + bit);
        std::vector<Atom> atoms;
        for (std::uint64_t x = 0; x < size; ++x) {
            atoms.push_back({PointId{x}, static_cast<std::uint8_t>(x >= 32 ? 1 : 0), mass[x]});
        }
        out.tasks.emplace_back(std::move(atoms));
    }
    std::vector<std::uint8_t> labels(size);
    for (std::uint64_t x = 0; x < size; ++x) labels[x] = x >= 32 ? 1 : 0;
    out.witness = make_table(std::move(labels));
    out.meta = {{"generator", "threshold-audit"}, {"seed", seed}, {"k", k}};
    return out;
}

Instance make_instance(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.instance_file) return load_instance(*config.instance_file);
    const Json& g = config.generator;
    if (config.preset == "line" || config.preset == "line-tiny") {
        return to_instance(gen_onepass_instance(onepass_config(g), seed));
    }
    if (config.preset == "pc") return to_instance(gen_multipass_instance(multipass_config(g), seed));
    if (config.preset == "threshold-audit") {
        unsigned k = 2;
        read_opt(g, "k", k);
        return threshold_audit_instance(k, seed);
    }
    fail(ErrorCode::usage, "unknown preset '" + config.preset + "'");
}

LearnerParams learner_params(const ExperimentConfig& config, const Instance& inst, unsigned c) {
    const auto k = static_cast<unsigned>(inst.tasks.size());
    const unsigned d = config.vc_bound ? *config.vc_bound : inst.make_class()->vc_upper_hint();
    const LearnerConstants constants =
        config.proof_grade ? LearnerConstants::proof_grade(k, c, config.delta) : config.constants;
    return LearnerParams(k, d, inst.description_bits(), c, config.epsilon, config.delta, constants);
}

CapturedTrial capture_trial(const ExperimentConfig& config, unsigned c, unsigned trial) {
    const std::uint64_t seed = trial_seed(config, trial);
    Instance inst = make_instance(config, seed);
    const auto cls = inst.make_class();
    LearnerParams params = learner_params(config, inst, c);
    LearnerOptions options;
    options.kernel = config.kernel;
    options.rejection_loop = config.rejection_loop;
    options.extra_pass = true;
    LearnerRun run = run_learner(inst.tasks, *cls, params, learner_rng(seed), options);
    return {std::move(inst), std::move(params), std::move(run)};
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config, unsigned c, Exec exec) {
    std::vector<TrialResult> out(config.trials);
    auto one = [&](unsigned j) {
        TrialResult& r = out[j];
        r.trial = j;
        r.seed = trial_seed(config, j);
        try {
            const Instance inst = make_instance(config, r.seed);
            const auto cls = inst.make_class();
            const LearnerParams params = learner_params(config, inst, c);
            LearnerOptions options;
            options.kernel = config.kernel;
            options.rejection_loop = config.rejection_loop;
            const LearnerRun run = run_learner(inst.tasks, *cls, params, learner_rng(r.seed), options);
            for (const auto& task : inst.tasks) r.max_loss = std::max(r.max_loss, distribution_loss(run.output, task));
            r.success = r.max_loss <= config.epsilon;
            r.peak_bits = run.ledger.peak_bits();
            r.samples = run.ledger.total_samples();
            r.rejections = run.ledger.total_rejections();
        } catch (const Error& e) {
            r.error = std::string(to_string(e.code()));
            r.success = false;
        }
    };
    if (exec == Exec::parallel) {
        const auto n = static_cast<long long>(config.trials);
#pragma omp parallel for schedule(dynamic, 1)
        for (long long j = 0; j < n; ++j) one(static_cast<unsigned>(j));
    } else {
        for (unsigned j = 0; j < config.trials; ++j) one(j);
    }
    return out;
}

std::uint64_t baseline_sample_size(std::size_t k, unsigned d, double epsilon, double delta, double c_n) {
    require(k >= 1 && epsilon > 0.0 && delta > 0.0, ErrorCode::parameter, "bad baseline parameters");
    return static_cast<std::uint64_t>(
        std::ceil(c_n * (d + std::log(static_cast<double>(k) / delta)) / epsilon));
}

BaselineResult baseline_store_everything(std::span<const TaskDistribution> tasks, const HypothesisClass& cls,
                                         unsigned d, double epsilon, double delta, const Rng& rng, double c_n) {
    const std::size_t k = tasks.size();
    BaselineResult out;
    out.ledger = Ledger(k);
    out.per_task = baseline_sample_size(k, d, epsilon, delta, c_n);
    const unsigned b = description_bits(cls.universe_size());
    std::vector<LabeledExample> pool;
    pool.reserve(k * out.per_task);
    out.ledger.allocate(k * out.per_task * example_bits(b));
    for (std::size_t i = 0; i < k; ++i) {
        Rng local = rng.derive(i);
        for (std::uint64_t s = 0; s < out.per_task; ++s) pool.push_back(tasks[i].draw(local));
        out.ledger.count_samples(i, out.per_task);
    }
    out.output = cls.erm(pool);
    out.ledger.allocate(out.output.repr_bits());
    return out;
}

std::vector<BenchRow> bench_memory_vs_passes(const ExperimentConfig& config, Exec exec) {
    std::vector<BenchRow> out;
    for (unsigned c : config.c_sweep) {
        const auto trials = run_trials(config, c, exec);
        BenchRow row;
        row.c = c;
        long double samples = 0.0L;
        std::size_t ok = 0;
        for (const auto& t : trials) {
            if (!t.error.empty()) fail(ErrorCode::budget, "trial " + std::to_string(t.trial) + " failed: " + t.error);
            ok += t.success ? 1 : 0;
            row.peak_bits = std::max(row.peak_bits, t.peak_bits);
            samples += t.samples;
        }
        row.success_rate = static_cast<double>(ok) / static_cast<double>(trials.size());
        row.samples = static_cast<std::uint64_t>(std::llround(samples / trials.size()));
        out.push_back(row);
    }
    return out;
}

BandCount quantile_band(const OracleSnapshot& snap) {
    BandCount out;
    const double g = snap.params.gamma();
    const unsigned last = snap.passes() + (snap.extra_thresholds.empty() ? 0 : 1);
    for (unsigned t = 2; t <= last; ++t) {
        const long double e = snap.params.epsilon_t(t);
        for (std::size_t i = 0; i < snap.k(); ++i) {
            for (unsigned tau = 1; tau < t; ++tau) {
                const long double f = exact_tail_fraction(snap, i, t, tau);
                ++out.total;
                if (f >= (1.0L - g) * e && f <= (1.0L + g) * e) ++out.inside;
            }
        }
    }
    return out;
}

BandCount weight_band(const OracleSnapshot& snap) {
    BandCount out;
    const long double tol = snap.params.alpha() / 8.0L;
    for (unsigned t = 1; t <= snap.passes(); ++t) {
        for (std::size_t i = 0; i < snap.k(); ++i) {
            const long double w = exact_truncated_pmf(snap, i, t).weight;
            ++out.total;
            if (std::fabs(static_cast<long double>(snap.w_hat[t - 1][i]) - w) <= tol * w) ++out.inside;
        }
    }
    return out;
}

long double potential_margin(const OracleSnapshot& snap) {
    const long double bound = std::log(2.0L * (1.0L - snap.params.alpha()));
    const unsigned last = snap.extra_thresholds.empty() ? snap.passes() : snap.passes() + 1;
    long double margin = std::numeric_limits<long double>::infinity();
    long double prev = std::log(potential(snap, 1));
    for (unsigned t = 2; t <= last; ++t) {
        const long double cur = std::log(potential(snap, t));
        margin = std::min(margin, bound - (cur - prev));
        prev = cur;
    }
    return margin;
}

namespace {

// Exact views for pass t need exactly the first t-1 hypotheses.
StageView pass_view(const OracleSnapshot& snap, std::size_t i, unsigned t) {
    return StageView(snap.tasks[i], std::span<const Hypothesis>(snap.hypotheses).first(t - 1));
}

long double empirical_tv(std::span<const std::uint64_t> counts, std::span<const long double> pmf, std::uint64_t n) {
    long double sum = 0.0L;
    for (std::size_t a = 0; a < pmf.size(); ++a) {
        sum += std::fabs(static_cast<long double>(counts[a]) / n - pmf[a]);
    }
    return sum / 2.0L;
}

}  // namespace

std::vector<VerifyRow> verify_capture(const OracleSnapshot& snap, std::uint64_t seed, const VerifyOptions& options) {
    snap.check_cap();
    const auto& params = snap.params;
    const unsigned passes = snap.passes();
    require(passes >= 1 && snap.hypotheses.size() == passes, ErrorCode::malformed, "capture holds no complete pass");
    std::vector<VerifyRow> rows;
    auto add = [&](const char* check, long double margin) {
        rows.push_back({check, seed, static_cast<double>(margin + 0.0L), margin >= 0.0L});
    };
    auto rate_margin = [&](const BandCount& b) {
        return b.total == 0 ? 0.0L : static_cast<long double>(b.inside) / b.total - options.band_rate;
    };

    add("quantile_bounds", rate_margin(quantile_band(snap)));
    add("hierarchy", -static_cast<long double>(check_hierarchy(snap).size()));

    const Rng rng = Rng(seed).derive(0x7e51);
    long double worst_tv = 0.0L;
    for (unsigned t = 1; t <= passes; ++t) {
        for (std::size_t i = 0; i < snap.k(); ++i) {
            const auto view = pass_view(snap, i, t);
            const TruncationTable table(view, snap.anchors(i, t), params.eta());
            const auto exact = exact_truncated_pmf(snap, i, t);
            std::map<std::uint64_t, std::size_t> index;
            for (std::size_t a = 0; a < snap.tasks[i].size(); ++a) index[snap.tasks[i].atom(a).point.value] = a;
            std::vector<std::uint64_t> counts(exact.pmf.size(), 0);
            Rng local = rng.derive(t).derive(i);
            for (std::uint64_t s = 0; s < options.sampler_draws; ++s) {
                const auto x = truncated_rejection_sample(table, local, params.attempt_budget());
                ++counts[index.at(x.point.value)];
            }
            worst_tv = std::max(worst_tv, empirical_tv(counts, exact.pmf, options.sampler_draws));
        }
    }
    add("truncated_sampler", options.tv_tolerance - worst_tv);
    add("weight_estimate", rate_margin(weight_band(snap)));

    // Single-slot replacement chains driven by the learner's sampler.
    long double worst_chain = 0.0L;
    const Rng chain_rng = Rng(seed).derive(0xc4a1);
    for (unsigned t = 1; t <= passes; ++t) {
        std::vector<StageView> views;
        views.reserve(snap.k());
        for (std::size_t i = 0; i < snap.k(); ++i) views.push_back(pass_view(snap, i, t));
        std::vector<TruncationTable> tables;
        for (std::size_t i = 0; i < snap.k(); ++i) tables.emplace_back(views[i], snap.anchors(i, t), params.eta());
        const auto mix = exact_mixture_pmf(snap, t, true);
        std::map<std::uint64_t, std::size_t> index;
        for (std::size_t a = 0; a < mix.atoms.size(); ++a) index[mix.atoms[a].point.value] = a;
        std::vector<std::uint64_t> counts(mix.atoms.size(), 0);
        Rng local = chain_rng.derive(t);
        for (std::uint64_t s = 0; s < options.sampler_draws; ++s) {
            LabeledExample slot = snap.tasks[0].draw(local);
            long double total = 0.0L;
            for (std::size_t i = 0; i < snap.k(); ++i) {
                total += snap.w_hat[t - 1][i];
                const double keep = total > 0.0L ? static_cast<double>(snap.w_hat[t - 1][i] / total) : 0.0;
                if (local.bernoulli(keep)) slot = truncated_direct_sample(tables[i], local, params.attempt_budget());
            }
            const auto it = index.find(slot.point.value);
            if (it != index.end()) ++counts[it->second];
        }
        std::vector<long double> pmf;
        for (const auto& a : mix.atoms) pmf.push_back(a.mass);
        worst_chain = std::max(worst_chain, empirical_tv(counts, pmf, options.sampler_draws));
    }
    add("training_set_mixture", options.tv_tolerance - worst_chain);

    long double worst_mix = 0.0L;
    long double worst_loss = 0.0L;
    for (unsigned t = 1; t <= passes; ++t) {
        const auto exact = exact_mixture_pmf(snap, t, false);
        worst_mix = std::max(worst_mix, tv_distance(exact_mixture_pmf(snap, t, true), exact));
        worst_loss = std::max(worst_loss, mixture_loss(exact, snap.hypotheses[t - 1]));
    }
    add("mixture_tv", params.alpha() / 3.0L - worst_mix);
    add("pass_accuracy", params.alpha() - worst_loss);

    const long double phi1 = potential(snap, 1);
    rows.push_back({"potential_start", seed, static_cast<double>(0.0L - std::fabs(phi1 - 1.0L)), phi1 == 1.0L});
    if (passes >= 2 || !snap.extra_thresholds.empty()) add("potential_decrease", potential_margin(snap));

    if (passes == params.c()) {
        const Hypothesis vote = make_majority(snap.hypotheses);
        double worst = 0.0;
        for (const auto& task : snap.tasks) worst = std::max(worst, distribution_loss(vote, task));
        add("final_loss", params.epsilon() - worst);
    }
    add("schedule_inequality", params.schedule_margin());
    return rows;
}

void write_trials_csv(std::ostream& out, std::span<const TrialResult> rows) {
    out << "trial,seed,max_loss,success,peak_bits,samples,rejections,error\n" << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.trial << ',' << r.seed << ',' << r.max_loss << ',' << (r.success ? 1 : 0) << ',' << r.peak_bits
            << ',' << r.samples << ',' << r.rejections << ',' << r.error << '\n';
    }
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
    out << "c,success_rate,peak_bits,samples\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.c << ',' << r.success_rate << ',' << r.peak_bits << ',' << r.samples << '\n';
}

void write_verify_csv(std::ostream& out, std::span<const VerifyRow> rows) {
    out << "lemma,instance_seed,margin,pass\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.check << ',' << r.seed << ',' << r.margin << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace mpcl
