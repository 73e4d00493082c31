// mpcl: gen | run | verify | bench front end.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mpcl/errors.hpp"
#include "mpcl/harness.hpp"

using namespace mpcl;

namespace {

struct Flags {
    std::string config;
    std::string preset;
    std::string instance;
    std::string out;
    std::string capture;
    std::string report;
    std::string losses;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> trials;
    std::optional<unsigned> c;
    std::vector<unsigned> c_sweep;
    std::uint64_t draws = 100'000;
    bool quiet = false;
};

ExperimentConfig resolve(const Flags& f) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        Json j = read_json_file(f.config);
        if (!f.preset.empty()) j["preset"] = f.preset;
        cfg = config_from_json(j);
    } else {
        cfg = preset_config(f.preset.empty() ? "line" : f.preset);
    }
    if (!f.instance.empty()) cfg.instance_file = f.instance;
    if (f.seed) cfg.seed = *f.seed;
    if (f.trials) cfg.trials = *f.trials;
    if (f.c) cfg.c = *f.c;
    if (!f.c_sweep.empty()) cfg.c_sweep = f.c_sweep;
    require(cfg.trials >= 1, ErrorCode::usage, "--trials must be >= 1");
    return cfg;
}

// Writes to --out, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

void echo(const Flags& f, const ExperimentConfig& cfg) {
    if (!f.quiet) std::cerr << "config " << config_to_json(cfg).dump() << '\n';
}

int cmd_gen(const Flags& f) {
    const ExperimentConfig cfg = resolve(f);
    require(!f.out.empty(), ErrorCode::usage, "gen needs --out");
    echo(f, cfg);
    save_instance(make_instance(cfg, cfg.seed), f.out);
    return 0;
}

int cmd_run(const Flags& f) {
    const ExperimentConfig cfg = resolve(f);
    echo(f, cfg);
    const auto trials = run_trials(cfg, cfg.c);
    std::ostringstream csv;
    write_trials_csv(csv, trials);
    emit(f.out, csv.str());

    if (!f.capture.empty() || !f.report.empty() || !f.losses.empty()) {
        const CapturedTrial first = capture_trial(cfg, cfg.c, 0);
        if (!f.capture.empty()) save_capture(first.snapshot(), trial_seed(cfg, 0), f.capture);
        if (!f.report.empty()) {
            std::ostringstream out;
            write_report_csv(out, first.run.report);
            write_text_file(f.report, out.str());
        }
        if (!f.losses.empty()) {
            std::vector<double> losses;
            for (const auto& task : first.instance.tasks) losses.push_back(distribution_loss(first.run.output, task));
            std::ostringstream out;
            write_loss_csv(out, losses);
            write_text_file(f.losses, out.str());
        }
    }
    for (const auto& t : trials) {
        if (!t.error.empty()) {
            std::cerr << "ERR " << t.error << ": trial " << t.trial << " failed\n";
            return 1;
        }
    }
    return 0;
}

int cmd_verify(const Flags& f) {
    require(!f.capture.empty(), ErrorCode::usage, "verify needs --capture");
    std::uint64_t seed = 0;
    const OracleSnapshot snap = load_capture(f.capture, &seed);
    VerifyOptions options;
    options.sampler_draws = f.draws;
    const auto rows = verify_capture(snap, seed, options);
    std::ostringstream csv;
    write_verify_csv(csv, rows);
    emit(f.out, csv.str());
    return 0;
}

int cmd_bench(const Flags& f) {
    const ExperimentConfig cfg = resolve(f);
    echo(f, cfg);
    const auto rows = bench_memory_vs_passes(cfg);
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    emit(f.out, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-pass continual learning simulator"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON experiment config");
        sub->add_option("--preset", f.preset, "line | line-tiny | threshold-audit | pc");
        sub->add_option("--seed", f.seed, "seed base");
        sub->add_option("--out", f.out, "output path (stdout when omitted)");
        sub->add_flag("--quiet", f.quiet, "do not echo the resolved config");
    };

    auto* gen = app.add_subcommand("gen", "generate an instance file");
    common(gen);

    auto* run = app.add_subcommand("run", "run seeded learner trials; CSV per trial");
    common(run);
    run->add_option("--instance", f.instance, "instance file from gen");
    run->add_option("--trials", f.trials, "number of trials");
    run->add_option("--passes,-c", f.c, "number of passes");
    run->add_option("--capture", f.capture, "write the trial-0 run capture here");
    run->add_option("--report", f.report, "write the trial-0 per-stage report CSV here");
    run->add_option("--losses", f.losses, "write the trial-0 per-task loss CSV here");

    auto* verify = app.add_subcommand("verify", "audit a run capture against the exact oracle");
    verify->add_option("--capture", f.capture, "capture file from run --capture")->required();
    verify->add_option("--out", f.out, "output path (stdout when omitted)");
    verify->add_option("--draws", f.draws, "sampler draws per check");

    auto* bench = app.add_subcommand("bench", "peak memory and success rate across pass counts");
    common(bench);
    bench->add_option("--instance", f.instance, "instance file from gen");
    bench->add_option("--trials", f.trials, "trials per pass count");
    bench->add_option("--c-sweep", f.c_sweep, "pass counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERR usage: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(f);
        if (run->parsed()) return cmd_run(f);
        if (verify->parsed()) return cmd_verify(f);
        return cmd_bench(f);
    } catch (const Error& e) {
        std::cerr << "ERR " << to_string(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "ERR internal: " << e.what() << '\n';
        return 1;
    }
}
