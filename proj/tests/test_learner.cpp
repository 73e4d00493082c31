#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <tuple>

#include "approx.hpp"
#include "doctest.h"
#include "mpcl/errors.hpp"
#include "mpcl/harness.hpp"

using namespace mpcl;

namespace {

TaskDistribution four_points() {
    return TaskDistribution({{PointId{0}, 0, 0.25}, {PointId{1}, 0, 0.125}, {PointId{2}, 1, 0.5}, {PointId{3}, 1, 0.125}});
}

}  // namespace

TEST_CASE("schedule formulas") {
    const LearnerParams p(6, 4, 18, 4, 0.1, 0.01);
    const double alpha = 0.25 * std::pow(120.0, -0.5);
    CHECK(p.alpha() == rel(alpha, 1e-14));
    CHECK(p.eta() == rel(std::log((1 - alpha) / alpha), 1e-14));
    CHECK(p.gamma() == rel(1.0 / 160.0));
    const double e0 = 0.1 / 80.0;
    CHECK(p.epsilon_t(0) == rel(e0));
    CHECK(p.epsilon_t(2) == rel(1.5625 * e0));
    CHECK(p.n_train() == static_cast<std::uint64_t>(std::ceil(4 * (4 + std::log(400.0)) / alpha)));
    CHECK(p.m1() == static_cast<std::uint64_t>(std::ceil(4 * 256 * std::log(2400.0) / e0)));
    CHECK(p.m2() == static_cast<std::uint64_t>(std::ceil(4 * std::log(2400.0) / (e0 * alpha * alpha))));
    CHECK(p.attempt_budget() == static_cast<std::uint64_t>(std::ceil(64 * 4 * std::log(6 * 4 * 4 / 0.001) / e0)));
    CHECK(p.epsilon_t(p.c()) <= p.epsilon() / 10.0);
    CHECK(p.schedule_margin() >= 0.0);
}

TEST_CASE("weights in log space match the closed form") {
    const LearnerParams p(3, 2, 10, 5, 0.2, 0.05);
    const double ratio = (1 - p.alpha()) / p.alpha();
    for (std::uint32_t m = 0; m <= 5; ++m) {
        CHECK(std::fabs(p.weight(m) / std::pow(ratio, m) - 1.0) <= 1e-9);
    }
}

TEST_CASE("schedule inequality, recomputed directly") {
    for (unsigned c = 1; c <= 10; ++c) {
        for (double eps : {0.01, 0.1, 0.5}) {
            const double g = 1.0 / (10.0 * c * c);
            auto e = [&](unsigned t) { return std::pow(1.0 + 1.0 / c, t) * eps / (20.0 * c); };
            const auto margins = schedule_inequality_margins(c, eps);
            REQUIRE(margins.size() == c);
            for (unsigned t = 0; t < c; ++t) {
                const double lhs = (1 - g) * e(t + 1) / ((1 + g) * e(t));
                const double rhs = std::pow((1 - (1 - g) * e(t)) / (1 - (1 + g) * e(t + 1)), c);
                CHECK((lhs >= rhs) == (margins[t] >= 0.0));
                CHECK(margins[t] == rel(std::log(lhs) - std::log(rhs), 1e-9));
            }
        }
    }
}

TEST_CASE("parameter validation and audit counters") {
    CHECK_THROWS_AS(LearnerParams(0, 1, 1, 1, 0.1, 0.1), Error);
    CHECK_THROWS_AS(LearnerParams(1, 1, 1, 0, 0.1, 0.1), Error);
    CHECK_THROWS_AS(LearnerParams(1, 1, 1, 1, 1.5, 0.1), Error);
    CHECK_THROWS_AS(LearnerParams(1, 1, 1, 1, 0.1, 0.0), Error);
    const auto before = LearnerParams::constructed_count();
    const LearnerParams p(2, 1, 4, 2, 0.1, 0.1);
    CHECK(LearnerParams::constructed_count() == before + 1);
    CHECK(LearnerParams::smallest_margin_seen() <= p.schedule_margin());
    CHECK(LearnerParams::smallest_margin_seen() >= 0.0);
}

TEST_CASE("weight keys order by miss count, then point, then tag") {
    const WeightKey a{1, PointId{9}, 9};
    const WeightKey b{2, PointId{0}, 0};
    const WeightKey c{2, PointId{1}, 0};
    const WeightKey d{2, PointId{1}, 5};
    CHECK(a < b);
    CHECK(b < c);
    CHECK(c < d);
    CHECK_FALSE(d < d);
    CHECK(cap_miss({}, 1) == 0);
    const Thresholds thr{{3, PointId{0}, 0}, {1, PointId{0}, 0}};
    CHECK(cap_miss(thr, 3) == 1);
}

TEST_CASE("quantile at t=1 is empty") {
    const auto task = four_points();
    const LearnerParams p(1, 1, 2, 2, 0.1, 0.1);
    const StageView view(task, {});
    CHECK(estimate_quantile(view, p, Rng(1)).empty());
}

TEST_CASE("quantile picks the ceil(eps * kept)-th largest key") {
    CHECK(quantile_rank(0.25, 8) == 2);
    CHECK(quantile_rank(0.01, 8) == 1);
    CHECK(quantile_rank(1.0, 8) == 8);

    const auto task = four_points();
    const std::vector<Hypothesis> hyps{make_table({1, 0, 0, 1})};
    const StageView view(task, hyps);
    const Rng rng(77);
    const auto draw = quantile_kernel(view, {}, 1, 0.25, 8, rng, Kernel::literal_serial);
    CHECK(draw.kept == 8);

    // Replay the eight draws of chunk 0 and sort them independently.
    Rng local = rng.derive(0);
    std::vector<std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>> keys;
    for (int s = 0; s < 8; ++s) {
        const std::size_t a = task.draw_atom(local);
        const std::uint64_t tag = local.next_u64();
        const std::uint32_t miss = hyps[0].label(task.atom(a).point) != task.atom(a).label ? 1 : 0;
        keys.emplace_back(miss, task.atom(a).point.value, tag);
    }
    std::sort(keys.rbegin(), keys.rend());
    CHECK(draw.threshold.miss == std::get<0>(keys[1]));
    CHECK(draw.threshold.point.value == std::get<1>(keys[1]));
    CHECK(draw.threshold.tag == std::get<2>(keys[1]));
}

TEST_CASE("literal kernels: serial and OpenMP are bit-identical") {
    const auto task = four_points();
    const std::vector<Hypothesis> hyps{make_table({1, 0, 0, 1}), make_table({1, 1, 0, 0})};
    const StageView view(task, hyps);
    const Rng rng(5);
    const std::uint64_t m = 5 * kChunkSize + 123;
    const Thresholds first{{1, PointId{3}, std::uint64_t{1} << 63}};
    for (unsigned level : {1u, 2u}) {
        const std::span<const WeightKey> thr(first.data(), level - 1);
        const auto s = quantile_kernel(view, thr, level, 0.1, m, rng, Kernel::literal_serial);
        const auto p = quantile_kernel(view, thr, level, 0.1, m, rng, Kernel::literal_parallel);
        CHECK(s.kept == p.kept);
        CHECK(s.threshold == p.threshold);
    }
    const auto ws = weight_kernel(view, first, 1, 1, m, rng, Kernel::literal_serial);
    const auto wp = weight_kernel(view, first, 1, 1, m, rng, Kernel::literal_parallel);
    CHECK(ws.by_value == wp.by_value);
    CHECK(ws.kept == wp.kept);
}

TEST_CASE("weight estimate is exactly 1 at t=1") {
    const auto task = four_points();
    const LearnerParams p(1, 1, 2, 3, 0.1, 0.1);
    const StageView view(task, {});
    for (auto k : {Kernel::aggregated, Kernel::literal_serial}) {
        const LearnerParams small(1, 1, 2, 3, 0.1, 0.1, {4, 4, 0.0001, 64});
        CHECK(estimate_weight(view, small, {}, Rng(3), k) == 1.0);
    }
    CHECK(estimate_weight(view, p, {}, Rng(3)) == 1.0);
}

TEST_CASE("saturated weights: every kept term equals the anchor weight") {
    const TaskDistribution task({{PointId{0}, 0, 0.5}, {PointId{1}, 0, 0.5}});
    // Both hypotheses mislabel both points: miss count 2 everywhere at t = 3.
    const std::vector<Hypothesis> hyps{make_constant(2, 1), make_constant(2, 1)};
    const StageView view(task, hyps);
    const LearnerParams p(1, 1, 1, 3, 0.2, 0.1, {4, 4, 0.1, 64});
    // Level 1 anchor passes everything; level 2 anchor caps at miss 1.
    const Thresholds all{{2, PointId{0}, 0}, {1, PointId{0}, 0}};
    for (auto k : {Kernel::aggregated, Kernel::literal_serial}) {
        CHECK(estimate_weight(view, p, all, Rng(8), k) == rel(p.weight(1), 1e-12));
    }
    // Level 1 anchor (1, point 1, tag 0) keeps point 0 and drops point 1.
    const Thresholds half{{1, PointId{1}, 0}, {1, PointId{0}, 0}};
    for (auto k : {Kernel::aggregated, Kernel::literal_serial}) {
        const Rng rng(9);
        const auto counts = weight_kernel(view, half, 1, 1, p.m2(), rng, k);
        const double expected = static_cast<double>(counts.kept) / p.m2() * p.weight(1);
        CHECK(estimate_weight(view, p, half, rng, k) == rel(expected, 1e-12));
        CHECK(std::fabs(static_cast<double>(counts.kept) / p.m2() - 0.5) < 0.02);
    }
}

TEST_CASE("acceptance probability below the anchor is exp(-eta)") {
    const TaskDistribution task({{PointId{0}, 0, 0.5}, {PointId{1}, 1, 0.5}});
    // h1 mislabels point 0 only; anchor at miss 1 (t = 2).
    const std::vector<Hypothesis> hyps{make_constant(2, 1)};
    const StageView view(task, hyps);
    const LearnerParams p(1, 1, 1, 2, 0.2, 0.1);
    const Thresholds thr{{1, PointId{0}, ~std::uint64_t{0}}};
    const TruncationTable table(view, thr, p.eta());
    CHECK(table.accept(0) == 1.0);
    CHECK(table.accept(1) == rel(p.alpha() / (1 - p.alpha()), 1e-12));
    // A point one miss above the anchor saturates at probability 1.
    const Thresholds low{{0, PointId{0}, 0}};
    const TruncationTable sat(view, low, p.eta());
    CHECK(sat.accept(0) == 1.0);
    CHECK(sat.accept(1) == 1.0);
}

TEST_CASE("truncated samplers at t=1 pass D_i through") {
    const auto task = four_points();
    const StageView view(task, {});
    const TruncationTable table(view, {}, 1.0);
    CHECK(table.acceptance_mass() == 1.0L);
    Ledger ledger(1);
    Rng rng(4);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 40000; ++i) ++counts[truncated_rejection_sample(table, rng, 10, {&ledger, 0}).point.value];
    CHECK(ledger.rejections(0) == 0);
    CHECK(ledger.samples_drawn(0) == 40000);
    for (const auto& a : task.atoms()) CHECK(std::fabs(counts[a.point.value] / 40000.0 - a.mass) < 0.01);
}

TEST_CASE("samplers give up after the attempt budget") {
    const auto task = four_points();
    const std::vector<Hypothesis> hyps{make_constant(4, 1), make_constant(4, 1)};
    const StageView view(task, hyps);
    // Nothing strictly precedes (0, point 0, tag 0).
    const Thresholds none{{0, PointId{0}, 0}, {0, PointId{0}, 0}};
    const TruncationTable table(view, none, 1.0);
    CHECK(table.acceptance_mass() == 0.0L);
    Rng rng(1);
    CHECK_THROWS_AS(truncated_rejection_sample(table, rng, 50), Error);
    CHECK_THROWS_AS(truncated_direct_sample(table, rng, 50), Error);
}

TEST_CASE("rejection and direct samplers agree in law") {
    const auto task = four_points();
    const std::vector<Hypothesis> hyps{make_table({1, 0, 0, 1})};
    const StageView view(task, hyps);
    const LearnerParams p(1, 1, 2, 2, 0.3, 0.1);
    const Thresholds thr{{1, PointId{3}, std::uint64_t{1} << 62}};
    const TruncationTable table(view, thr, p.eta());
    Rng r1(1), r2(2);
    std::map<std::uint64_t, double> a, b;
    Ledger la(1), lb(1);
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        a[truncated_rejection_sample(table, r1, 100000, {&la, 0}).point.value] += 1.0 / n;
        b[truncated_direct_sample(table, r2, 100000, {&lb, 0}).point.value] += 1.0 / n;
    }
    double tv = 0;
    for (std::uint64_t x = 0; x < 4; ++x) tv += std::fabs(a[x] - b[x]) / 2;
    CHECK(tv < 0.02);
    // Attempt counts share the geometric law: compare means.
    CHECK(std::fabs(static_cast<double>(la.samples_drawn(0)) / lb.samples_drawn(0) - 1.0) < 0.03);
}

TEST_CASE("multinomial counts") {
    Rng rng(3);
    const std::vector<long double> masses{0.5L, 0.25L, 0.125L};
    std::vector<double> mean(3, 0);
    for (int i = 0; i < 2000; ++i) {
        const auto c = multinomial_counts(1000, masses, 0.125L, rng);
        CHECK(c[0] + c[1] + c[2] <= 1000);
        for (int j = 0; j < 3; ++j) mean[j] += c[j] / 2000.0;
    }
    CHECK(mean[0] == rel(500, 0.01));
    CHECK(mean[1] == rel(250, 0.01));
    CHECK(mean[2] == rel(125, 0.02));
    const auto all = multinomial_counts(77, masses, 0.0L, rng);
    CHECK(all[0] + all[1] + all[2] == 77);
}

TEST_CASE("aggregated and literal kernels agree statistically") {
    // Tail fraction above the level-1 anchor should be near eps for both.
    const auto inst = threshold_audit_instance(1, 3);
    const std::vector<Hypothesis> hyps{make_table(std::vector<std::uint8_t>(64, 1))};
    const StageView view(inst.tasks[0], hyps);
    const double eps = 0.05;
    for (auto k : {Kernel::aggregated, Kernel::literal_parallel}) {
        double mean = 0;
        const int reps = 20;
        for (int r = 0; r < reps; ++r) {
            const auto d = quantile_kernel(view, {}, 1, eps, 200000, Rng(100 + r), k);
            // Mass of keys at or above the threshold, exactly.
            long double above = 0;
            for (std::size_t a = 0; a < view.atoms(); ++a) {
                const auto key_lo = view.key(a, 1, 0);
                const long double mass = inst.tasks[0].atom(a).mass;
                if (key_lo.miss != d.threshold.miss || key_lo.point != d.threshold.point) {
                    if (d.threshold < key_lo) above += mass;
                } else {
                    above += mass * (1.0L - std::ldexp(static_cast<long double>(d.threshold.tag), -64));
                }
            }
            mean += static_cast<double>(above) / reps;
        }
        CHECK(mean == rel(eps, 0.02));
    }
}

TEST_CASE("access guard enforces one sweep per pass") {
    const std::vector<TaskDistribution> tasks{four_points(), four_points()};
    SequentialAccess g(tasks);
    CHECK_THROWS_AS(g.enter(1, 1), Error);
    g.enter(1, 0);
    CHECK_NOTHROW(g.task(0));
    CHECK_THROWS_AS(g.task(1), Error);
    CHECK_THROWS_AS(g.enter(2, 0), Error);
    g.enter(1, 1);
    CHECK_THROWS_AS(g.enter(1, 0), Error);
    g.enter(2, 0);
    CHECK_THROWS_AS(g.task(1), Error);
}

TEST_CASE("learner runs are deterministic and ledger-consistent") {
    const auto cfg = preset_config("line-tiny");
    const auto inst = make_instance(cfg, 2);
    const auto cls = inst.make_class();
    const auto params = learner_params(cfg, inst, 3);
    std::vector<StageRecord> records;
    std::vector<std::vector<LabeledExample>> slots;
    LearnerOptions opts;
    opts.observer = [&](const StageRecord& r) {
        records.push_back(r);
        records.back().thresholds = {};
        records.back().slots = {};
        slots.emplace_back(r.slots.begin(), r.slots.end());
        CHECK(r.current_bits <= r.peak_bits);
        for (const auto& key : r.thresholds) CHECK(key.miss <= r.t - 1);
        CHECK(r.slot_digest == slot_digest(r.slots));
    };
    const auto a = run_learner(inst.tasks, *cls, params, Rng(9), opts);
    const auto b = run_learner(inst.tasks, *cls, params, Rng(9));
    CHECK(a.ledger == b.ledger);
    CHECK(a.thresholds == b.thresholds);
    CHECK(a.w_hat == b.w_hat);
    for (std::uint64_t x = 0; x < cls->universe_size(); ++x) CHECK(a.output.label(PointId{x}) == b.output.label(PointId{x}));

    // Observer stream reconstructs the report.
    REQUIRE(records.size() == a.report.size());
    std::uint64_t last_peak = 0;
    for (std::size_t j = 0; j < records.size(); ++j) {
        CHECK(records[j].t == a.report[j].pass);
        CHECK(records[j].task + 1 == a.report[j].stage);
        CHECK(records[j].w_hat == a.report[j].w_hat);
        CHECK(records[j].peak_bits == a.report[j].peak_bits);
        CHECK(records[j].samples_drawn == a.report[j].samples_drawn);
        CHECK(records[j].peak_bits >= last_peak);
        last_peak = records[j].peak_bits;
        if (records[j].t == 1) CHECK(records[j].w_hat == 1.0);
    }

    // Peak bits recomputed from the accounting rule.
    const std::uint64_t k = inst.tasks.size();
    const std::uint64_t slot_bits = params.n_train() * (params.b() + 65);
    const std::uint64_t anchor = params.b() + 64 + static_cast<std::uint64_t>(std::bit_width(params.c()));
    std::uint64_t hyp_bits = 0;
    std::uint64_t expected = 0;
    for (unsigned t = 1; t <= params.c(); ++t) {
        hyp_bits += a.hypotheses[t - 1].repr_bits();
        expected = std::max(expected, slot_bits + k * (t - 1) * anchor + 64 * k + hyp_bits);
    }
    CHECK(a.ledger.peak_bits() == expected);
    // Every pass draws N initial samples from D_1.
    CHECK(a.ledger.samples_drawn(0) >= params.c() * params.n_train());

    // The last stage of each pass trains on exactly the stored slots.
    for (unsigned t = 1; t <= params.c(); ++t) {
        const auto& s = slots[t * k - 1];
        const auto h = cls->erm(s);
        for (std::uint64_t x = 0; x < cls->universe_size(); ++x) {
            CHECK(h.label(PointId{x}) == a.hypotheses[t - 1].label(PointId{x}));
        }
    }
}

TEST_CASE("one pass degenerates to ERM on the uniform mixture") {
    const auto cfg = preset_config("threshold-audit");
    const auto inst = make_instance(cfg, 1);
    const auto cls = inst.make_class();
    const LearnerParams params(static_cast<unsigned>(inst.tasks.size()), 1, 6, 1, 0.2, 0.05);
    std::vector<LabeledExample> last;
    LearnerOptions opts;
    opts.observer = [&](const StageRecord& r) { last.assign(r.slots.begin(), r.slots.end()); };
    const auto run = run_learner(inst.tasks, *cls, params, Rng(2), opts);
    REQUIRE(run.hypotheses.size() == 1);
    for (const auto& w : run.w_hat[0]) CHECK(w == 1.0);
    for (const auto& thr : run.thresholds[0]) CHECK(thr.empty());
    const auto h = cls->erm(last);
    for (std::uint64_t x = 0; x < 64; ++x) {
        CHECK(run.output.label(PointId{x}) == h.label(PointId{x}));
    }
}

TEST_CASE("single task: loss at most eps in at least 18 of 20 runs") {
    auto inst = threshold_audit_instance(1, 4);
    const auto cls = inst.make_class();
    const LearnerParams params(1, 1, 6, 3, 0.1, 0.01);
    int ok = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto run = run_learner(inst.tasks, *cls, params, Rng(s));
        ok += distribution_loss(run.output, inst.tasks[0]) <= 0.1 ? 1 : 0;
    }
    CHECK(ok >= 18);
}

TEST_CASE("params k must match the task count") {
    const std::vector<TaskDistribution> tasks{four_points()};
    const LearnerParams params(2, 1, 2, 2, 0.1, 0.1);
    CHECK_THROWS_AS(run_learner(tasks, threshold_class(4), params, Rng(1)), Error);
}
