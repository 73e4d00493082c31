#include <cmath>
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

// One task, one hypothesis mislabeling points 0 and 2, anchors for t = 2.
OracleSnapshot two_pass_snapshot(const WeightKey& anchor) {
    OracleSnapshot snap({four_points()}, LearnerParams(1, 1, 2, 2, 0.2, 0.1));
    snap.hypotheses = {make_table({1, 0, 0, 1}), make_table({0, 0, 1, 1})};
    snap.thresholds = {{Thresholds{}}, {Thresholds{anchor}}};
    snap.w_hat = {{1.0}, {1.0}};
    return snap;
}

using Key = std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>;

}  // namespace

TEST_CASE("kept mass at tau = 1 is the whole task, and the sets nest") {
    const auto snap = two_pass_snapshot({1, PointId{2}, std::uint64_t{1} << 63});
    CHECK(exact_kept_mass(snap, 0, 2, 1) == 1.0L);
    const long double inner = exact_kept_mass(snap, 0, 2, 2);
    CHECK(inner <= 1.0L);
    // Below (1, 2, 2^63): misses 0 (points 1, 3), point 0, and half of point 2.
    CHECK(static_cast<double>(inner) == rel(0.125 + 0.125 + 0.25 + 0.25, 1e-15));
    CHECK(static_cast<double>(exact_tail_fraction(snap, 0, 2, 1)) == rel(0.25, 1e-15));
    CHECK_THROWS_AS(exact_tail_fraction(snap, 0, 2, 2), Error);
}

TEST_CASE("t = 1 truncated pmf is the task itself") {
    OracleSnapshot snap({four_points()}, LearnerParams(1, 1, 2, 1, 0.2, 0.1));
    snap.thresholds = {{Thresholds{}}};
    snap.w_hat = {{1.0}};
    const auto pmf = exact_truncated_pmf(snap, 0, 1);
    for (std::size_t a = 0; a < 4; ++a) CHECK(pmf.pmf[a] == static_cast<long double>(four_points().atom(a).mass));
    CHECK(pmf.weight == 1.0L);
}

TEST_CASE("truncated pmf by hand") {
    const auto snap = two_pass_snapshot({1, PointId{3}, 0});
    const auto pmf = exact_truncated_pmf(snap, 0, 2);
    const double e = std::exp(snap.params.eta());
    const double z = 0.75 * e + 0.25;
    const double expected[4] = {0.25 * e / z, 0.125 / z, 0.5 * e / z, 0.125 / z};
    long double sum = 0;
    for (std::size_t a = 0; a < 4; ++a) {
        CHECK(static_cast<double>(pmf.pmf[a]) == rel(expected[a], 1e-12));
        sum += pmf.pmf[a];
    }
    CHECK(std::fabs(static_cast<double>(sum) - 1.0) <= 1e-12);
    CHECK(static_cast<double>(pmf.weight) == rel(z, 1e-12));

    // The cap bites: anchor at miss 0 flattens every weight to 1.
    const auto flat = exact_truncated_pmf(two_pass_snapshot({0, PointId{3}, 0}), 0, 2);
    for (std::size_t a = 0; a < 4; ++a) CHECK(flat.pmf[a] == static_cast<long double>(four_points().atom(a).mass));
}

TEST_CASE("mixture pmf and its loss") {
    OracleSnapshot snap({TaskDistribution({{PointId{0}, 0, 1.0}}), TaskDistribution({{PointId{1}, 1, 0.5}, {PointId{2}, 1, 0.5}})},
                        LearnerParams(2, 1, 2, 1, 0.2, 0.1));
    snap.thresholds = {{Thresholds{}, Thresholds{}}};
    snap.w_hat = {{3.0, 1.0}};
    const auto exact = exact_mixture_pmf(snap, 1);
    REQUIRE(exact.atoms.size() == 3);
    CHECK(exact.atoms[0].mass == 0.5L);
    CHECK(exact.atoms[1].mass == 0.25L);
    CHECK(mixture_loss(exact, make_constant(3, 1)) == 0.5L);
    const auto plug = exact_mixture_pmf(snap, 1, true);
    CHECK(plug.task_weights[0] == 0.75L);
    CHECK(plug.atoms[0].mass == 0.75L);
    CHECK(static_cast<double>(tv_distance(exact, plug)) == rel(0.25, 1e-15));
    const std::vector<long double> p{0.5L, 0.5L}, q{1.0L, 0.0L}, r{1.0L};
    CHECK(tv_distance(p, q) == 0.5L);
    CHECK_THROWS_AS(tv_distance(p, r), Error);
}

TEST_CASE("potential starts at 1 and a perfect first hypothesis keeps it there") {
    OracleSnapshot snap({four_points(), four_points()}, LearnerParams(2, 1, 2, 2, 0.2, 0.1));
    snap.hypotheses = {make_table({0, 0, 1, 1}), make_table({0, 0, 1, 1})};
    snap.thresholds = {{Thresholds{}, Thresholds{}}, {Thresholds{{0, PointId{3}, 5}}, Thresholds{{0, PointId{1}, 0}}}};
    snap.w_hat = {{1.0, 1.0}, {1.0, 1.0}};
    CHECK(potential(snap, 1) == 1.0L);
    CHECK(potential(snap, 2) <= 1.0L);
    CHECK_THROWS_AS(potential(snap, 3), Error);
}

TEST_CASE("hierarchy flags adversarial anchors") {
    // Level-1 anchor of pass 3 above the one of pass 2: the pass-3 set grows.
    OracleSnapshot snap({four_points()}, LearnerParams(1, 1, 2, 3, 0.2, 0.1));
    snap.hypotheses = {make_table({1, 0, 0, 1}), make_table({1, 0, 0, 1}), make_table({1, 0, 0, 1})};
    snap.w_hat = {{1.0}, {1.0}, {1.0}};
    snap.thresholds = {{Thresholds{}}, {Thresholds{{0, PointId{1}, 0}}},
                       {Thresholds{{1, PointId{2}, 0}, {2, PointId{0}, 0}}}};
    const auto bad = check_hierarchy(snap);
    CHECK_FALSE(bad.empty());
    bool across = false;
    for (const auto& v : bad) across = across || v.across_passes;
    CHECK(across);

    snap.thresholds[2][0] = {{0, PointId{0}, 0}, {0, PointId{0}, 0}};
    CHECK(check_hierarchy(snap).empty());
}

TEST_CASE("oracle refuses universes above the cap") {
    std::vector<Atom> atoms;
    for (std::uint64_t x = 0; x < 300; ++x) atoms.push_back({PointId{x}, 0, 1.0 / 300.0});
    OracleSnapshot snap({TaskDistribution(atoms)}, LearnerParams(1, 1, 9, 1, 0.2, 0.1));
    snap.thresholds = {{Thresholds{}}};
    CHECK_THROWS_AS(exact_kept_mass(snap, 0, 1, 1), Error);
    snap.universe_cap = 300;
    CHECK(static_cast<double>(exact_kept_mass(snap, 0, 1, 1)) == rel(1.0, 1e-12));
}

TEST_CASE("tail fraction agrees with Monte Carlo over explicit keys") {
    const auto inst = threshold_audit_instance(1, 6);
    const std::vector<Hypothesis> hyps{make_table(std::vector<std::uint8_t>(64, 1)),
                                       make_table(std::vector<std::uint8_t>(64, 0))};
    const auto& task = inst.tasks[0];
    // Anchors: level 1 somewhere inside the miss-1 block, level 2 inside miss 1.
    const Thresholds anchors{{1, PointId{20}, std::uint64_t{1} << 62}, {1, PointId{40}, std::uint64_t{3} << 62}};
    OracleSnapshot snap({task}, LearnerParams(1, 1, 6, 3, 0.2, 0.1));
    snap.hypotheses = hyps;
    snap.thresholds = {{Thresholds{}}, {Thresholds{anchors[0]}}, {anchors}};
    snap.w_hat = {{1.0}, {1.0}, {1.0}};

    auto miss = [&](PointId x, std::uint8_t label, unsigned level) {
        std::uint32_t m = 0;
        for (unsigned j = 0; j < level; ++j) m += hyps[j].label(x) != label;
        return m;
    };
    Rng rng(12);
    const int n = 400000;
    std::uint64_t in1 = 0, above1 = 0, in2 = 0, above2 = 0;
    for (int s = 0; s < n; ++s) {
        const auto ex = task.draw(rng);
        const Key k1{miss(ex.point, ex.label, 1), ex.point.value, ex.tag};
        const Key k2{miss(ex.point, ex.label, 2), ex.point.value, ex.tag};
        const Key a1{anchors[0].miss, anchors[0].point.value, anchors[0].tag};
        const Key a2{anchors[1].miss, anchors[1].point.value, anchors[1].tag};
        ++in1;
        if (!(k1 < a1)) {
            ++above1;
            continue;
        }
        ++in2;
        if (!(k2 < a2)) ++above2;
    }
    const double f1 = static_cast<double>(above1) / in1;
    const double f2 = static_cast<double>(above2) / in2;
    CHECK(std::fabs(f1 - static_cast<double>(exact_tail_fraction(snap, 0, 3, 1))) < 0.005);
    CHECK(std::fabs(f2 - static_cast<double>(exact_tail_fraction(snap, 0, 3, 2))) < 0.005);
    CHECK(static_cast<double>(exact_kept_mass(snap, 0, 3, 2)) == rel(static_cast<double>(in2) / n, 0.01));
}
