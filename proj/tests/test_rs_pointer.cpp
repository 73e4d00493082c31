#include <set>

#include "approx.hpp"
#include "doctest.h"
#include "mpcl/errors.hpp"
#include "mpcl/rs_pointer.hpp"

using namespace mpcl;

namespace {

// Direct evaluation of sum_i y_i * f^(i-1) mod p, without Horner.
std::vector<std::uint64_t> naive_encode(std::uint64_t p, std::uint64_t m, const std::vector<std::uint64_t>& y) {
    std::vector<std::uint64_t> z(m, 0);
    for (std::uint64_t f = 0; f < m; ++f) {
        std::uint64_t power = 1;
        for (auto yi : y) {
            z[f] = (z[f] + yi * power) % p;
            power = power * f % p;
        }
    }
    return z;
}

PointerMap map_of(std::vector<std::uint64_t> v) { return PointerMap{std::move(v)}; }

}  // namespace

TEST_CASE("reed-solomon encoding") {
    CHECK(rs_encode({7, 1, 3}, std::vector<std::uint64_t>{5}) == std::vector<std::uint64_t>{5, 5, 5});
    CHECK(rs_encode({7, 2, 3}, std::vector<std::uint64_t>{1, 2}) == std::vector<std::uint64_t>{1, 3, 5});
    const auto z2 = rs_encode({7, 2, 3}, std::vector<std::uint64_t>{1, 3});
    CHECK(z2 == std::vector<std::uint64_t>{1, 4, 0});
    CHECK(hamming_distance(std::vector<std::uint64_t>{1, 3, 5}, z2) == 2);
    CHECK_THROWS_AS(rs_encode({7, 2, 3}, std::vector<std::uint64_t>{1}), Error);

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::uint64_t> y(4);
        for (auto& v : y) v = rng.below(13);
        CHECK(rs_encode({13, 4, 9}, y) == naive_encode(13, 9, y));
    }
}

TEST_CASE("reed-solomon distance, exhaustive at p=5, n=2, m=4") {
    const RSCode code{5, 2, 4};
    std::vector<std::vector<std::uint64_t>> words;
    for (std::uint64_t a = 0; a < 5; ++a) {
        for (std::uint64_t b = 0; b < 5; ++b) words.push_back(rs_encode(code, std::vector<std::uint64_t>{a, b}));
    }
    int violations = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = i + 1; j < words.size(); ++j) violations += hamming_distance(words[i], words[j]) < 3 ? 1 : 0;
    }
    // (1 - n/m) m = 2, and the true minimum distance m - n + 1 = 3.
    CHECK(violations == 0);
}

TEST_CASE("pointer chasing") {
    const auto id = identity_map(4);
    const auto r = chase_pointers(id, id, 3);
    CHECK(r.trace.size() == 8);
    for (auto w : r.trace) CHECK(w == 1);
    CHECK(r.parity == 1);

    const auto a = chase_pointers(map_of({2, 3, 4, 1}), map_of({1, 1, 1, 1}), 1);
    CHECK(a.trace == std::vector<std::uint64_t>{1, 2, 1, 2});
    CHECK(a.parity == 0);

    const auto b = chase_pointers(map_of({3, 3, 3, 3}), map_of({4, 4, 4, 4}), 2);
    CHECK(b.trace.back() == 3);
    CHECK(b.parity == 1);
}

TEST_CASE("pointer bijection and symbol packing") {
    const auto spec = PcClassSpec::make(1, 2, 2, 2);
    CHECK(spec.pointers == 8);
    CHECK(spec.symbols == 64);
    CHECK(spec.p == 67);
    CHECK(spec.rho({0, 0, 0}) == 1);
    std::set<std::uint64_t> seen;
    for (std::uint64_t w = 1; w <= spec.pointers; ++w) {
        const auto q = spec.rho_inverse(w);
        CHECK(spec.rho(q) == w);
        seen.insert(q.block * 100 + q.cell * 10 + q.slot);
    }
    CHECK(seen.size() == spec.pointers);
    for (std::uint64_t s = 0; s < spec.symbols; ++s) {
        const auto ps = spec.unpack(s);
        CHECK(spec.pack(ps) == s);
        for (std::uint64_t l = 0; l < spec.b; ++l) CHECK(spec.rho(spec.unpack_one(s, l)) == spec.rho(ps[l]));
    }
    for (std::uint64_t x = 0; x < spec.universe_size(); ++x) CHECK(spec.encode(spec.decode(PointId{x})).value == x);
}

TEST_CASE("h_A construction: default, fresh and unused rows") {
    const auto spec = PcClassSpec::make(2, 2, 2, 1);
    const std::uint64_t cols = 2 * spec.d;
    // Symbol 3 unpacks to rho^-1(4) = block 1, cell 1; symbol 0 to block 0, cell 0.
    // The chase visits Y_0, Z_1, Y_0, Z_1, Y_0: only rows 1 and 2 are read.
    PcParams a(spec.rows() * spec.d, 0);
    a[0] = 3;
    a[1] = 2;
    const auto h = build_pc_hypothesis(spec, a);
    const auto* pc = h.as<PcHypothesis>();
    REQUIRE(pc != nullptr);
    CHECK(pc->y_rows()[0] == 1);
    CHECK(pc->y_rows()[1] == kNil);
    CHECK(pc->z_rows()[0] == kNil);
    CHECK(pc->z_rows()[1] == 2);

    for (std::uint64_t col = 0; col < cols; ++col) {
        for (std::uint64_t v = 0; v < spec.p; ++v) {
            CHECK(h.label(spec.encode({0, 1, col, v})) == 1);
            CHECK(h.label(spec.encode({1, 0, col, v})) == 1);
        }
    }
    const auto word = naive_encode(spec.p, cols, {a[0], a[1]});
    int ones = 0;
    for (std::uint64_t col = 0; col < cols; ++col) {
        for (std::uint64_t v = 0; v < spec.p; ++v) {
            const bool one = h.label(spec.encode({0, 0, col, v})) == 1;
            ones += one ? 1 : 0;
            CHECK(one == (v == word[col]));
        }
    }
    CHECK(ones == static_cast<int>(cols));

    for (std::uint64_t row = 3; row <= spec.rows(); ++row) {
        PcParams b = a;
        b[(row - 1) * spec.d] = (b[(row - 1) * spec.d] + 1) % spec.symbols;
        const auto h2 = build_pc_hypothesis(spec, b);
        for (std::uint64_t x = 0; x < spec.universe_size(); ++x) CHECK(h2.label(PointId{x}) == h.label(PointId{x}));
        CHECK(decode_pointer_parity(*h2.as<PcHypothesis>()) == decode_pointer_parity(*pc));
    }
}

TEST_CASE("revisited block keeps its labels") {
    const auto spec = PcClassSpec::make(2, 2, 1, 1);
    // All-zero symbols: every pointer is block 0, so Y_0 and Z_0 are set at
    // steps 2 and 3 and revisited afterwards.
    PcParams a(spec.rows() * spec.d, 0);
    const auto h = build_pc_hypothesis(spec, a);
    const auto* pc = h.as<PcHypothesis>();
    CHECK(pc->y_rows()[0] == 1);
    CHECK(pc->z_rows()[0] == 2);
    CHECK(pc->trace().size() == 2 * spec.c + 2);
    for (const auto& q : pc->trace()) CHECK(q.block == 0);

    PcParams b = a;
    b[2] = 1;
    b[4] = 1;
    const auto h2 = build_pc_hypothesis(spec, b);
    for (std::uint64_t x = 0; x < spec.universe_size(); ++x) CHECK(h2.label(PointId{x}) == h.label(PointId{x}));
    for (std::uint64_t col = 0; col < 2; ++col) {
        for (std::uint64_t v = 0; v < spec.p; ++v) CHECK(h.label(spec.encode({0, 0, col, v})) == (v == 0 ? 1 : 0));
    }
}

TEST_CASE("decode parity of identity maps is 1") {
    MultiPassConfig cfg;
    cfg.c = 2;
    cfg.k_prime = 1;
    cfg.epsilon = 0.1;
    cfg.k = 2;
    cfg.d = 2;
    cfg.b = 2;
    std::uint64_t alpha = 0;
    bool faithful = false;
    const auto spec = resolve_multipass_spec(cfg, alpha, faithful);
    const auto inst = gen_multipass_instance(cfg, identity_map(spec.pointers), identity_map(spec.pointers));
    CHECK(decode_pointer_parity(*inst.witness.as<PcHypothesis>()) == 1);
}

TEST_CASE("multipass instances: structure and round trip") {
    MultiPassConfig cfg;
    cfg.c = 2;
    cfg.k_prime = 1;
    cfg.epsilon = 0.1;
    cfg.k = 2;
    cfg.d = 2;
    cfg.b = 2;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = gen_multipass_instance(cfg, seed);
        CHECK(inst.meta.alpha == 2);
        REQUIRE(inst.tasks.size() == 2);
        for (const auto& t : inst.tasks) {
            CHECK(t.size() == 2 * inst.meta.alpha * inst.spec.d);
            for (const auto& a : t.atoms()) {
                CHECK(a.label == 1);
                CHECK(a.mass == rel(1.0 / (2.0 * inst.meta.alpha * inst.spec.d)));
            }
            CHECK(distribution_loss(inst.witness, t) == 0.0);
        }
        const auto* w = inst.witness.as<PcHypothesis>();
        REQUIRE(w != nullptr);
        CHECK(decode_pointer_parity(*w) == chase_pointers(inst.f_a, inst.f_b, cfg.c).parity);
    }
    MultiPassConfig bad = cfg;
    bad.k = 3;
    CHECK_THROWS_AS(gen_multipass_instance(bad, 1), Error);
}

TEST_CASE("full-scale multipass parameters") {
    MultiPassConfig cfg;
    cfg.c = 1;
    cfg.k_prime = 1;
    cfg.d_prime = 10;
    cfg.b_prime = 16;
    cfg.epsilon = 0.25;
    std::uint64_t alpha = 0;
    bool faithful = false;
    const auto spec = resolve_multipass_spec(cfg, alpha, faithful);
    CHECK(faithful);
    CHECK(alpha == 1);
    CHECK(spec.k == 1);
    // Largest d with 4cd + 2c + 2d + 2 <= 10.
    CHECK(spec.d == 1);
    CHECK(spec.description_bits() <= 16);
    CHECK(4 * spec.c * spec.d + 2 * spec.c + 2 * spec.d + 2 <= cfg.d_prime);
}

TEST_CASE("class members respect the special-block structure") {
    const auto spec = PcClassSpec::make(1, 2, 2, 1);
    const PcClass cls(spec);
    REQUIRE(cls.cardinality().has_value());
    CHECK(*cls.cardinality() == 4096);
    std::uint64_t members = 0;
    cls.enumerate([&](const Hypothesis& h) {
        const auto* pc = h.as<PcHypothesis>();
        std::uint64_t special_ones = 0;
        for (std::uint64_t block = 0; block < spec.k; ++block) {
            for (std::uint64_t side = 0; side < 2; ++side) {
                const bool special = (side == 0 ? pc->y_rows() : pc->z_rows())[block] != kNil;
                std::uint64_t ones = 0;
                for (std::uint64_t col = 0; col < 2 * spec.d; ++col) {
                    for (std::uint64_t v = 0; v < spec.p; ++v) ones += h.label(spec.encode({side, block, col, v}));
                }
                if (!special) CHECK(ones == 2 * spec.d * spec.p);
                if (special && side == 0) special_ones += ones;
            }
        }
        CHECK(special_ones <= (spec.c + 1) * 2 * spec.d);
        ++members;
        return true;
    });
    CHECK(members == 4096);
}

TEST_CASE("greedy chase ERM recovers a zero-loss member on realizable samples") {
    MultiPassConfig cfg;
    cfg.c = 2;
    cfg.k_prime = 1;
    cfg.epsilon = 0.1;
    cfg.k = 2;
    cfg.d = 2;
    cfg.b = 2;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto inst = gen_multipass_instance(cfg, seed);
        std::vector<LabeledExample> s;
        for (const auto& t : inst.tasks) {
            for (const auto& a : t.atoms()) s.push_back({a.point, a.label, 0});
        }
        const PcClass cls(inst.spec);
        const auto h = cls.erm(s);
        CHECK(empirical_loss(h, s) == 0.0);
        CHECK(decode_pointer_parity(*h.as<PcHypothesis>()) == chase_pointers(inst.f_a, inst.f_b, cfg.c).parity);
    }
}
