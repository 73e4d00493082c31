#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mpcl/field.hpp"
#include "mpcl/hypothesis_class.hpp"

namespace mpcl {

// RS_{n,m} over F_p with evaluation points 0, 1, ..., m-1.
struct RSCode {
    std::uint64_t p = 0;
    std::uint64_t n_sym = 0;
    std::uint64_t m_sym = 0;
};

// z_j = sum_i y_i * j^(i-1) mod p, with 0^0 = 1.
std::vector<std::uint64_t> rs_encode(const RSCode& code, std::span<const std::uint64_t> y);

// Number of coordinates where two words differ.
std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

// A map [n] -> [n], stored 1-indexed: f(w) = values[w - 1].
struct PointerMap {
    std::vector<std::uint64_t> values;

    std::uint64_t size() const { return values.size(); }
    std::uint64_t operator()(std::uint64_t w) const { return values.at(w - 1); }
};

PointerMap identity_map(std::uint64_t n);
PointerMap random_pointer_map(std::uint64_t n, Rng& rng);

struct ChaseResult {
    // trace[0] = w^(1), ..., trace[2c+1] = w^(2c+2).
    std::vector<std::uint64_t> trace;
    std::uint8_t parity = 0;
};

// w^(1) = 1, then f_A on even steps and f_B on odd steps.
ChaseResult chase_pointers(const PointerMap& f_a, const PointerMap& f_b, unsigned c);

// A pointer (q1, q2, q3) in [k] x [d] x [b], 0-based.
struct Pointer {
    std::uint64_t block = 0;
    std::uint64_t cell = 0;
    std::uint64_t slot = 0;

    friend constexpr auto operator<=>(const Pointer&, const Pointer&) = default;
};

// Data point (x1, x2, x3, x4): side (0 = Y, 1 = Z), block, column in [2d], value in F_p.
struct PcPoint {
    std::uint64_t side = 0;
    std::uint64_t block = 0;
    std::uint64_t column = 0;
    std::uint64_t value = 0;
};

struct PcClassSpec {
    unsigned c = 1;
    std::uint64_t k = 1;
    std::uint64_t d = 1;
    std::uint64_t b = 1;
    // Derived: |Q| = kdb, |B| = (kdb)^b, p = smallest prime >= |B|.
    std::uint64_t pointers = 0;
    std::uint64_t symbols = 0;
    std::uint64_t p = 0;

    // Throws parameter when |B| does not fit in 62 bits.
    static PcClassSpec make(unsigned c, std::uint64_t k, std::uint64_t d, std::uint64_t b);

    std::uint64_t universe_size() const { return 2 * k * 2 * d * p; }
    unsigned description_bits() const;
    // Number of parameter rows a_{1..2c+1}.
    std::uint64_t rows() const { return 2 * static_cast<std::uint64_t>(c) + 1; }
    // VC upper bound 4cd + 2c + 2d + 1.
    std::uint64_t vc_bound() const { return 4 * c * d + 2 * c + 2 * d + 1; }

    PointId encode(const PcPoint& x) const {
        return PointId{((x.side * k + x.block) * 2 * d + x.column) * p + x.value};
    }
    PcPoint decode(PointId x) const;

    // rho(q1, q2, q3) = (q1-1)db + (q2-1)b + q3 in 1-based terms; 1..kdb.
    std::uint64_t rho(const Pointer& q) const { return (q.block * d + q.cell) * b + q.slot + 1; }
    Pointer rho_inverse(std::uint64_t w) const;

    // Mixed-radix bijection B <-> Q^b; pointer l is digit l (least significant first).
    std::uint64_t pack(std::span<const Pointer> pointers_in) const;
    std::vector<Pointer> unpack(std::uint64_t symbol) const;
    Pointer unpack_one(std::uint64_t symbol, std::uint64_t slot) const;
};

// Parameter tuple A, row-major: a[(i-1)*d + (j-1)] = a_{i,j}.
using PcParams = std::vector<std::uint64_t>;

inline constexpr std::uint64_t kNil = ~std::uint64_t{0};

class PcHypothesis final : public HypothesisModel {
public:
    PcHypothesis(PcClassSpec spec, PcParams a);

    bool eval(PointId x) const override;
    // (2c+1) * d symbols of ceil(log2 |B|) bits each.
    std::uint64_t repr_bits() const override;
    HypothesisKind kind() const override { return HypothesisKind::pointer_chasing; }

    const PcClassSpec& spec() const { return spec_; }
    const PcParams& params() const { return a_; }
    std::uint64_t a(std::uint64_t row, std::uint64_t j) const { return a_[(row - 1) * spec_.d + j]; }
    // I and J with rows 1-based; kNil when unset.
    std::span<const std::uint64_t> y_rows() const { return i_rows_; }
    std::span<const std::uint64_t> z_rows() const { return j_rows_; }
    // q^(1..2c+2).
    std::span<const Pointer> trace() const { return trace_; }

private:
    PcClassSpec spec_;
    PcParams a_;
    std::vector<std::uint64_t> i_rows_;
    std::vector<std::uint64_t> j_rows_;
    std::vector<Pointer> trace_;
    // Codeword per special block, indexed [side * k + block]; empty when all-1.
    std::vector<std::vector<std::uint64_t>> codewords_;
};

Hypothesis build_pc_hypothesis(const PcClassSpec& spec, PcParams a);

// rho(q^(2c+2)) mod 2, recomputed from the hypothesis parameters.
std::uint8_t decode_pointer_parity(const PcHypothesis& h);

// Enumeration order: A lexicographic with a_{1,1} most significant.
class PcClass final : public HypothesisClass {
public:
    explicit PcClass(PcClassSpec spec);

    std::string name() const override { return "pointer-chasing"; }
    std::uint64_t universe_size() const override { return spec_.universe_size(); }
    std::optional<std::uint64_t> cardinality() const override;
    unsigned vc_upper_hint() const override { return static_cast<unsigned>(spec_.vc_bound()); }
    void enumerate(const std::function<bool(const Hypothesis&)>& visit) const override;

    // Greedy chase: at each fresh block picks the first symbol row minimizing
    // the sample errors inside that block. Zero loss on realizable samples
    // that pin every visited codeword; not a global minimizer in general.
    Hypothesis erm(std::span<const LabeledExample> sample) const override;
    bool erm_is_exact() const override { return false; }

    const PcClassSpec& spec() const { return spec_; }

    std::uint64_t row_search_cap() const { return row_search_cap_; }
    void set_row_search_cap(std::uint64_t cap) { row_search_cap_ = cap; }

private:
    PcClassSpec spec_;
    std::uint64_t row_search_cap_ = std::uint64_t{1} << 22;
};

struct MultiPassConfig {
    unsigned c = 1;
    std::uint64_t k_prime = 1;
    std::uint64_t d_prime = 8;
    std::uint64_t b_prime = 32;
    double epsilon = 0.1;
    // Desk-scale (k, d, b); k must equal k' * floor(1/(4 eps)).
    std::optional<std::uint64_t> k;
    std::optional<std::uint64_t> d;
    std::optional<std::uint64_t> b;
};

struct MultiPassMeta {
    unsigned c = 0;
    std::uint64_t k = 0;
    std::uint64_t d = 0;
    std::uint64_t b = 0;
    std::uint64_t k_prime = 0;
    std::uint64_t alpha = 0;
    std::uint64_t n_pc = 0;
    std::uint64_t p = 0;
    std::uint64_t f_a_digest = 0;
    std::uint64_t f_b_digest = 0;
    std::uint64_t seed = 0;
    unsigned description_bits = 0;
    bool full_scale = true;
};

struct MultiPassInstance {
    PcClassSpec spec;
    // k' tasks on Y from f_A, then k' tasks on Z from f_B.
    std::vector<TaskDistribution> tasks;
    Hypothesis witness;
    PointerMap f_a;
    PointerMap f_b;
    MultiPassMeta meta;
};

// Resolves (k, d, b) from the config, either derived or desk-scale.
PcClassSpec resolve_multipass_spec(const MultiPassConfig& config, std::uint64_t& alpha, bool& full_scale);

MultiPassInstance gen_multipass_instance(const MultiPassConfig& config, const PointerMap& f_a,
                                         const PointerMap& f_b, std::uint64_t seed = 0);
// Draws f_A and f_B uniformly from the seed.
MultiPassInstance gen_multipass_instance(const MultiPassConfig& config, std::uint64_t seed);

std::uint64_t map_digest(const PointerMap& f);

}  // namespace mpcl
