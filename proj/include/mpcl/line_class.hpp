#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpcl/field.hpp"
#include "mpcl/hypothesis_class.hpp"

namespace mpcl {

// Line {(r1, r2) : slope*r1 + r2 == intercept (mod p)}.
struct LineParams {
    std::uint64_t slope = 0;
    std::uint64_t intercept = 0;

    friend constexpr auto operator<=>(const LineParams&, const LineParams&) = default;
};

bool on_line(const LineParams& a, std::uint64_t r1, std::uint64_t r2, const PrimeField& field);

// ceil(log2 n), 0 for n <= 1.
unsigned ceil_log2(std::uint64_t n);

struct LinePoint {
    std::uint64_t block = 0;
    std::uint64_t cell = 0;
    std::uint64_t r1 = 0;
    std::uint64_t r2 = 0;
};

// Universe [n] x [d] x ([p] x [p]), all coordinates 0-based.
struct LineClassSpec {
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::uint64_t p = 0;

    std::uint64_t universe_size() const { return n * d * p * p; }
    unsigned description_bits() const;
    PointId encode(const LinePoint& x) const { return PointId{((x.block * d + x.cell) * p + x.r1) * p + x.r2}; }
    LinePoint decode(PointId x) const;
};

class LineHypothesis final : public HypothesisModel {
public:
    LineHypothesis(LineClassSpec spec, std::uint64_t block, std::vector<LineParams> lines);

    // 1 off the chosen block; inside it, 1 exactly on the cell's line.
    bool eval(PointId x) const override;
    std::uint64_t repr_bits() const override;
    HypothesisKind kind() const override { return HypothesisKind::line; }

    const LineClassSpec& spec() const { return spec_; }
    std::uint64_t block() const { return block_; }
    const std::vector<LineParams>& lines() const { return lines_; }

private:
    LineClassSpec spec_;
    PrimeField field_;
    std::uint64_t block_;
    std::vector<LineParams> lines_;
};

Hypothesis make_line_hypothesis(const LineClassSpec& spec, std::uint64_t block, std::vector<LineParams> lines);

// Enumeration order: block, then (slope, intercept) of cell 0, cell 1, ...
// lexicographically.
class LineClass final : public HypothesisClass {
public:
    explicit LineClass(LineClassSpec spec);

    std::string name() const override { return "line"; }
    std::uint64_t universe_size() const override { return spec_.universe_size(); }
    std::optional<std::uint64_t> cardinality() const override;
    unsigned vc_upper_hint() const override { return static_cast<unsigned>(2 * spec_.d); }
    void enumerate(const std::function<bool(const Hypothesis&)>& visit) const override;

    // Per-cell best line on the chosen block; equals the enumeration-order
    // first minimizer.
    Hypothesis erm(std::span<const LabeledExample> sample) const override;

    const LineClassSpec& spec() const { return spec_; }

private:
    LineClassSpec spec_;
};

struct OnePassConfig {
    unsigned k = 1;
    unsigned d = 1;
    unsigned b = 32;
    double epsilon = 0.01;
    // Desk-scale overrides of the derived block count and prime.
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> p;
    std::uint64_t min_prime = 11;
    std::uint64_t atom_cap = std::uint64_t{1} << 23;
};

struct OnePassMeta {
    std::uint64_t n = 0;
    std::uint64_t p = 0;
    std::uint64_t t = 0;
    std::uint64_t alpha = 0;
    std::uint64_t i_star = 0;
    std::uint64_t seed = 0;
    unsigned k = 0;
    unsigned d = 0;
    unsigned description_bits = 0;
    bool full_scale = true;
};

struct OnePassInstance {
    LineClassSpec spec;
    // k line tasks followed by the label-0 task on block i*.
    std::vector<TaskDistribution> tasks;
    Hypothesis witness;
    // The size-t line sets of block i*, one per cell.
    std::vector<std::vector<LineParams>> excluded_lines;
    OnePassMeta meta;
};

OnePassInstance gen_onepass_instance(const OnePassConfig& config, std::uint64_t seed);

}  // namespace mpcl
