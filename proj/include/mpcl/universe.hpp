#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "mpcl/random.hpp"

namespace mpcl {

// Index of a point in a finite universe [0, |X|).
struct PointId {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(const PointId&, const PointId&) = default;
};

// Number of bits needed to write down one point: ceil(log2 |X|), at least 1.
unsigned description_bits(std::uint64_t universe_size);

struct LabeledExample {
    PointId point;
    std::uint8_t label = 0;
    // Fresh uniform 64-bit tag drawn with every sample; it splits each atom
    // into 2^64 equal sub-atoms so quantiles are tie-free almost surely.
    std::uint64_t tag = 0;

    friend constexpr bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// Stored size of one labeled example: point, label bit and tie tag.
inline std::uint64_t example_bits(unsigned description_bits) {
    return static_cast<std::uint64_t>(description_bits) + 1 + 64;
}

struct Atom {
    PointId point;
    std::uint8_t label = 0;
    double mass = 0.0;
};

inline constexpr double kMassTolerance = 1e-12;

// Finite labeled distribution over X x {0,1}. Immutable after construction.
class TaskDistribution {
public:
    TaskDistribution() = default;

    // Throws invalid_distribution unless the support is nonempty, masses are
    // finite and nonnegative, sum to 1 within 1e-12, and points are unique.
    explicit TaskDistribution(std::vector<Atom> atoms);

    // Uniform over the given (point, label) pairs.
    static TaskDistribution uniform(std::span<const PointId> points, std::uint8_t label);

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const Atom& atom(std::size_t index) const { return atoms_[index]; }

    // Inverse-CDF draw of an atom index.
    std::size_t draw_atom(Rng& rng) const;
    LabeledExample draw(Rng& rng) const;

    double total_mass() const { return total_; }

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

}  // namespace mpcl
