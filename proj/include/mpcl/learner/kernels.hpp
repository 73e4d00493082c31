#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpcl/learner/stage_view.hpp"
#include "mpcl/random.hpp"

namespace mpcl {

// literal_*: draw every sample. The serial and parallel variants split the
// draws into fixed chunks with one derived stream each, so they agree bit for
// bit. aggregated: draw the per-atom counts directly (multinomial via
// sequential binomials); same distribution, O(atoms) per call.
enum class Kernel { literal_serial, literal_parallel, aggregated };

inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 14;

// ceil(eps * kept), at least 1.
std::uint64_t quantile_rank(double eps, std::uint64_t kept);

struct QuantileDraw {
    WeightKey threshold;
    std::uint64_t kept = 0;
};

// Draws m samples, keeps those admitted at levels 1..level-1 and returns the
// ceil(eps * kept)-th largest level-`level` key. kept == 0 leaves the key unset.
QuantileDraw quantile_kernel(const StageView& view, std::span<const WeightKey> thresholds, unsigned level,
                             double eps, std::uint64_t m, Rng rng, Kernel kernel);

struct WeightCounts {
    // by_value[v] = kept samples with min(miss_{t-1}, cap) == v.
    std::vector<std::uint64_t> by_value;
    std::uint64_t kept = 0;
};

WeightCounts weight_kernel(const StageView& view, std::span<const WeightKey> thresholds, unsigned filter_levels,
                           std::uint32_t cap, std::uint64_t m, Rng rng, Kernel kernel);

// Multinomial counts of n draws over categories with the given masses plus
// one implicit category of mass `rest`; returns the explicit counts.
std::vector<std::uint64_t> multinomial_counts(std::uint64_t n, std::span<const long double> masses,
                                              long double rest, Rng& rng);

// Per-atom filter windows and acceptance probabilities of the truncated
// sampler at pass t = view.t().
class TruncationTable {
public:
    TruncationTable(const StageView& view, std::span<const WeightKey> thresholds, double eta);

    const StageView& view() const { return *view_; }
    const TagWindow& window(std::size_t atom) const { return windows_[atom]; }
    // exp(eta * (min(m, cap) - cap)).
    double accept(std::size_t atom) const { return accept_[atom]; }
    // Probability that one attempt returns a sample.
    long double acceptance_mass() const { return acceptance_; }

    // Atom of an accepted draw, proportional to mass * window * accept.
    std::size_t draw_accepted_atom(Rng& rng) const;

private:
    const StageView* view_;
    std::vector<TagWindow> windows_;
    std::vector<double> accept_;
    std::vector<double> cumulative_;
    long double acceptance_ = 0.0L;
};

}  // namespace mpcl
