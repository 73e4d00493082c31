#include "mpcl/learner/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "mpcl/errors.hpp"

namespace mpcl {

std::uint64_t quantile_rank(double eps, std::uint64_t kept) {
    const auto rank = static_cast<std::uint64_t>(std::ceil(static_cast<long double>(eps) * kept));
    return std::clamp<std::uint64_t>(rank, 1, std::max<std::uint64_t>(kept, 1));
}

std::vector<std::uint64_t> multinomial_counts(std::uint64_t n, std::span<const long double> masses,
                                              long double rest, Rng& rng) {
    std::vector<std::uint64_t> counts(masses.size(), 0);
    std::vector<long double> suffix(masses.size() + 1, 0.0L);
    suffix[masses.size()] = std::max(rest, 0.0L);
    for (std::size_t a = masses.size(); a-- > 0;) suffix[a] = suffix[a + 1] + std::max(masses[a], 0.0L);
    for (std::size_t a = 0; a < masses.size() && n > 0; ++a) {
        if (masses[a] <= 0.0L) continue;
        const double p = static_cast<double>(std::min(1.0L, masses[a] / suffix[a]));
        std::uint64_t k = n;
        if (p < 1.0) {
            std::binomial_distribution<long long> binom(static_cast<long long>(n), p);
            k = static_cast<std::uint64_t>(binom(rng.engine()));
        }
        counts[a] = k;
        n -= k;
    }
    return counts;
}

namespace {

std::uint64_t chunk_count(std::uint64_t m) { return (m + kChunkSize - 1) / kChunkSize; }

std::uint64_t chunk_length(std::uint64_t m, std::uint64_t chunk) {
    return std::min(kChunkSize, m - chunk * kChunkSize);
}

// Runs body(chunk) for every chunk, in order or under OpenMP.
template <typename Body>
void for_chunks(std::uint64_t chunks, Kernel kernel, Body&& body) {
    if (kernel == Kernel::literal_parallel) {
        const auto n = static_cast<long long>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
        for (long long c = 0; c < n; ++c) body(static_cast<std::uint64_t>(c));
    } else {
        for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    }
}

// r-th largest of n uniform tags on [0, width).
std::uint64_t order_statistic_tag(std::uint64_t n, std::uint64_t r, const TagWindow& window, Rng& rng) {
    std::gamma_distribution<double> low(static_cast<double>(n - r + 1), 1.0);
    std::gamma_distribution<double> high(static_cast<double>(r), 1.0);
    const double x = low(rng.engine());
    const double y = high(rng.engine());
    const long double beta = static_cast<long double>(x) / (static_cast<long double>(x) + y);
    const long double width = window.width();
    long double scaled = std::floor(beta * width);
    scaled = std::clamp(scaled, 0.0L, width - 1.0L);
    return static_cast<std::uint64_t>(scaled);
}

QuantileDraw quantile_literal(const StageView& view, std::span<const WeightKey> thresholds, unsigned level,
                              double eps, std::uint64_t m, const Rng& rng, Kernel kernel) {
    const auto& task = view.task();
    const std::uint64_t chunks = chunk_count(m);
    const std::uint64_t keep = std::min<std::uint64_t>(kChunkSize, quantile_rank(eps, m));
    std::vector<std::vector<WeightKey>> tops(chunks);
    std::vector<std::uint64_t> kept(chunks, 0);
    std::vector<TagWindow> windows(view.atoms());
    for (std::size_t a = 0; a < view.atoms(); ++a) windows[a] = view.window(a, thresholds, level - 1);

    for_chunks(chunks, kernel, [&](std::uint64_t c) {
        Rng local = rng.derive(c);
        auto& top = tops[c];
        top.reserve(keep + 1);
        // Min-heap of the `keep` largest keys seen in this chunk.
        for (std::uint64_t s = 0; s < chunk_length(m, c); ++s) {
            const std::size_t a = task.draw_atom(local);
            const std::uint64_t tag = local.next_u64();
            if (!windows[a].admits(tag)) continue;
            ++kept[c];
            const WeightKey key = view.key(a, level, tag);
            if (top.size() < keep) {
                top.push_back(key);
                std::push_heap(top.begin(), top.end(), std::greater<>{});
            } else if (top.front() < key) {
                std::pop_heap(top.begin(), top.end(), std::greater<>{});
                top.back() = key;
                std::push_heap(top.begin(), top.end(), std::greater<>{});
            }
        }
    });

    QuantileDraw out;
    out.kept = std::accumulate(kept.begin(), kept.end(), std::uint64_t{0});
    if (out.kept == 0) return out;
    std::vector<WeightKey> merged;
    for (const auto& top : tops) merged.insert(merged.end(), top.begin(), top.end());
    const std::uint64_t rank = quantile_rank(eps, out.kept);
    auto nth = merged.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(merged.begin(), nth, merged.end(), std::greater<>{});
    out.threshold = *nth;
    return out;
}

QuantileDraw quantile_aggregated(const StageView& view, std::span<const WeightKey> thresholds, unsigned level,
                                 double eps, std::uint64_t m, Rng rng) {
    const auto& task = view.task();
    const std::size_t atoms = view.atoms();
    std::vector<TagWindow> windows(atoms);
    std::vector<long double> masses(atoms);
    long double rejected = 0.0L;
    for (std::size_t a = 0; a < atoms; ++a) {
        windows[a] = view.window(a, thresholds, level - 1);
        const long double mu = task.atom(a).mass;
        masses[a] = mu * windows[a].fraction();
        rejected += mu - masses[a];
    }
    const auto counts = multinomial_counts(m, masses, rejected, rng);

    QuantileDraw out;
    out.kept = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (out.kept == 0) return out;

    std::vector<std::size_t> order(atoms);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto mx = view.miss(x, level);
        const auto my = view.miss(y, level);
        if (mx != my) return mx > my;
        return task.atom(x).point > task.atom(y).point;
    });
    const std::uint64_t rank = quantile_rank(eps, out.kept);
    std::uint64_t seen = 0;
    for (std::size_t a : order) {
        if (seen + counts[a] >= rank) {
            const std::uint64_t within = rank - seen;
            out.threshold = view.key(a, level, order_statistic_tag(counts[a], within, windows[a], rng));
            return out;
        }
        seen += counts[a];
    }
    fail(ErrorCode::malformed, "quantile rank beyond the kept count");
}

WeightCounts weight_literal(const StageView& view, std::span<const WeightKey> thresholds, unsigned filter_levels,
                            std::uint32_t cap, std::uint64_t m, const Rng& rng, Kernel kernel) {
    const auto& task = view.task();
    const unsigned last = view.t() - 1;
    const std::uint64_t chunks = chunk_count(m);
    std::vector<TagWindow> windows(view.atoms());
    for (std::size_t a = 0; a < view.atoms(); ++a) windows[a] = view.window(a, thresholds, filter_levels);
    std::vector<std::vector<std::uint64_t>> hist(chunks, std::vector<std::uint64_t>(cap + 1, 0));

    for_chunks(chunks, kernel, [&](std::uint64_t c) {
        Rng local = rng.derive(c);
        auto& h = hist[c];
        for (std::uint64_t s = 0; s < chunk_length(m, c); ++s) {
            const std::size_t a = task.draw_atom(local);
            const std::uint64_t tag = local.next_u64();
            if (!windows[a].admits(tag)) continue;
            ++h[std::min(view.miss(a, last), cap)];
        }
    });

    WeightCounts out;
    out.by_value.assign(cap + 1, 0);
    for (const auto& h : hist) {
        for (std::uint32_t v = 0; v <= cap; ++v) out.by_value[v] += h[v];
    }
    out.kept = std::accumulate(out.by_value.begin(), out.by_value.end(), std::uint64_t{0});
    return out;
}

WeightCounts weight_aggregated(const StageView& view, std::span<const WeightKey> thresholds, unsigned filter_levels,
                               std::uint32_t cap, std::uint64_t m, Rng rng) {
    const auto& task = view.task();
    const unsigned last = view.t() - 1;
    std::vector<long double> masses(cap + 1, 0.0L);
    long double rejected = 0.0L;
    for (std::size_t a = 0; a < view.atoms(); ++a) {
        const long double mu = task.atom(a).mass;
        const long double kept = mu * view.window(a, thresholds, filter_levels).fraction();
        masses[std::min(view.miss(a, last), cap)] += kept;
        rejected += mu - kept;
    }
    WeightCounts out;
    out.by_value = multinomial_counts(m, masses, rejected, rng);
    out.kept = std::accumulate(out.by_value.begin(), out.by_value.end(), std::uint64_t{0});
    return out;
}

}  // namespace

QuantileDraw quantile_kernel(const StageView& view, std::span<const WeightKey> thresholds, unsigned level,
                             double eps, std::uint64_t m, Rng rng, Kernel kernel) {
    require(level >= 1 && level < view.t(), ErrorCode::malformed, "quantile level out of range");
    require(thresholds.size() >= level - 1, ErrorCode::malformed, "quantile level needs earlier thresholds");
    if (kernel == Kernel::aggregated) return quantile_aggregated(view, thresholds, level, eps, m, rng);
    return quantile_literal(view, thresholds, level, eps, m, rng, kernel);
}

WeightCounts weight_kernel(const StageView& view, std::span<const WeightKey> thresholds, unsigned filter_levels,
                           std::uint32_t cap, std::uint64_t m, Rng rng, Kernel kernel) {
    if (kernel == Kernel::aggregated) return weight_aggregated(view, thresholds, filter_levels, cap, m, rng);
    return weight_literal(view, thresholds, filter_levels, cap, m, rng, kernel);
}

TruncationTable::TruncationTable(const StageView& view, std::span<const WeightKey> thresholds, double eta)
    : view_(&view) {
    const unsigned t = view.t();
    const unsigned filter_levels = t >= 2 ? t - 2 : 0;
    const std::uint32_t cap = cap_miss(thresholds, t);
    const std::size_t atoms = view.atoms();
    windows_.resize(atoms);
    accept_.resize(atoms);
    cumulative_.resize(atoms);
    long double sum = 0.0L;
    for (std::size_t a = 0; a < atoms; ++a) {
        windows_[a] = view.window(a, thresholds, filter_levels);
        const std::uint32_t m = std::min(view.miss(a, t - 1), cap);
        accept_[a] = m >= cap ? 1.0 : std::exp(eta * (static_cast<double>(m) - cap));
        sum += static_cast<long double>(view.task().atom(a).mass) * windows_[a].fraction() * accept_[a];
        cumulative_[a] = static_cast<double>(sum);
    }
    acceptance_ = sum;
}

std::size_t TruncationTable::draw_accepted_atom(Rng& rng) const {
    require(acceptance_ > 0.0L, ErrorCode::rejection_budget_exceeded, "truncated distribution has no mass");
    const double u = rng.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    auto a = static_cast<std::size_t>(it - cumulative_.begin());
    while (a + 1 < cumulative_.size() && (a == 0 ? cumulative_[a] : cumulative_[a] - cumulative_[a - 1]) <= 0.0) ++a;
    return a;
}

}  // namespace mpcl
