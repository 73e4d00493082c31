#include "mpcl/learner/subroutines.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mpcl/errors.hpp"

namespace mpcl {

Thresholds estimate_quantile(const StageView& view, const LearnerParams& params, const Rng& rng, Kernel kernel,
                             Charge charge) {
    const unsigned t = view.t();
    const double eps = params.epsilon_t(t);
    const std::uint64_t m1 = params.m1();
    Thresholds out;
    out.reserve(t > 0 ? t - 1 : 0);
    for (unsigned tau = 1; tau < t; ++tau) {
        const auto draw = quantile_kernel(view, out, tau, eps, m1, rng.derive(tau), kernel);
        charge.samples(m1);
        if (charge.ledger) {
            const std::uint64_t key_bits = params.b() + 64 + 32;
            charge.ledger->note_scratch(quantile_rank(eps, m1) * key_bits);
        }
        require(2 * draw.kept >= m1, ErrorCode::quantile_sample_depleted,
                "level " + std::to_string(tau) + " kept " + std::to_string(draw.kept) + " of " +
                    std::to_string(m1) + " samples");
        out.push_back(draw.threshold);
    }
    return out;
}

double weight_from_counts(const LearnerParams& params, const WeightCounts& counts, std::uint64_t m) {
    long double sum = 0.0L;
    for (std::size_t v = 0; v < counts.by_value.size(); ++v) {
        if (counts.by_value[v] == 0) continue;
        sum += static_cast<long double>(counts.by_value[v]) * std::exp(static_cast<long double>(params.eta()) * v);
    }
    return static_cast<double>(sum / static_cast<long double>(m));
}

double estimate_weight(const StageView& view, const LearnerParams& params, std::span<const WeightKey> thresholds,
                       const Rng& rng, Kernel kernel, Charge charge) {
    const unsigned t = view.t();
    const unsigned filter_levels = t >= 2 ? t - 2 : 0;
    const std::uint32_t cap = cap_miss(thresholds, t);
    const auto counts = weight_kernel(view, thresholds, filter_levels, cap, params.m2(), rng, kernel);
    charge.samples(params.m2());
    return weight_from_counts(params, counts, params.m2());
}

LabeledExample truncated_rejection_sample(const TruncationTable& table, Rng& rng, std::uint64_t attempt_budget,
                                          Charge charge) {
    const auto& task = table.view().task();
    for (std::uint64_t attempt = 1; attempt <= attempt_budget; ++attempt) {
        const std::size_t a = task.draw_atom(rng);
        const std::uint64_t tag = rng.next_u64();
        charge.samples(1);
        if (table.window(a).admits(tag)) {
            const double p = table.accept(a);
            if (p >= 1.0 || rng.uniform01() < p) {
                const auto& atom = task.atom(a);
                return {atom.point, atom.label, tag};
            }
        }
        charge.rejections(1);
    }
    fail(ErrorCode::rejection_budget_exceeded,
         "no acceptance within " + std::to_string(attempt_budget) + " attempts");
}

LabeledExample truncated_direct_sample(const TruncationTable& table, Rng& rng, std::uint64_t attempt_budget,
                                       Charge charge) {
    const long double p = table.acceptance_mass();
    std::uint64_t attempts = attempt_budget + 1;
    if (p >= 1.0L) {
        attempts = 1;
    } else if (p > 0.0L) {
        std::geometric_distribution<long long> failures(static_cast<double>(p));
        const auto f = static_cast<std::uint64_t>(failures(rng.engine()));
        if (f < attempt_budget) attempts = f + 1;
    }
    if (attempts > attempt_budget) {
        charge.samples(attempt_budget);
        charge.rejections(attempt_budget);
        fail(ErrorCode::rejection_budget_exceeded,
             "no acceptance within " + std::to_string(attempt_budget) + " attempts");
    }
    charge.samples(attempts);
    charge.rejections(attempts - 1);
    const std::size_t a = table.draw_accepted_atom(rng);
    const auto& window = table.window(a);
    const std::uint64_t tag = window.full ? rng.next_u64() : rng.below(window.limit);
    const auto& atom = table.view().task().atom(a);
    return {atom.point, atom.label, tag};
}

}  // namespace mpcl
