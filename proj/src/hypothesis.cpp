#include "mpcl/hypothesis.hpp"

#include <numeric>

#include "mpcl/errors.hpp"

namespace mpcl {

bool MajorityHypothesis::eval(PointId x) const {
    std::size_t ones = 0;
    for (const auto& h : voters_) ones += h(x) ? 1 : 0;
    return 2 * ones >= voters_.size();
}

std::uint64_t MajorityHypothesis::repr_bits() const {
    return std::accumulate(voters_.begin(), voters_.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const Hypothesis& h) { return acc + h.repr_bits(); });
}

Hypothesis make_table(std::vector<std::uint8_t> labels) {
    return Hypothesis(std::make_shared<TableHypothesis>(std::move(labels)));
}

Hypothesis make_constant(std::uint64_t universe_size, std::uint8_t label) {
    return make_table(std::vector<std::uint8_t>(universe_size, label));
}

Hypothesis make_majority(std::vector<Hypothesis> voters) {
    require(!voters.empty(), ErrorCode::malformed, "majority vote needs at least one voter");
    return Hypothesis(std::make_shared<MajorityHypothesis>(std::move(voters)));
}

double empirical_loss(const Hypothesis& h, std::span<const LabeledExample> sample) {
    require(!sample.empty(), ErrorCode::empty_sample, "empirical loss of an empty sample");
    std::size_t errors = 0;
    for (const auto& ex : sample) errors += h.label(ex.point) != ex.label ? 1 : 0;
    return static_cast<double>(errors) / static_cast<double>(sample.size());
}

double distribution_loss(const Hypothesis& h, const TaskDistribution& task) {
    long double loss = 0.0L;
    for (const auto& a : task.atoms()) {
        if (h.label(a.point) != a.label) loss += a.mass;
    }
    return static_cast<double>(loss);
}

}  // namespace mpcl
