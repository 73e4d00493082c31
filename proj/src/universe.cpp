#include "mpcl/universe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "mpcl/errors.hpp"

namespace mpcl {

unsigned description_bits(std::uint64_t universe_size) {
    if (universe_size <= 2) return 1;
    return static_cast<unsigned>(std::bit_width(universe_size - 1));
}

TaskDistribution::TaskDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    require(!atoms_.empty(), ErrorCode::invalid_distribution, "task distribution has empty support");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(atoms_.size());
    cumulative_.reserve(atoms_.size());
    long double sum = 0.0L;
    for (const auto& a : atoms_) {
        require(std::isfinite(a.mass) && a.mass >= 0.0, ErrorCode::invalid_distribution,
                "mass of point " + std::to_string(a.point.value) + " is negative or not finite");
        require(a.label <= 1, ErrorCode::invalid_distribution, "label must be 0 or 1");
        require(seen.insert(a.point.value).second, ErrorCode::invalid_distribution,
                "point " + std::to_string(a.point.value) + " appears twice in one task");
        sum += a.mass;
        cumulative_.push_back(static_cast<double>(sum));
    }
    total_ = static_cast<double>(sum);
    require(std::fabs(total_ - 1.0) <= kMassTolerance, ErrorCode::invalid_distribution,
            "task masses sum to " + std::to_string(total_) + ", expected 1");
}

TaskDistribution TaskDistribution::uniform(std::span<const PointId> points, std::uint8_t label) {
    std::vector<Atom> atoms;
    atoms.reserve(points.size());
    const double mass = 1.0 / static_cast<double>(points.size());
    for (auto p : points) atoms.push_back({p, label, mass});
    return TaskDistribution(std::move(atoms));
}

std::size_t TaskDistribution::draw_atom(Rng& rng) const {
    const double u = rng.uniform01() * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    auto index = static_cast<std::size_t>(it - cumulative_.begin());
    // Skip zero-mass atoms that share a cumulative value with their successor.
    while (atoms_[index].mass == 0.0 && index + 1 < atoms_.size()) ++index;
    return index;
}

LabeledExample TaskDistribution::draw(Rng& rng) const {
    const auto& a = atoms_[draw_atom(rng)];
    return {a.point, a.label, rng.next_u64()};
}

}  // namespace mpcl
