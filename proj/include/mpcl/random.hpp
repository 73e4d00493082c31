#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mpcl {

// Seeded generator handle. Every stochastic operation takes one explicitly.
// Child streams are derived by appending an index to the seed path, so a
// worker's stream depends only on (seed, path), never on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng derive(std::uint64_t stream) const;

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();
    bool bernoulli(double p);
    std::uint64_t below(std::uint64_t n);

    std::mt19937_64& engine() { return engine_; }
    const std::vector<std::uint32_t>& path() const { return path_; }

private:
    explicit Rng(std::vector<std::uint32_t> path);

    std::vector<std::uint32_t> path_;
    std::mt19937_64 engine_;
};

}  // namespace mpcl
