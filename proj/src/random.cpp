#include "mpcl/random.hpp"

namespace mpcl {

namespace {

std::mt19937_64 seeded_engine(const std::vector<std::uint32_t>& path) {
    std::seed_seq seq(path.begin(), path.end());
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed)
    : Rng(std::vector<std::uint32_t>{static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32)}) {}

Rng::Rng(std::vector<std::uint32_t> path) : path_(std::move(path)), engine_(seeded_engine(path_)) {}

Rng Rng::derive(std::uint64_t stream) const {
    auto child = path_;
    // Separator keeps (a, b) and (a | b<<32) paths distinct.
    child.push_back(0x9e3779b9u);
    child.push_back(static_cast<std::uint32_t>(stream));
    child.push_back(static_cast<std::uint32_t>(stream >> 32));
    return Rng(std::move(child));
}

double Rng::uniform01() {
    // 53 random mantissa bits, in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform01() < p;
}

std::uint64_t Rng::below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

}  // namespace mpcl
