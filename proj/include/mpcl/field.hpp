#pragma once

#include <cstdint>

namespace mpcl {

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);

// Largest prime <= n, scanning down. Throws parameter if none exists.
std::uint64_t largest_prime_at_most(std::uint64_t n);
// Smallest prime >= n. Throws parameter on 64-bit overflow.
std::uint64_t smallest_prime_at_least(std::uint64_t n);

// Integers mod a prime p; elements are residues 0..p-1.
class PrimeField {
public:
    explicit PrimeField(std::uint64_t p);

    std::uint64_t modulus() const { return p_; }
    std::uint64_t reduce(std::uint64_t a) const { return a % p_; }
    std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
    std::uint64_t inv(std::uint64_t a) const;

private:
    std::uint64_t p_;
};

}  // namespace mpcl
