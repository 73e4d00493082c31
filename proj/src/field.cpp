#include "mpcl/field.hpp"

#include <limits>
#include <string>

#include "mpcl/errors.hpp"

namespace mpcl {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1U) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1U;
    }
    return result;
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    constexpr std::uint64_t kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (auto w : kWitnesses) {
        if (n % w == 0) return n == w;
    }
    std::uint64_t d = n - 1;
    unsigned s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    for (auto a : kWitnesses) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t largest_prime_at_most(std::uint64_t n) {
    for (std::uint64_t c = n; c >= 2; --c) {
        if (is_prime(c)) return c;
    }
    fail(ErrorCode::parameter, "no prime <= " + std::to_string(n));
}

std::uint64_t smallest_prime_at_least(std::uint64_t n) {
    for (std::uint64_t c = n < 2 ? 2 : n; c != 0; ++c) {
        if (is_prime(c)) return c;
    }
    fail(ErrorCode::parameter, "no 64-bit prime >= " + std::to_string(n));
}

PrimeField::PrimeField(std::uint64_t p) : p_(p) {
    require(is_prime(p), ErrorCode::parameter, std::to_string(p) + " is not prime");
}

std::uint64_t PrimeField::add(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>((static_cast<u128>(a) + b) % p_);
}

std::uint64_t PrimeField::sub(std::uint64_t a, std::uint64_t b) const {
    return add(a, p_ - b % p_);
}

std::uint64_t PrimeField::mul(std::uint64_t a, std::uint64_t b) const { return mulmod(a, b, p_); }

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t exp) const { return powmod(base, exp, p_); }

std::uint64_t PrimeField::inv(std::uint64_t a) const {
    require(a % p_ != 0, ErrorCode::parameter, "zero has no inverse");
    return powmod(a, p_ - 2, p_);
}

}  // namespace mpcl
