#pragma once

#include <cstdint>
#include <vector>

namespace pooldesign::nt {

/// Deterministic trial division.
bool is_prime(std::uint64_t n);

/// All primes p with p <= limit, ascending.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

/// First `count` primes.
std::vector<std::uint64_t> first_primes(std::size_t count);

/// base^exp saturated at UINT64_MAX.
std::uint64_t pow_sat(std::uint64_t base, unsigned exp);

/// a*b saturated at UINT64_MAX.
std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b);

/// Smallest L with L^n >= value (exact integer arithmetic).
std::uint64_t ceil_root(std::uint64_t value, unsigned n);

/// Smallest k with base^k >= value (value >= 1).
int ceil_log(std::uint64_t value, std::uint64_t base);

/// Compressing power: smallest gamma with q^(gamma+1) > samples.
int compressing_power(std::uint64_t q, std::uint64_t samples);

}  // namespace pooldesign::nt
