#include "pooldesign/number_theory.hpp"

#include <limits>

#include "pooldesign/error.hpp"

namespace pooldesign::nt {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d <= n / d; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (is_prime(n)) out.push_back(n);
  }
  return out;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; out.size() < count; ++n) {
    if (is_prime(n)) out.push_back(n);
  }
  return out;
}

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (a != 0 && b > kMax / a) return kMax;
  return a * b;
}

std::uint64_t pow_sat(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) r = mul_sat(r, base);
  return r;
}

std::uint64_t ceil_root(std::uint64_t value, unsigned n) {
  if (n == 0) throw InputError("root order must be positive");
  std::uint64_t l = 1;
  while (pow_sat(l, n) < value) ++l;
  return l;
}

int ceil_log(std::uint64_t value, std::uint64_t base) {
  if (base < 2) throw InputError("logarithm base must be at least 2");
  int k = 0;
  std::uint64_t p = 1;
  while (p < value) {
    p = mul_sat(p, base);
    ++k;
  }
  return k;
}

int compressing_power(std::uint64_t q, std::uint64_t samples) {
  if (q < 2) throw InputError("compressing power needs q >= 2");
  int gamma = 0;
  std::uint64_t p = q;  // q^(gamma+1)
  while (p <= samples) {
    p = mul_sat(p, q);
    ++gamma;
  }
  return gamma;
}

}  // namespace pooldesign::nt
