#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mollify/errors.hpp"

namespace mollify {

namespace numtheory {

/// Default ceiling on sieve limits (about 1.4 GB of tables).
inline constexpr std::uint64_t kDefaultSieveCap = 80'000'000;

/// Multiplicative-function tables on [0, limit], built by a linear sieve.
/// Index 0 holds mu=0, lambda=0, phi=0, spf=0.
struct ArithTables {
  std::uint64_t limit = 0;
  std::vector<std::int8_t> mu;
  std::vector<double> lambda;
  std::vector<std::uint32_t> phi;
  std::vector<std::uint32_t> spf;
  std::vector<std::uint32_t> primes;

  bool covers(std::uint64_t n) const noexcept { return n <= limit; }
};

ArithTables sieve(std::uint64_t limit, std::uint64_t cap = kDefaultSieveCap);

/// Process-wide shared tables covering at least `limit`; regrown on demand.
std::shared_ptr<const ArithTables> shared_tables(std::uint64_t limit);

struct PrimePower {
  std::uint64_t p;
  unsigned e;
};

/// Trial division (with the sieve's spf when available).
std::vector<PrimePower> factorize(std::uint64_t n);
std::vector<std::uint64_t> divisors(std::uint64_t n);

int mobius(std::uint64_t n);
std::uint64_t euler_phi(std::uint64_t n);
double von_mangoldt(std::uint64_t n);
bool is_prime(std::uint64_t n);
bool squarefree(std::uint64_t n);

/// Sum over primes p | d of log p / (p - 1).
double eta(std::uint64_t d);

/// (mu * phi)(q) = sum over d | q of mu(d) phi(q/d).
std::int64_t mu_phi_conv(std::uint64_t q);

/// Number of even primitive characters modulo q.
std::uint64_t even_primitive_count(std::uint64_t q);

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m);
/// Inverse of a modulo m; throws DomainError when gcd(a, m) != 1.
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);

/// Smallest primitive root of an odd prime power p^e.
std::uint64_t primitive_root(std::uint64_t p, unsigned e);

}  // namespace numtheory
}  // namespace mollify
