#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mollify/numtheory.hpp"

using namespace mollify;
using namespace mollify::numtheory;

namespace {

// Segmented Mobius sieve, written independently of the linear sieve.
long long mertens_segmented(std::uint64_t limit, std::uint64_t block) {
  const auto r = static_cast<std::uint64_t>(std::sqrt(double(limit))) + 1;
  std::vector<bool> comp(r + 1, false);
  std::vector<std::uint64_t> primes;
  for (std::uint64_t i = 2; i <= r; ++i) {
    if (comp[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= r; j += i) comp[j] = true;
  }
  long long total = 0;
  std::vector<long long> mu(block), rem(block);
  for (std::uint64_t lo = 1; lo <= limit; lo += block) {
    const std::uint64_t hi = std::min(limit, lo + block - 1);
    const std::size_t len = hi - lo + 1;
    for (std::size_t i = 0; i < len; ++i) {
      mu[i] = 1;
      rem[i] = static_cast<long long>(lo + i);
    }
    for (std::uint64_t p : primes) {
      for (std::uint64_t m = (lo + p - 1) / p * p; m <= hi; m += p) {
        const std::size_t i = m - lo;
        if ((m / p) % p == 0) mu[i] = 0;
        else mu[i] = -mu[i];
        rem[i] /= static_cast<long long>(p);
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (mu[i] != 0 && rem[i] > 1) mu[i] = -mu[i];
      total += mu[i];
    }
  }
  return total;
}

}  // namespace

TEST_CASE("sieve small values") {
  const auto t = sieve(30);
  CHECK(t.mu[30] == -1);
  CHECK(t.phi[30] == 8);
  CHECK(t.lambda[27] == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(t.lambda[30] == 0.0);
  CHECK(t.spf[21] == 3);

  const auto two = sieve(2);
  REQUIRE(two.mu.size() == 3);
  CHECK(two.mu[1] == 1);
  CHECK(two.mu[2] == -1);
  CHECK(two.phi[1] == 1);
  CHECK(two.phi[2] == 1);
}

TEST_CASE("sieve rejects bad limits") {
  CHECK_THROWS_AS(sieve(1), CapacityError);
  CHECK_THROWS_AS(sieve(1000, 100), CapacityError);
}

TEST_CASE("Mertens sum to 1e6 matches a segmented sieve") {
  const auto t = sieve(1'000'000);
  long long m = 0;
  for (std::uint64_t n = 1; n <= 1'000'000; ++n) m += t.mu[n];
  CHECK(m == mertens_segmented(1'000'000, 1 << 15));
  CHECK(m == 212);
}

TEST_CASE("table invariants") {
  const std::uint64_t N = 10'000;
  const auto t = sieve(N);
  std::vector<long long> musum(N + 1, 0), phisum(N + 1, 0);
  for (std::uint64_t d = 1; d <= N; ++d)
    for (std::uint64_t n = d; n <= N; n += d) {
      musum[n] += t.mu[d];
      phisum[n] += t.phi[d];
    }
  bool ok = true;
  for (std::uint64_t n = 1; n <= N; ++n) {
    ok = ok && musum[n] == (n == 1 ? 1 : 0) && phisum[n] == static_cast<long long>(n);
    if (n >= 2) {
      const auto p = t.spf[n];
      ok = ok && n % p == 0 && t.spf[p] == p;
      ok = ok && t.mu[n] == mobius(n) && t.phi[n] == euler_phi(n);
      ok = ok && std::abs(t.lambda[n] - von_mangoldt(n)) < 1e-15;
    }
  }
  CHECK(ok);
}

TEST_CASE("multiplicativity on coprime pairs") {
  bool phi_ok = true, eta_ok = true;
  for (std::uint64_t a = 1; a <= 100; ++a)
    for (std::uint64_t b = 1; a * b <= 10'000; ++b) {
      if (std::gcd(a, b) != 1) continue;
      phi_ok = phi_ok && euler_phi(a * b) == euler_phi(a) * euler_phi(b);
      eta_ok = eta_ok && std::abs(eta(a * b) - eta(a) - eta(b)) < 1e-12;
    }
  CHECK(phi_ok);
  CHECK(eta_ok);
}

TEST_CASE("eta") {
  CHECK(eta(1) == 0.0);
  CHECK(eta(12) == doctest::Approx(std::log(2.0) + std::log(3.0) / 2).epsilon(1e-14));
  CHECK(eta(36) == doctest::Approx(eta(4) + eta(9)).epsilon(1e-14));
  CHECK_THROWS_AS(eta(0), DomainError);
}

TEST_CASE("mu * phi") {
  CHECK(mu_phi_conv(5) == 3);
  CHECK(mu_phi_conv(1) == 1);
  CHECK(mu_phi_conv(8) == 2);
  for (std::uint64_t q = 1; q <= 500; ++q) {
    long long s = 0;
    for (auto d : divisors(q)) s += mobius(d) * static_cast<long long>(euler_phi(q / d));
    REQUIRE(mu_phi_conv(q) == s);
  }
}

TEST_CASE("modular helpers") {
  CHECK(invmod(3, 7) == 5);
  CHECK_THROWS_AS(invmod(2, 4), DomainError);
  CHECK(powmod(2, 10, 1000) == 24);
  for (std::uint64_t p : {3ull, 5ull, 7ull, 29ull, 101ull})
    for (unsigned e = 1; e <= 3; ++e) {
      std::uint64_t pe = 1;
      for (unsigned k = 0; k < e; ++k) pe *= p;
      const auto g = primitive_root(p, e);
      std::uint64_t x = 1, ord = 0;
      do {
        x = x * g % pe;
        ++ord;
      } while (x != 1);
      CHECK(ord == euler_phi(pe));
    }
}
