#include "mollify/numtheory.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

namespace mollify::numtheory {

ArithTables sieve(std::uint64_t limit, std::uint64_t cap) {
  if (limit < 2) throw CapacityError("sieve limit must be at least 2");
  if (limit > cap)
    throw CapacityError("sieve limit " + std::to_string(limit) + " exceeds cap " +
                        std::to_string(cap));
  ArithTables t;
  t.limit = limit;
  const std::size_t n = static_cast<std::size_t>(limit) + 1;
  t.mu.assign(n, 0);
  t.lambda.assign(n, 0.0);
  t.phi.assign(n, 0);
  t.spf.assign(n, 0);
  if (limit >= 1) {
    t.mu[1] = 1;
    t.phi[1] = 1;
  }
  t.primes.reserve(limit > 100 ? static_cast<std::size_t>(1.2 * limit / std::log(double(limit))) : 32);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (t.spf[i] == 0) {
      t.spf[i] = static_cast<std::uint32_t>(i);
      t.mu[i] = -1;
      t.phi[i] = static_cast<std::uint32_t>(i - 1);
      t.primes.push_back(static_cast<std::uint32_t>(i));
    }
    const std::uint32_t pi = t.spf[i];
    for (std::uint32_t p : t.primes) {
      if (p > pi) break;
      const std::uint64_t m = i * p;
      if (m > limit) break;
      t.spf[m] = p;
      if (p == pi) {
        t.mu[m] = 0;
        t.phi[m] = t.phi[i] * p;
      } else {
        t.mu[m] = static_cast<std::int8_t>(-t.mu[i]);
        t.phi[m] = t.phi[i] * (p - 1);
      }
    }
  }
  // Lambda: mark prime powers.
  for (std::uint32_t p : t.primes) {
    const double lp = std::log(double(p));
    for (std::uint64_t pk = p; pk <= limit; pk *= p) {
      t.lambda[pk] = lp;
      if (pk > limit / p) break;
    }
  }
  return t;
}

namespace {
std::mutex g_tables_mutex;
std::shared_ptr<const ArithTables> g_tables;
}  // namespace

std::shared_ptr<const ArithTables> shared_tables(std::uint64_t limit) {
  std::lock_guard<std::mutex> lock(g_tables_mutex);
  if (!g_tables || g_tables->limit < limit) {
    std::uint64_t target = std::max<std::uint64_t>(limit, 1u << 16);
    if (g_tables) target = std::max(target, 2 * g_tables->limit);
    target = std::min(target, std::max(limit, kDefaultSieveCap));
    g_tables = std::make_shared<const ArithTables>(sieve(target));
  }
  return g_tables;
}

namespace {
std::shared_ptr<const ArithTables> small_tables() {
  static const auto t = shared_tables(1u << 16);
  return t;
}
}  // namespace

std::vector<PrimePower> factorize(std::uint64_t n) {
  if (n == 0) throw DomainError("factorize(0)");
  std::vector<PrimePower> out;
  auto push = [&](std::uint64_t p) {
    if (!out.empty() && out.back().p == p)
      ++out.back().e;
    else
      out.push_back({p, 1});
  };
  const auto t = small_tables();
  std::uint64_t m = n;
  for (std::uint32_t p : t->primes) {
    if (std::uint64_t(p) * p > m) break;
    while (m % p == 0) {
      push(p);
      m /= p;
    }
  }
  if (m > 1) {
    // Remaining cofactor: prime unless it exceeds the square of the table range.
    for (std::uint64_t d = t->limit + 1; d * d <= m; ++d) {
      while (m % d == 0) {
        push(d);
        m /= d;
      }
    }
    if (m > 1) push(m);
  }
  return out;
}

std::vector<std::uint64_t> divisors(std::uint64_t n) {
  std::vector<std::uint64_t> d{1};
  for (auto [p, e] : factorize(n)) {
    const std::size_t base = d.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) d.push_back(d[i] * pk);
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

int mobius(std::uint64_t n) {
  if (n == 0) return 0;
  int s = 1;
  for (auto [p, e] : factorize(n)) {
    if (e > 1) return 0;
    s = -s;
  }
  return s;
}

std::uint64_t euler_phi(std::uint64_t n) {
  if (n == 0) return 0;
  std::uint64_t r = n;
  for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

double von_mangoldt(std::uint64_t n) {
  if (n < 2) return 0.0;
  auto f = factorize(n);
  return f.size() == 1 ? std::log(double(f[0].p)) : 0.0;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  auto f = factorize(n);
  return f.size() == 1 && f[0].e == 1;
}

bool squarefree(std::uint64_t n) { return mobius(n) != 0; }

double eta(std::uint64_t d) {
  if (d == 0) throw DomainError("eta(0)");
  double s = 0.0;
  for (auto [p, e] : factorize(d)) s += std::log(double(p)) / double(p - 1);
  return s;
}

std::int64_t mu_phi_conv(std::uint64_t q) {
  if (q == 0) throw DomainError("mu_phi_conv(0)");
  // Multiplicative: at p^e the value is p^e - 2 p^(e-1) + p^(e-2).
  std::int64_t r = 1;
  for (auto [p, e] : factorize(q)) {
    const std::int64_t P = static_cast<std::int64_t>(p);
    std::int64_t pk2 = 1;
    for (unsigned k = 2; k < e; ++k) pk2 *= P;
    std::int64_t v;
    if (e == 1)
      v = P - 2;
    else
      v = pk2 * (P * P - 2 * P + 1);
    r *= v;
  }
  return r;
}

std::uint64_t even_primitive_count(std::uint64_t q) {
  if (q == 0) throw DomainError("even_primitive_count(0)");
  if (q == 1) return 1;
  const std::int64_t star = mu_phi_conv(q);
  const std::int64_t corr = mobius(q) + (q % 2 == 0 ? mobius(q / 2) : 0);
  return static_cast<std::uint64_t>((star + corr) / 2);
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  if (m == 1) return 0;
  std::int64_t t = 0, nt = 1;
  std::int64_t r = static_cast<std::int64_t>(m), nr = static_cast<std::int64_t>(a % m);
  while (nr != 0) {
    const std::int64_t qq = r / nr;
    t -= qq * nt;
    std::swap(t, nt);
    r -= qq * nr;
    std::swap(r, nr);
  }
  if (r != 1) throw DomainError("invmod: " + std::to_string(a) + " not invertible mod " + std::to_string(m));
  if (t < 0) t += static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(t);
}

std::uint64_t primitive_root(std::uint64_t p, unsigned e) {
  if (p == 2 || e == 0) throw DomainError("primitive_root needs an odd prime power");
  const auto fac = factorize(p - 1);
  std::uint64_t g = 2;
  for (;; ++g) {
    bool ok = true;
    for (auto [r, k] : fac)
      if (powmod(g, (p - 1) / r, p) == 1) {
        ok = false;
        break;
      }
    if (ok) break;
  }
  if (e >= 2 && powmod(g, p - 1, p * p) == 1) g += p;
  return g;
}

}  // namespace mollify::numtheory
