#include "mollify/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "mollify/errors.hpp"
#include "mollify/lvalues.hpp"
#include "mollify/numtheory.hpp"
#include "mollify/summation.hpp"

namespace mollify::asymptotics {

namespace nt = numtheory;

namespace {

constexpr double kLengthSlack = 1e-9;

bool le(double a, double b) { return a <= b * (1.0 + kLengthSlack); }

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

double qpow(const MainTermContext& c, double e) { return std::pow(double(c.q), e); }

void need_theta(const MainTermContext& c, double upper, const char* kind) {
  require(c.theta > 0 && c.theta < upper,
          std::string(kind) + " needs 0 < theta < " + (upper == 0.5 ? "1/2" : "1"));
}

void need_cross_lengths(const MainTermContext& c, const char* kind) {
  need_theta(c, 0.5, kind);
  require(c.eps0 > 0, std::string(kind) + " needs eps0 > 0");
  require(le(qpow(c, 2 * c.eps0), c.y1) && le(c.y1, qpow(c, c.theta)),
          std::string(kind) + " needs q^(2 eps0) <= y1 <= q^theta");
  require(le(c.y2, c.y1 * qpow(c, -c.eps0)), std::string(kind) + " needs y2 <= y1 q^-eps0");
}

void need_m2_lengths(const MainTermContext& c, const char* kind) {
  need_theta(c, 0.5, kind);
  require(le(c.y2, c.y1) && le(c.y1, qpow(c, c.theta)), std::string(kind) + " needs y2 <= y1 <= q^theta");
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> ps;
  for (const auto& pp : nt::factorize(n)) ps.push_back(pp.p);
  return ps;
}

bool coprime_to(std::uint64_t n, const std::vector<std::uint64_t>& ps) {
  for (auto p : ps)
    if (n % p == 0) return false;
  return true;
}

std::uint64_t tau(std::uint64_t n) { return nt::divisors(n).size(); }

}  // namespace

double c0() { return lvalues::digamma(0.25) - std::log(std::numbers::pi); }

double log_L(std::uint64_t q) {
  if (q == 0) throw DomainError("log_L needs q >= 1");
  return 0.5 * std::log(double(q) / std::numbers::pi) + 0.5 * lvalues::digamma(0.25) + lvalues::kEulerGamma +
         nt::eta(q);
}

MainTermContext MainTermContext::from_theta(std::uint64_t q, double theta, double eps0) {
  MainTermContext c;
  c.q = q;
  c.theta = theta;
  c.eps0 = eps0;
  c.y1 = std::pow(double(q), theta);
  c.y2 = c.y1 * std::pow(double(q), -eps0);
  return c;
}

double conrey_direct(double y, std::uint64_t j, std::uint64_t q, ConreyVariant v, const ConreyConfig& cfg) {
  if (!(y >= 2.0)) throw DomainError("Conrey sums need y >= 2");
  if (j == 0 || q == 0) throw DomainError("Conrey sums need j, q >= 1");
  if (double(j) > y) return 0.0;
  if (cfg.eps > 0 && double(j) > std::pow(y, 1.0 - cfg.eps)) throw DomainError("j exceeds y^(1 - eps)");
  const auto n_max = static_cast<std::uint64_t>(std::floor(y / double(j)));
  const auto tables = nt::shared_tables(std::max<std::uint64_t>(n_max, 2));
  const auto ps = prime_divisors(j * q);
  const double log_y = std::log(y);
  CompensatedSum<double> s;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const int mu = tables->mu[n];
    if (mu == 0 || !coprime_to(n, ps)) continue;
    double t = double(mu) / double(n) * (1.0 - std::log(double(j) * double(n)) / log_y);
    if (v == ConreyVariant::Log) t *= -std::log(double(n));
    s += t;
  }
  return s.value();
}

double conrey_main(double y, std::uint64_t j, std::uint64_t q, ConreyVariant v) {
  if (!(y >= 2.0)) throw DomainError("Conrey sums need y >= 2");
  if (j == 0 || q == 0) throw DomainError("Conrey sums need j, q >= 1");
  const std::uint64_t jq = j * q;
  const double base = double(jq) / (double(nt::euler_phi(jq)) * std::log(y));
  if (v == ConreyVariant::Plain) return base;
  return base * (std::log(y / double(j)) - 2.0 * lvalues::kEulerGamma - 2.0 * nt::eta(jq));
}

cd XTables::at(std::uint64_t u, std::uint64_t v) const {
  const auto it = X.find({u, v});
  return it == X.end() ? cd{} : it->second;
}

cd XTables::prime_at(std::uint64_t u, std::uint64_t v) const {
  const auto it = Xp.find({u, v});
  return it == Xp.end() ? cd{} : it->second;
}

XTables x_transform(const CoefMap& x, double y) {
  XTables t;
  t.y = y;
  for (const auto& [ab, val] : x) {
    if (val == cd{}) continue;
    const auto [A, B] = ab;
    if (!le(double(A) * double(B), y)) throw PreconditionError("coefficient support exceeds the length");
    const double AB = double(A) * double(B);
    const auto da = nt::divisors(A), db = nt::divisors(B);
    for (auto u : da)
      for (auto v : db) {
        t.X[{u, v}] += val / AB;
        t.Xp[{u, v}] += val / AB * std::log(AB / (double(u) * double(v)));
      }
  }
  return t;
}

namespace {

template <typename Fn>
void for_each_pair(double y, Fn&& fn) {
  for (std::uint64_t u = 1; le(double(u), y); ++u)
    for (std::uint64_t v = 1; le(double(u) * double(v), y); ++v) fn(u, v);
}

}  // namespace

CoefMap x_inverse(const XTables& t) {
  CoefMap out;
  for_each_pair(t.y, [&](std::uint64_t u, std::uint64_t v) {
    const double r = t.y / (double(u) * double(v));
    cd s{};
    for (std::uint64_t a = 1; le(double(a), r); ++a) {
      const int ma = nt::mobius(a);
      if (ma == 0) continue;
      for (std::uint64_t b = 1; le(double(a) * double(b), r); ++b) {
        const int mb = nt::mobius(b);
        if (mb != 0) s += double(ma * mb) * t.at(a * u, b * v);
      }
    }
    out[{u, v}] = s;
  });
  return out;
}

CoefMap xprime_by_lambda(const XTables& t) {
  CoefMap out;
  for_each_pair(t.y, [&](std::uint64_t u, std::uint64_t v) {
    const double r = t.y / (double(u) * double(v));
    cd s{};
    for (std::uint64_t c = 2; le(double(c), r); ++c) {
      const double lam = nt::von_mangoldt(c);
      if (lam != 0.0) s += lam * (t.at(c * u, v) + t.at(u, c * v));
    }
    out[{u, v}] = s;
  });
  return out;
}

void check_pair_support(const CoefMap& x, double y, std::uint64_t q, const char* which) {
  for (const auto& [ab, val] : x) {
    if (val == cd{}) continue;
    const auto [a, b] = ab;
    const std::string at = std::string(which) + " coefficient at (" + std::to_string(a) + "," + std::to_string(b) + ")";
    require(le(double(a) * double(b), y), at + " lies beyond the length");
    require(std::gcd(a, b) == 1, at + " violates (a,b) = 1; project first");
    require(std::gcd(a * b, q) == 1, at + " violates (ab,q) = 1; project first");
  }
}

cd psi_pair_main(std::uint64_t q, const CoefMap& x, double y1, const CoefMap& z, double y2) {
  check_pair_support(x, y1, q, "x");
  check_pair_support(z, y2, q, "z");
  const auto tx = x_transform(x, y1), tz = x_transform(z, y2);
  const double two_log_L = 2.0 * log_L(q);
  CompensatedSum<cd> s;
  for (const auto& [uv, Y] : tz.X) {
    const auto [u, v] = uv;
    if (!le(double(u) * double(v), y2)) continue;
    const cd X = tx.at(u, v), Xp = tx.prime_at(u, v), Yp = tz.prime_at(u, v);
    const double w = double(nt::euler_phi(u)) * double(nt::euler_phi(v));
    s += w * ((two_log_L + 2.0 * nt::eta(u * v)) * X * std::conj(Y) - (Xp * std::conj(Y) + X * std::conj(Yp)));
  }
  return double(nt::euler_phi(q)) * double(nt::even_primitive_count(q)) / double(q) * s.value();
}

DiagonalChain diagonal_chain(const CoefMap& z, double y) {
  const auto t = x_transform(z, y);
  const auto cmax = static_cast<std::uint64_t>(std::floor(y * (1 + kLengthSlack)));
  std::vector<double> prefix(cmax + 1, 0.0);
  for (std::uint64_t c = 2; c <= cmax; ++c) {
    const double lam = nt::von_mangoldt(c);
    prefix[c] = prefix[c - 1] + (lam != 0.0 ? lam / double(nt::euler_phi(c)) : 0.0);
  }
  CompensatedSum<cd> cross;
  CompensatedSum<double> norm, bound;
  for (const auto& [uv, Z] : t.X) {
    const auto [u, v] = uv;
    const double w = double(nt::euler_phi(u)) * double(nt::euler_phi(v));
    const double a2 = std::norm(Z);
    cross += w * Z * std::conj(t.prime_at(u, v));
    norm += w * a2;
    const auto r = static_cast<std::uint64_t>(std::floor(y / (double(u) * double(v)) * (1 + kLengthSlack)));
    bound += w * a2 * (2.0 * prefix[std::min(r, cmax)] + std::log(double(u)) + std::log(double(v)));
  }
  return {2.0 * std::abs(cross.value()), bound.value(), norm.value()};
}

cd diagonal_sum(const CoefMap& z, double y, std::uint64_t q, const std::function<double(std::uint64_t)>& f) {
  CompensatedSum<cd> s;
  for (const auto& [ab, val] : z) {
    const auto [A, B] = ab;
    if (val == cd{} || B == 0 || A % B != 0) continue;
    const std::uint64_t k = A / B;
    if (!le(double(k) * double(B) * double(B), y) || std::gcd(A, q) != 1) continue;
    s += f(k) * val / double(A);
  }
  return s.value();
}

const char* main_term_name(MainTermKind k) noexcept {
  switch (k) {
    case MainTermKind::IsFirst: return "is-first";
    case MainTermKind::IsCross: return "is-cross";
    case MainTermKind::IsSecond: return "is-second";
    case MainTermKind::NFirst: return "n-first";
    case MainTermKind::MvCross: return "mv-cross";
    case MainTermKind::MvSecond: return "mv-second";
    case MainTermKind::M1N: return "m1n";
    case MainTermKind::M2N: return "m2n";
    case MainTermKind::M2NFinal: return "m2n-final";
  }
  return "?";
}

MainTermKind main_term_from_name(const std::string& s) {
  for (auto k : {MainTermKind::IsFirst, MainTermKind::IsCross, MainTermKind::IsSecond, MainTermKind::NFirst,
                 MainTermKind::MvCross, MainTermKind::MvSecond, MainTermKind::M1N, MainTermKind::M2N,
                 MainTermKind::M2NFinal})
    if (s == main_term_name(k)) return k;
  throw ConfigError("unknown main-term kind '" + s + "'");
}

cd main_term(MainTermKind kind, const MainTermContext& c, const CoefMap& z) {
  if (c.q < 3) throw PreconditionError("main terms need q >= 3");
  require(c.y1 > 1 && c.y2 > 0, "main terms need y1 > 1 and y2 > 0");
  const double phi_plus = double(nt::even_primitive_count(c.q));
  const double log_y1 = std::log(c.y1);
  const double L = std::log(double(c.q)) / log_y1;
  const double C = c0() / log_y1;
  const auto x1 = [&] {
    const auto it = z.find({1, 1});
    return it == z.end() ? cd(1.0) : it->second;
  };
  const auto name = main_term_name(kind);
  switch (kind) {
    case MainTermKind::IsFirst:
      need_theta(c, 1.0, name);
      require(le(c.y1, qpow(c, c.theta)), std::string(name) + " needs y1 <= q^theta");
      return phi_plus;
    case MainTermKind::IsCross:
      need_cross_lengths(c, name);
      return std::conj(x1()) * (1.0 + L) * phi_plus;
    case MainTermKind::IsSecond:
      need_theta(c, 0.5, name);
      require(le(c.y1, qpow(c, c.theta)), std::string(name) + " needs y1 <= q^theta");
      return (1.0 + L) * phi_plus;
    case MainTermKind::NFirst:
      need_theta(c, 1.0, name);
      require(le(c.y2, qpow(c, c.theta)), std::string(name) + " needs y2 <= q^theta");
      return phi_plus * diagonal_sum(z, c.y2, c.q, [](std::uint64_t) { return 1.0; });
    case MainTermKind::MvCross:
      need_cross_lengths(c, name);
      need_m2_lengths(c, name);
      return phi_plus * diagonal_sum(z, c.y2, c.q, [&](std::uint64_t) { return 2.0 + L + C; });
    case MainTermKind::MvSecond:
      need_theta(c, 0.5, name);
      require(le(c.y1, qpow(c, c.theta)), std::string(name) + " needs y1 <= q^theta");
      return (4.0 + 2.0 * L) * phi_plus;
    case MainTermKind::M1N: {
      need_cross_lengths(c, name);
      CoefMap zc;
      for (const auto& [k, v] : z) zc.emplace(k, std::conj(v));
      return phi_plus * diagonal_sum(zc, c.y2, c.q, [&](std::uint64_t k) {
               return 1.0 + L - std::log(double(k)) / log_y1 + C;
             });
    }
    case MainTermKind::M2N:
    case MainTermKind::M2NFinal:
      need_m2_lengths(c, name);
      return phi_plus *
             diagonal_sum(z, c.y2, c.q, [&](std::uint64_t k) { return 1.0 + std::log(double(k)) / log_y1; });
  }
  throw PreconditionError("unknown main-term kind");
}

cd m2n_unsimplified(const MainTermContext& c, const CoefMap& z) {
  need_m2_lengths(c, "m2n");
  const double log_y1 = std::log(c.y1);
  CompensatedSum<cd> s;
  for (const auto& [ab, val] : z) {
    const auto [A, b0] = ab;
    if (val == cd{} || b0 == 0 || A % b0 != 0 || std::gcd(A, c.q) != 1) continue;
    const std::uint64_t m = A / b0;  // = b2 l1 n
    if (!le(double(m) * double(b0) * double(b0), c.y2)) continue;
    double inner = 0.0;
    for (auto b2 : nt::divisors(m)) {
      const int mu = nt::mobius(b2);
      if (mu == 0 || !le(double(b2), c.y1)) continue;
      inner += mu * (1.0 - std::log(double(b2)) / log_y1) * double(tau(m / b2));
    }
    s += inner * val / double(A);
  }
  return double(nt::even_primitive_count(c.q)) * s.value();
}

cd weighted_average(std::uint64_t Q, const moments::Weight& w, const std::function<cd(std::uint64_t)>& f) {
  if (Q < 3) throw DomainError("Q must be at least 3");
  moments::validate_weight(w);
  CompensatedSum<cd> num;
  CompensatedSum<double> den;
  for (std::uint64_t q = (Q + 1) / 2; q <= 2 * Q; ++q) {
    const double phi = w.phi(double(q) / double(Q));
    const std::uint64_t count = nt::even_primitive_count(q);
    if (phi == 0.0 || count == 0) continue;
    const double wq = phi * double(q) / double(nt::euler_phi(q));
    num += wq * f(q);
    den += wq * double(count);
  }
  return den.value() == 0.0 ? cd{} : num.value() / den.value();
}

Comparison compare(double brute, double main) {
  double rel;
  if (main != 0.0)
    rel = std::abs(brute - main) / std::abs(main);
  else
    rel = brute == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return {brute, main, rel};
}

std::string comparison_csv_header() { return "kind,q,y1,y2,brute,main,rel_dev"; }

std::string comparison_csv_row(const std::string& kind, std::uint64_t q, double y1, double y2, const Comparison& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%llu,%.17g,%.17g,%.17g,%.17g,%.17g", static_cast<unsigned long long>(q), y1, y2,
                c.brute, c.main, c.rel_dev);
  return kind + buf;
}

UnbalancedPrediction unbalanced_predict(double theta1, double theta2) {
  if (!(theta2 > 0 && theta2 <= theta1 && theta1 < 0.5))
    throw DomainError("unbalanced mollifier needs 0 < theta2 <= theta1 < 1/2");
  UnbalancedPrediction p;
  p.alpha_opt = theta2 / theta1;
  p.moments.psi_m = 1.0;
  p.moments.psi_n = 1.0;
  p.moments.psi_mm = 1.0 + 1.0 / theta1;
  p.moments.psi_mn = 1.0;
  p.moments.psi_nn = 1.0 + 1.0 / theta2;
  p.moments.provenance = Provenance::MainTerm;
  p.moments.label = "unbalanced template";
  return p;
}

double unbalanced_gain(std::uint64_t q, double theta1, double theta2, double eps1, const CoefMap& x) {
  if (!(theta2 > 0 && theta2 <= theta1 && theta1 < 0.5))
    throw DomainError("unbalanced mollifier needs 0 < theta2 <= theta1 < 1/2");
  if (!(eps1 >= 0)) throw DomainError("eps1 must be nonnegative");
  if (q < 3) throw DomainError("q must be at least 3");
  const double lq = std::log(double(q));
  const double Y = std::exp((theta1 - eps1) * lq), lo = std::exp(theta2 * lq);
  const double alpha = theta2 / theta1;
  CompensatedSum<double> s;
  for (const auto& [ab, val] : x) {
    if (val.imag() != 0.0) throw PreconditionError("unbalanced gain needs real coefficients");
    const auto [A, b0] = ab;
    if (val == cd{} || b0 == 0 || A % b0 != 0 || std::gcd(A, q) != 1) continue;
    const std::uint64_t m = A / b0;
    if (!le(double(m) * double(b0) * double(b0), Y)) continue;
    double inner = 0.0;
    for (auto b2 : nt::divisors(m)) {
      const int mu = nt::mobius(b2);
      if (mu == 0 || !(double(b2) > lo) || !le(double(b2), Y)) continue;
      inner += mu * (1.0 - std::log(double(b2)) / (theta2 * lq)) * double(tau(m / b2));
    }
    s += inner * val.real() / double(A);
  }
  const double pp = double(nt::even_primitive_count(q));
  return -alpha * (1.0 + alpha) * pp * pp * s.value();
}

}  // namespace mollify::asymptotics
