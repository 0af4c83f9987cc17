#include "mollify/lvalues.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mollify/summation.hpp"

namespace mollify::lvalues {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLogPi = std::log(kPi);

using ld = long double;
using cld = std::complex<ld>;
constexpr ld kPiL = std::numbers::pi_v<ld>;
const ld kLogPiL = std::log(kPiL);

// B_{2k}, k = 1..8
constexpr ld kB2k[] = {1.0L / 6,  -1.0L / 30,       1.0L / 42, -1.0L / 30,
                       5.0L / 66, -691.0L / 2730, 7.0L / 6,  -3617.0L / 510};

template <typename R>
std::complex<R> stirling(std::complex<R> z) {
  static const R half_log_2pi = R(0.5) * std::log(2 * std::numbers::pi_v<R>);
  std::complex<R> r = (z - R(0.5)) * std::log(z) - z + half_log_2pi;
  const std::complex<R> z2 = R(1) / (z * z);
  std::complex<R> zp = R(1) / z;
  for (int k = 1; k <= 8; ++k) {
    r += R(kB2k[k - 1]) / R(2 * k * (2 * k - 1)) * zp;
    zp *= z2;
  }
  return r;
}

template <typename R>
std::complex<R> log_gamma_t(std::complex<R> z) {
  const R pi = std::numbers::pi_v<R>;
  if (z.real() < R(0.5)) {
    if (z.imag() == 0 && z.real() == std::floor(z.real())) throw DomainError("log_gamma at a non-positive integer");
    return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma_t<R>(R(1) - z);
  }
  std::complex<R> shift = 0;
  while (std::abs(z) < R(15)) {
    shift += std::log(z);
    z += R(1);
  }
  return stirling<R>(z) - shift;
}

template <typename R>
std::complex<R> kernel_g_t(std::complex<R> s) {
  const std::complex<R> s2 = s * s;
  std::complex<R> g = 1;
  for (int m = 0; m <= 4; ++m) {
    const R r = R(0.5) + R(2 * m);
    const std::complex<R> f = R(1) - s2 / (r * r);
    g *= m == 0 ? f * f : f;
  }
  return g;
}

const double kLogGammaQuarter = std::lgamma(0.25);
const ld kLogGammaQuarterL = std::lgamma(0.25L);

}  // namespace

cd log_gamma(cd z) { return log_gamma_t<double>(z); }

cd gamma(cd z) { return std::exp(log_gamma(z)); }

double digamma(double x) {
  if (x <= 0.0) {
    if (x == std::floor(x)) throw DomainError("digamma at a non-positive integer");
    return digamma(1.0 - x) - kPi / std::tan(kPi * x);
  }
  double shift = 0.0;
  while (x < 12.0) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double x2 = 1.0 / (x * x);
  double r = std::log(x) - 0.5 / x;
  double xp = x2;
  for (int k = 1; k <= 8; ++k) {
    r -= double(kB2k[k - 1]) / double(2 * k) * xp;
    xp *= x2;
  }
  return r - shift;
}

namespace {
constexpr int kHurwitzN = 30;
// B_{2k}/(2k)!, k = 1..6
constexpr double kB2kFact[] = {1.0 / 12, -1.0 / 720, 1.0 / 30240, -1.0 / 1209600,
                               1.0 / 47900160, -691.0 / 1307674368000.0};
}  // namespace

cd hurwitz_zeta(cd s, double a) {
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta needs a > 0");
  if (s == cd(1.0, 0.0)) throw DomainError("hurwitz_zeta has a pole at s = 1");
  CompensatedSum<cd> acc;
  for (int n = 0; n < kHurwitzN; ++n) acc += std::exp(-s * std::log(n + a));
  const double b = kHurwitzN + a;
  const double lb = std::log(b);
  const cd bs = std::exp(-s * lb);
  acc += b * bs / (s - 1.0);
  acc += 0.5 * bs;
  cd term = s * bs / b;
  acc += kB2kFact[0] * term;
  for (int k = 2; k <= 6; ++k) {
    term *= (s + double(2 * k - 3)) * (s + double(2 * k - 2)) / (b * b);
    acc += kB2kFact[k - 1] * term;
  }
  return acc.value();
}

double hurwitz_zeta(double s, double a) {
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta needs a > 0");
  if (s == 1.0) throw DomainError("hurwitz_zeta has a pole at s = 1");
  CompensatedSum<double> acc;
  for (int n = 0; n < kHurwitzN; ++n) acc += std::pow(n + a, -s);
  const double b = kHurwitzN + a;
  const double bs = std::pow(b, -s);
  acc += b * bs / (s - 1.0);
  acc += 0.5 * bs;
  double term = s * bs / b;
  acc += kB2kFact[0] * term;
  for (int k = 2; k <= 6; ++k) {
    term *= (s + 2 * k - 3) * (s + 2 * k - 2) / (b * b);
    acc += kB2kFact[k - 1] * term;
  }
  return acc.value();
}

cd kernel_g(cd s) { return kernel_g_t<double>(s); }

MellinKernel::MellinKernel(KernelKind kind, KernelConfig cfg) : kind_(kind), cfg_(cfg) {
  const double c = cfg_.contour;
  if (!(c > 0.0)) throw DomainError("kernel contour must lie right of 0");
  if (!(cfg_.step > 0.0) || !(cfg_.height > 0.0)) throw ConfigError("kernel step and height must be positive");
  if (kind_ == KernelKind::F) {
    if (!(c < kKernelStripA + 2.0)) throw DomainError("F contour must satisfy Re s < 10.5");
    const double m = (c - 0.5) / 2.0;
    if (m == std::floor(m)) throw DomainError("F contour passes through a removable singularity");
  }
  const auto J = static_cast<std::size_t>(std::llround(cfg_.height / cfg_.step));
  t_.resize(J + 1);
  w_.resize(J + 1);
  for (std::size_t j = 0; j <= J; ++j) {
    const ld t = ld(j) * ld(cfg_.step);
    t_[j] = t;
    w_[j] = (j == 0 ? 0.5L : 1.0L) * ld(cfg_.step) / kPiL * integrand_ld(cld(c, t));
  }
}

cd MellinKernel::integrand(cd s) const {
  const cld v = integrand_ld(cld(s.real(), s.imag()));
  return {double(v.real()), double(v.imag())};
}

// Extended precision: at small x the factor x^-c amplifies rounding in the weights by up to 1e6.
std::complex<long double> MellinKernel::integrand_ld(std::complex<long double> s) const {
  const cld a = s / 2.0L + 0.25L;
  cld lg;
  cld g = 1.0L;
  switch (kind_) {
    case KernelKind::V1:
      lg = log_gamma_t<ld>(a) - kLogGammaQuarterL - s / 2.0L * kLogPiL;
      if (cfg_.v1_uses_g) g = kernel_g_t<ld>(s);
      break;
    case KernelKind::V2:
      lg = 2.0L * log_gamma_t<ld>(a) - 2.0L * kLogGammaQuarterL - s * kLogPiL;
      g = kernel_g_t<ld>(s);
      break;
    case KernelKind::F:
      lg = log_gamma_t<ld>(a) + log_gamma_t<ld>(0.5L - a) - 2.0L * kLogGammaQuarterL;
      g = kernel_g_t<ld>(s);
      break;
  }
  return std::exp(lg) * g / s;
}

double MellinKernel::operator()(double x) const {
  if (!(x > 0.0)) throw DomainError("kernel argument must be positive");
  const ld lx = std::log(ld(x));
  // e^{i t_j log x} by rotation, re-anchored every 64 nodes to bound drift.
  const cld step = std::polar(1.0L, ld(cfg_.step) * lx);
  cld rot;
  ld acc = 0;
  for (std::size_t j = 0; j < t_.size(); ++j) {
    if (j % 64 == 0) rot = std::polar(1.0L, t_[j] * lx);
    acc += w_[j].real() * rot.real() + w_[j].imag() * rot.imag();
    rot *= step;
  }
  return double(std::exp(-ld(cfg_.contour) * lx) * acc);
}

double kernel_v1(double x, const KernelConfig& cfg) { return MellinKernel(KernelKind::V1, cfg)(x); }
double kernel_v2(double x, const KernelConfig& cfg) { return MellinKernel(KernelKind::V2, cfg)(x); }
double kernel_f(double x, const KernelConfig& cfg) { return MellinKernel(KernelKind::F, cfg)(x); }

double v1_tail_bound(double x) {
  const double X = kPi * x * x;
  return std::pow(X, -0.75) * std::exp(-X - kLogGammaQuarter);
}

std::vector<double> afe_weights(std::uint64_t q, const AfeConfig& cfg) {
  if (q < 3) throw DomainError("afe_weights needs q >= 3");
  if (cfg.kernel.v1_uses_g) throw ConfigError("the AFE truncation bound assumes G1 = 1");
  double x = 1.0;
  while (v1_tail_bound(x) > cfg.tail_tolerance) x += 0.01;
  const double sq = std::sqrt(double(q));
  const double nmax = std::ceil(x * sq);
  if (nmax > double(cfg.max_terms))
    throw ConfigError("AFE needs " + std::to_string(nmax) + " terms, above the budget");
  const auto N = static_cast<std::uint64_t>(nmax);
  const MellinKernel v1(KernelKind::V1, cfg.kernel);
  std::vector<double> w(N + 1, 0.0);
  for (std::uint64_t n = 1; n <= N; ++n) w[n] = v1(double(n) / sq) / std::sqrt(double(n));
  return w;
}

cd l_value_afe(const characters::DirichletCharacter& chi, cd eps, const std::vector<double>& w) {
  if (!chi.primitive() || !chi.even()) throw PreconditionError("AFE requires an even primitive character");
  CompensatedSum<cd> s;
  const auto& g = chi.group();
  for (std::size_t n = 1; n < w.size(); ++n) {
    const std::uint64_t t = chi.phase(n);
    if (t != characters::CharacterGroup::kNonUnit) s += w[n] * g.root(t);
  }
  const cd S = s.value();
  return S + eps * std::conj(S);
}

cd l_value_afe(const characters::DirichletCharacter& chi, cd eps, const AfeConfig& cfg) {
  return l_value_afe(chi, eps, afe_weights(chi.modulus(), cfg));
}

std::vector<double> hurwitz_table(std::uint64_t q) {
  std::vector<double> t(q, 0.0);
  for (std::uint64_t a = 1; a < q; ++a) t[a] = hurwitz_zeta(0.5, double(a) / double(q));
  return t;
}

cd l_value_hurwitz(const characters::DirichletCharacter& chi, const std::vector<double>& table) {
  if (!chi.primitive()) throw PreconditionError("L-value requires a primitive character");
  const std::uint64_t q = chi.modulus();
  if (table.size() != q) throw PreconditionError("Hurwitz table has the wrong modulus");
  CompensatedSum<cd> s;
  for (std::uint64_t a = 1; a < q; ++a) {
    const std::uint64_t t = chi.phase(a);
    if (t != characters::CharacterGroup::kNonUnit) s += table[a] * chi.group().root(t);
  }
  return s.value() / std::sqrt(double(q));
}

cd l_value_hurwitz(const characters::DirichletCharacter& chi) {
  return l_value_hurwitz(chi, hurwitz_table(chi.modulus()));
}

void fill_l_values(characters::CharacterFamily& fam, LRoute route, const AfeConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(fam.size());
  fam.l_values.resize(n);
  if (n == 0) return;
  if (route == LRoute::Afe) {
    const auto w = afe_weights(fam.q, cfg);
    for (Eigen::Index i = 0; i < n; ++i)
      fam.l_values[i] = l_value_afe(fam.members[static_cast<std::size_t>(i)], fam.root_numbers[i], w);
  } else {
    const auto t = hurwitz_table(fam.q);
    for (Eigen::Index i = 0; i < n; ++i)
      fam.l_values[i] = l_value_hurwitz(fam.members[static_cast<std::size_t>(i)], t);
  }
}

}  // namespace mollify::lvalues
