#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mollify/characters.hpp"

namespace mollify::lvalues {

using cd = std::complex<double>;

/// log Gamma(z) for complex z off the non-positive integers (principal branch of the Stirling form).
cd log_gamma(cd z);
cd gamma(cd z);
/// Real digamma.
double digamma(double x);
/// Hurwitz zeta(s, a), a > 0, s != 1 (Euler-Maclaurin, 30 terms, Bernoulli tail to B_12).
cd hurwitz_zeta(cd s, double a);
double hurwitz_zeta(double s, double a);

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

enum class KernelKind { V1, V2, F };

/// Quadrature settings for the Mellin kernels.
struct KernelConfig {
  double contour = 1.5;
  double height = 60.0;
  double step = 0.01;
  /// Use G(s) = prod_m (1 - s^2/(1/2+2m)^2)^{e_m} for V1 as well (otherwise G1 = 1).
  bool v1_uses_g = false;
};

/// G(s) with e_0 = 2, e_1..e_4 = 1.
cd kernel_g(cd s);
/// Largest real part for which the G-weighted kernels stay analytic (A + 2 = 10.5).
inline constexpr double kKernelStripA = 8.5;

/// Mellin-inverse kernel evaluated by the trapezoid rule on Re s = contour,
/// using conjugate symmetry in t.
class MellinKernel {
 public:
  MellinKernel(KernelKind kind, KernelConfig cfg = {});
  double operator()(double x) const;
  KernelKind kind() const noexcept { return kind_; }
  const KernelConfig& config() const noexcept { return cfg_; }
  /// Integrand factor at s (without x^{-s}).
  cd integrand(cd s) const;

 private:
  std::complex<long double> integrand_ld(std::complex<long double> s) const;

  KernelKind kind_;
  KernelConfig cfg_;
  std::vector<long double> t_;
  std::vector<std::complex<long double>> w_;
};

double kernel_v1(double x, const KernelConfig& cfg = {});
double kernel_v2(double x, const KernelConfig& cfg = {});
double kernel_f(double x, const KernelConfig& cfg = {});

/// Upper bound for V1(x) (G1 = 1): (pi x^2)^{-3/4} e^{-pi x^2} / Gamma(1/4).
double v1_tail_bound(double x);

/// Approximate functional equation settings.
struct AfeConfig {
  KernelConfig kernel{};
  /// Terms are dropped once the V1 tail bound falls below this.
  double tail_tolerance = 1e-18;
  /// Hard ceiling on the number of terms per character.
  std::uint64_t max_terms = 50'000'000;
};

/// Weights n^{-1/2} V1(n/sqrt(q)), n = 0..N (index 0 unused); shared by all characters mod q.
std::vector<double> afe_weights(std::uint64_t q, const AfeConfig& cfg = {});

/// L(1/2, chi) = S + eps conj(S), S = sum chi(n) w_n; even primitive chi only.
cd l_value_afe(const characters::DirichletCharacter& chi, cd eps, const std::vector<double>& weights);
cd l_value_afe(const characters::DirichletCharacter& chi, cd eps, const AfeConfig& cfg = {});

/// zeta(1/2, a/q) for a = 0..q-1 (index 0 unused).
std::vector<double> hurwitz_table(std::uint64_t q);
/// L(1/2, chi) = q^{-1/2} sum_a chi(a) zeta(1/2, a/q).
cd l_value_hurwitz(const characters::DirichletCharacter& chi, const std::vector<double>& table);
cd l_value_hurwitz(const characters::DirichletCharacter& chi);

enum class LRoute { Afe, Hurwitz };

/// Fill fam.l_values.
void fill_l_values(characters::CharacterFamily& fam, LRoute route = LRoute::Afe, const AfeConfig& cfg = {});

}  // namespace mollify::lvalues
