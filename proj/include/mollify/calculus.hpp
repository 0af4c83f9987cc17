#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mollify/errors.hpp"

namespace mollify {

enum class Provenance { Brute, Weighted, MainTerm, Synthetic };

const char* provenance_name(Provenance p) noexcept;

/// (Psi_M, Psi_N, Psi_MM, Psi_MN, Psi_NN) with a provenance tag.
template <typename Real>
struct MomentSet {
  using Complex = std::complex<Real>;

  Complex psi_m{};
  Complex psi_n{};
  Real psi_mm{};
  Complex psi_mn{};
  Real psi_nn{};
  Provenance provenance = Provenance::Synthetic;
  std::string label;

  Real gram() const noexcept { return psi_mm * psi_nn - std::norm(psi_mn); }
  bool gram_feasible(Real tol = Real(1e-9)) const noexcept {
    return psi_mm >= 0 && psi_nn >= 0 && gram() >= -tol * psi_mm * psi_nn;
  }
  /// Exchange the roles of M and N.
  MomentSet swapped() const {
    MomentSet r = *this;
    std::swap(r.psi_m, r.psi_n);
    std::swap(r.psi_mm, r.psi_nn);
    r.psi_mn = std::conj(psi_mn);
    return r;
  }
  /// Moments of (uM, vN).
  MomentSet rescaled(Complex u, Complex v) const {
    MomentSet r = *this;
    r.psi_m = u * psi_m;
    r.psi_n = v * psi_n;
    r.psi_mm = std::norm(u) * psi_mm;
    r.psi_nn = std::norm(v) * psi_nn;
    r.psi_mn = u * std::conj(v) * psi_mn;
    return r;
  }
};

using MomentSetd = MomentSet<double>;

/// Weighted moments of value vectors a = (L M)(pi), b = (L N)(pi).
template <typename Real>
MomentSet<Real> moments_from_values(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& a,
                                    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& b,
                                    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& w,
                                    Provenance prov = Provenance::Synthetic) {
  if (a.size() != b.size() || a.size() != w.size()) throw PreconditionError("value vectors differ in length");
  const Real W = w.sum();
  if (!(W > 0)) throw PreconditionError("weights must not vanish identically");
  MomentSet<Real> m;
  const auto wc = w.template cast<std::complex<Real>>();
  m.psi_m = (wc.array() * a.array()).sum() / W;
  m.psi_n = (wc.array() * b.array()).sum() / W;
  m.psi_mm = (w.array() * a.array().abs2()).sum() / W;
  m.psi_nn = (w.array() * b.array().abs2()).sum() / W;
  m.psi_mn = (wc.array() * a.array() * b.array().conjugate()).sum() / W;
  m.provenance = prov;
  return m;
}

namespace calculus {

/// Why the optimal combination is undefined.
enum class Degeneracy { PsiMZero, PsiNNZero, Flat, NotInRange };

class DegenerateCombination : public std::runtime_error {
 public:
  DegenerateCombination(Degeneracy d, const std::string& what) : std::runtime_error(what), kind(d) {}
  Degeneracy kind;
};

enum class Verdict {
  Flat,
  Improvable,
  NotImprovable,
  EfficientGain,
  EfficientNoGain,
  WeakGain,
  WeakNoGain,
  Degenerate
};

const char* verdict_name(Verdict v) noexcept;

inline constexpr double kEqualityRelTol = 1e-9;

template <typename Real>
bool nearly_equal(std::complex<Real> x, std::complex<Real> y, Real rel = Real(kEqualityRelTol)) {
  const Real scale = std::max(std::abs(x), std::abs(y));
  return std::abs(x - y) <= rel * scale;
}

/// |psi|^2 / psipsi, or 0 when psipsi = 0.
template <typename Real>
Real beta(std::complex<Real> psi, Real psipsi) {
  if (psipsi < 0) throw PreconditionError("second moment must be non-negative");
  return psipsi == 0 ? Real(0) : std::norm(psi) / psipsi;
}

template <typename Real>
Real beta_m(const MomentSet<Real>& ms) { return beta(ms.psi_m, ms.psi_mm); }
template <typename Real>
Real beta_n(const MomentSet<Real>& ms) { return beta(ms.psi_n, ms.psi_nn); }

/// beta(M + alpha N) from the moments; 0 on a vanishing denominator.
template <typename Real>
Real beta_combined(const MomentSet<Real>& ms, std::complex<Real> alpha) {
  const Real den = ms.psi_mm + 2 * std::real(std::conj(alpha) * ms.psi_mn) + std::norm(alpha) * ms.psi_nn;
  if (den == 0) return Real(0);
  return std::norm(ms.psi_m + alpha * ms.psi_n) / den;
}

/// Psi_N Psi_MN - Psi_M Psi_NN
template <typename Real>
std::complex<Real> flat_defect(const MomentSet<Real>& ms) {
  return ms.psi_n * ms.psi_mn - ms.psi_m * ms.psi_nn;
}
/// conj(Psi_M) Psi_MN - conj(Psi_N) Psi_MM
template <typename Real>
std::complex<Real> stationarity_defect(const MomentSet<Real>& ms) {
  return std::conj(ms.psi_m) * ms.psi_mn - std::conj(ms.psi_n) * ms.psi_mm;
}

/// Maximiser of beta(M + alpha N) over complex alpha.
template <typename Real>
std::complex<Real> alpha_opt(const MomentSet<Real>& ms) {
  if (ms.psi_m == std::complex<Real>(0)) throw DegenerateCombination(Degeneracy::PsiMZero, "Psi_M vanishes");
  if (ms.psi_nn == 0) throw DegenerateCombination(Degeneracy::PsiNNZero, "Psi_NN vanishes");
  if (nearly_equal(ms.psi_n * ms.psi_mn, ms.psi_m * ms.psi_nn))
    throw DegenerateCombination(Degeneracy::Flat, "Psi_N Psi_MN = Psi_M Psi_NN: beta(M + alpha N) is constant");
  return stationarity_defect(ms) / std::conj(flat_defect(ms));
}

/// The two closed forms of beta(M + alpha_1 N).
template <typename Real>
std::pair<Real, Real> beta_closed_forms(const MomentSet<Real>& ms) {
  const Real g = ms.gram();
  const Real f1 = (std::norm(ms.psi_n) * ms.psi_mm + std::norm(ms.psi_m) * ms.psi_nn -
                   2 * std::real(std::conj(ms.psi_m) * ms.psi_n * ms.psi_mn)) /
                  g;
  const Real f2 = beta_m(ms) + std::norm(stationarity_defect(ms)) / (ms.psi_mm * g);
  return {f1, f2};
}

struct Certificate {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

/// Domination criterion: |Psi_M Psi_MN| >= (1 - delta)|Psi_N| Psi_MM, which forces beta(N) <= (1+4 delta) beta(M).
template <typename Real>
struct DominationResult {
  bool holds = false;
  Real lhs{}, rhs{};
  Real beta_n{}, bound{};
  bool implication_ok = true;
};

template <typename Real>
DominationResult<Real> criterion_dominates(const MomentSet<Real>& ms, Real delta) {
  if (!(delta >= 0 && delta < Real(0.1))) throw DomainError("delta must lie in [0, 1/10)");
  if (ms.psi_mm == 0) throw PreconditionError("Psi_MM must not vanish");
  DominationResult<Real> r;
  r.lhs = std::abs(ms.psi_m * ms.psi_mn);
  r.rhs = (1 - delta) * std::abs(ms.psi_n) * ms.psi_mm;
  r.holds = r.lhs >= r.rhs * (1 - Real(1e-12));
  r.beta_n = beta_n(ms);
  r.bound = (1 + 4 * delta) * beta_m(ms);
  if (r.holds) r.implication_ok = r.beta_n <= r.bound + Real(1e-9);
  return r;
}

template <typename Real>
struct ComparisonReport {
  MomentSet<Real> inputs;
  Real delta{};
  Real beta_m{}, beta_n{};
  std::optional<std::complex<Real>> alpha1;
  Real beta_combined{};
  Verdict verdict = Verdict::Degenerate;
  std::vector<Certificate> certificates;
  /// Every emitted bound re-verified against beta_combined(alpha_1).
  bool certified = true;
};

/// Classify the pair (M, N) at precision delta in [0, 1/2).
template <typename Real>
ComparisonReport<Real> classify(const MomentSet<Real>& ms, Real delta) {
  using C = std::complex<Real>;
  if (!(delta >= 0 && delta < Real(0.5))) throw DomainError("delta must lie in [0, 1/2)");
  if (!ms.gram_feasible()) throw PreconditionError("moment set violates Gram feasibility");
  ComparisonReport<Real> rep;
  rep.inputs = ms;
  rep.delta = delta;
  rep.beta_m = beta_m(ms);
  rep.beta_n = beta_n(ms);
  rep.beta_combined = rep.beta_m;
  const Real tol = Real(1e-9);
  auto cert = [&](std::string name, Real lhs, Real rhs, bool holds) {
    rep.certificates.push_back({std::move(name), double(lhs), double(rhs), holds});
    rep.certified = rep.certified && holds;
  };

  if (ms.psi_m == C(0) || ms.psi_nn == 0) {
    rep.verdict = Verdict::Degenerate;
    return rep;
  }
  const C fd = flat_defect(ms);
  const C sd = stationarity_defect(ms);
  if (nearly_equal(ms.psi_n * ms.psi_mn, ms.psi_m * ms.psi_nn)) {
    rep.verdict = Verdict::Flat;
    cert("|Psi_N Psi_MN - Psi_M Psi_NN| vs tol*scale", std::abs(fd),
         Real(kEqualityRelTol) * std::max(std::abs(ms.psi_n * ms.psi_mn), std::abs(ms.psi_m * ms.psi_nn)), true);
    return rep;
  }
  const C a1 = alpha_opt(ms);
  rep.alpha1 = a1;
  rep.beta_combined = beta_combined(ms, a1);
  const Real gain = rep.beta_combined - rep.beta_m;
  const Real scale = std::max<Real>(1, rep.beta_combined);

  if (nearly_equal(ms.psi_m * std::conj(ms.psi_mn), ms.psi_n * ms.psi_mm)) {
    rep.verdict = Verdict::NotImprovable;
    cert("gain <= 0", gain, 0, gain <= tol * scale);
    return rep;
  }
  if (delta == 0) {
    rep.verdict = Verdict::Improvable;
    cert("gain > 0", gain, 0, gain > 0);
    return rep;
  }
  const Real bm = rep.beta_m, bn = rep.beta_n;
  if (bn > delta / 4 * bm) {
    const Real lhs_i = std::abs(sd), rhs_i = delta * delta * std::abs(ms.psi_n) * ms.psi_mm;
    if (lhs_i >= rhs_i) {
      rep.verdict = Verdict::EfficientGain;
      cert("stationarity defect >= delta^2 |Psi_N| Psi_MM", lhs_i, rhs_i, true);
      const Real b = delta * delta * delta * delta * bn;
      cert("gain >= delta^4 beta(N)", gain, b, gain >= b - tol * scale);
      return rep;
    }
    const Real lhs_ii = std::abs(fd), rhs_ii = delta * ms.psi_nn * std::abs(ms.psi_m);
    if (lhs_ii >= rhs_ii) {
      rep.verdict = Verdict::EfficientNoGain;
      cert("stationarity defect < delta^2 |Psi_N| Psi_MM", lhs_i, rhs_i, true);
      cert("flat defect >= delta Psi_NN |Psi_M|", lhs_ii, rhs_ii, true);
      const Real b = delta * delta * bn / bm;
      cert("sup gain <= delta^2 beta(N)/beta(M)", gain, b, gain <= b + tol * scale);
      return rep;
    }
    rep.verdict = Verdict::Degenerate;
    cert("stationarity defect < delta^2 |Psi_N| Psi_MM", lhs_i, rhs_i, true);
    cert("flat defect < delta Psi_NN |Psi_M|", lhs_ii, rhs_ii, true);
    return rep;
  }
  const Real lhs = std::norm(ms.psi_mn), rhs = delta * ms.psi_mm * ms.psi_nn;
  if (lhs >= rhs) {
    rep.verdict = Verdict::WeakGain;
    cert("|Psi_MN|^2 >= delta Psi_MM Psi_NN", lhs, rhs, true);
    const Real b = delta / 4 * bm;
    cert("gain >= (delta/4) beta(M)", gain, b, gain >= b - tol * scale);
  } else {
    rep.verdict = Verdict::WeakNoGain;
    cert("|Psi_MN|^2 <= delta Psi_MM Psi_NN", lhs, rhs, true);
    const Real b = 5 * delta * bm;
    cert("sup gain <= 5 delta beta(M)", gain, b, gain <= b + tol * scale);
  }
  return rep;
}

/// Optimum over the span of a basis: maximise |c^H v|^2 / (c^H A c).
template <typename Real>
struct ClassOptimum {
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> c;
  Real beta_max{};
  Eigen::Index rank = 0;
};

/// v_i = Psi_{M_i}, A_ij = Psi_{M_i, M_j}. The optimal mollifier is sum_i conj(c_i) M_i.
template <typename Real>
ClassOptimum<Real> optimize_in_class(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& v,
                                     const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& A,
                                     Real cutoff = Real(1e-12), Real range_tol = Real(1e-8)) {
  using CV = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
  const Eigen::Index n = v.size();
  if (A.rows() != n || A.cols() != n) throw PreconditionError("moment matrix has the wrong shape");
  if (n == 0) throw PreconditionError("empty basis");
  const Real herm = (A - A.adjoint()).norm();
  if (herm > Real(1e-9) * std::max<Real>(1, A.norm())) throw PreconditionError("moment matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>> es(A);
  const auto& lam = es.eigenvalues();
  const Real lmax = lam.cwiseAbs().maxCoeff();
  if (lam.minCoeff() < -Real(1e-9) * lmax) throw PreconditionError("moment matrix is not positive semidefinite");
  const auto& U = es.eigenvectors();
  CV w = U.adjoint() * v;
  ClassOptimum<Real> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam[i] > cutoff * lmax) {
      w[i] /= lam[i];
      ++out.rank;
    } else {
      w[i] = 0;
    }
  }
  out.c = U * w;
  const CV resid = A * out.c - v;
  if (lmax == 0 || resid.norm() > range_tol * v.norm())
    throw DegenerateCombination(Degeneracy::NotInRange, "first-moment vector is not in the range of the moment matrix");
  out.beta_max = std::real(v.dot(out.c));  // v^H c
  return out;
}

/// Moment set of (M*, N) for M* = sum conj(c_i) M_i and N = M_j.
template <typename Real>
MomentSet<Real> combination_moments(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& v,
                                    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& A,
                                    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& c, Eigen::Index j) {
  MomentSet<Real> m;
  m.psi_m = c.dot(v);
  m.psi_mm = std::real(c.dot(A * c));
  m.psi_n = v[j];
  m.psi_nn = std::real(A(j, j));
  m.psi_mn = std::conj((A * c)[j]);
  return m;
}

/// max_j |Psi_M conj(Psi_{M,N_j}) - Psi_{N_j} Psi_MM| / (|Psi_{N_j}| Psi_MM) at the optimum.
template <typename Real>
Real stationarity_residual(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& v,
                           const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& A,
                           const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& c) {
  Real worst = 0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const auto m = combination_moments(v, A, c, j);
    const Real den = std::abs(m.psi_n) * m.psi_mm;
    if (den == 0) continue;
    worst = std::max(worst, std::abs(m.psi_m * std::conj(m.psi_mn) - m.psi_n * m.psi_mm) / den);
  }
  return worst;
}

}  // namespace calculus
}  // namespace mollify
