#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "mollify/calculus.hpp"
#include "mollify/mollifiers.hpp"
#include "mollify/moments.hpp"

namespace mollify::asymptotics {

using cd = std::complex<double>;
using mollifiers::CoefMap;

/// psi(1/4) - log(pi).
double c0();
/// 1/2 log(q/pi) + psi(1/4)/2 + gamma + eta(q).
double log_L(std::uint64_t q);

/// Lengths and exponents shared by the main-term evaluators; lengths are explicit, thetas only feed hypothesis checks.
struct MainTermContext {
  std::uint64_t q = 3;
  double y1 = 2.0;
  double y2 = 2.0;
  double theta = 0.45;
  double eps0 = 0.0;

  /// y1 = q^theta, y2 = y1 q^-eps0.
  static MainTermContext from_theta(std::uint64_t q, double theta, double eps0 = 0.0);
};

// ---- Conrey-type Moebius sums

enum class ConreyVariant { Plain, Log };

struct ConreyConfig {
  /// Require j <= y^(1 - eps) whenever j <= y.
  double eps = 0.0;
};

/// sum_{n <= y/j, (n, jq) = 1} mu(n)/n (1 - log(jn)/log y), or with the extra -log n factor.
double conrey_direct(double y, std::uint64_t j, std::uint64_t q, ConreyVariant v, const ConreyConfig& cfg = {});
/// jq/(phi(jq) log y), times (log(y/j) - 2 gamma - 2 eta(jq)) for the log variant.
double conrey_main(double y, std::uint64_t j, std::uint64_t q, ConreyVariant v);

// ---- X transforms

/// X_{u,v} = sum_{ab <= y/(uv)} x_{au,bv}/(abuv) and X' with the extra log(ab) weight, on uv <= y.
struct XTables {
  double y = 1.0;
  CoefMap X;
  CoefMap Xp;
  cd at(std::uint64_t u, std::uint64_t v) const;
  cd prime_at(std::uint64_t u, std::uint64_t v) const;
};

XTables x_transform(const CoefMap& x, double y);
/// x_{u,v}/(uv) recovered as sum_{ab <= y/(uv)} mu(a) mu(b) X_{au,bv}.
CoefMap x_inverse(const XTables& t);
/// X'_{u,v} recomputed as sum_c Lambda(c) (X_{cu,v} + X_{u,cv}).
CoefMap xprime_by_lambda(const XTables& t);

/// Throws PreconditionError unless x is supported on ab <= y with (a,b) = (ab,q) = 1.
void check_pair_support(const CoefMap& x, double y, std::uint64_t q, const char* which);

/// Main term of Psi_{N1,N2}(q) for Bui-type N1 (x, y1) and N2 (z, y2).
cd psi_pair_main(std::uint64_t q, const CoefMap& x, double y1, const CoefMap& z, double y2);

/// Both sides of the diagonal bound: S = 2|sum phi(u)phi(v) Z conj(Z')| and
/// sum phi(u)phi(v)|Z|^2 (2 sum_{c <= y/(uv)} Lambda(c)/phi(c) + log u + log v).
struct DiagonalChain {
  double s;
  double bound;
  double weighted_norm;  // sum phi(u) phi(v) |Z_{u,v}|^2
};
DiagonalChain diagonal_chain(const CoefMap& z, double y);

// ---- Main terms

enum class MainTermKind { IsFirst, IsCross, IsSecond, NFirst, MvCross, MvSecond, M1N, M2N, M2NFinal };
const char* main_term_name(MainTermKind k) noexcept;
MainTermKind main_term_from_name(const std::string& s);

/// The per-modulus main term (raw, i.e. including the phi^+(q) factor). IS kinds read x_1 from z(1,1);
/// throws PreconditionError naming the violated length constraint.
cd main_term(MainTermKind kind, const MainTermContext& ctx, const CoefMap& z = {});

/// sum_{kb^2 <= y, (kb,q)=1} f(k) z_{kb,b}/(kb).
cd diagonal_sum(const CoefMap& z, double y, std::uint64_t q, const std::function<double(std::uint64_t)>& f);

/// The cross term with M2 before the convolution identities are applied:
/// phi^+(q) sum_{b2 n l1 b0^2 <= y2, coprime} mu(b2)(1 - log b2/log y1) z_{b0 b2 l1 n, b0}/(b0 b2 l1 n).
cd m2n_unsimplified(const MainTermContext& ctx, const CoefMap& z);

/// Average of per-modulus values f(q) with the moments-module normalisation over q in [Q/2, 2Q].
cd weighted_average(std::uint64_t Q, const moments::Weight& w, const std::function<cd(std::uint64_t)>& f);

/// (brute, main, |brute - main|/|main|).
struct Comparison {
  double brute;
  double main;
  double rel_dev;
};
Comparison compare(double brute, double main);
std::string comparison_csv_header();
std::string comparison_csv_row(const std::string& kind, std::uint64_t q, double y1, double y2, const Comparison& c);

// ---- Unbalanced two-piece mollifier

struct UnbalancedPrediction {
  double alpha_opt;
  MomentSetd moments;  // (1, 1, 1 + 1/theta1, 1, 1 + 1/theta2) in phi^+ units
};
UnbalancedPrediction unbalanced_predict(double theta1, double theta2);

/// -alpha(1+alpha) phi^+(q)^2 sum_{q^theta2 < b2 <= Y, b2 n l1 b0^2 <= Y} mu(b2)(1 - log b2/log q^theta2)
///   x_{b0 b2 l1 n, b0}/(b0 b2 l1 n), Y = q^(theta1 - eps1), alpha = theta2/theta1.
double unbalanced_gain(std::uint64_t q, double theta1, double theta2, double eps1, const CoefMap& x);

}  // namespace mollify::asymptotics
