#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mollify/characters.hpp"

namespace mollify::mollifiers {

using cd = std::complex<double>;
/// Sparse (a, b) -> coefficient; ordered for deterministic iteration.
using CoefMap = std::map<std::pair<std::uint64_t, std::uint64_t>, cd>;

enum class Variant { OnePiece, TwistedTwoPiece, BuiType };

const char* variant_name(Variant v) noexcept;

/// Polynomial with real coefficients in ascending powers.
struct Polynomial {
  std::vector<double> c;
  double operator()(double x) const noexcept;
};

/// M(chi) = sum plain[a,b] conj(chi(a)) chi(b) / sqrt(ab)
///        + alpha * conj(eps_chi) * sum twisted[a,b] chi(a) conj(chi(b)) / sqrt(ab).
/// OnePiece specs only use a = 1.
struct MollifierSpec {
  Variant variant = Variant::OnePiece;
  CoefMap plain;
  CoefMap twisted;
  double length = 1.0;
  double twisted_length = 0.0;
  cd alpha = 1.0;
  bool normalized = false;

  bool has_twist() const noexcept { return !twisted.empty(); }
  /// Coefficient lookup; zero off the support.
  cd x(std::uint64_t a, std::uint64_t b) const;
  cd y(std::uint64_t a, std::uint64_t b) const;
};

/// x_b = mu(b)(1 - log b / log y), b <= y.
MollifierSpec iwaniec_sarnak(double y);
/// Plain and twisted parts both Iwaniec-Sarnak shaped; twisted part scaled by alpha.
MollifierSpec michel_vanderkam(double y, double alpha = 1.0);
MollifierSpec michel_vanderkam(double y1, double y2, double alpha);
/// z_{a,b} = 1_{a=1} mu(b) P1(log(y/b)/log y) + Lambda(a)/logscale mu(b) P2(log(y/(ab))/log y), ab <= y.
MollifierSpec bui(double y, const Polynomial& p1, const Polynomial& p2, double logscale);
/// One-piece mollifier from b -> x_b; entries with b > y rejected.
MollifierSpec one_piece(const std::map<std::uint64_t, cd>& x, double y);
/// Bui-type mollifier from (a,b) -> z_{a,b}; entries with ab > y rejected.
MollifierSpec bui_type(CoefMap z, double y);
/// Twisted two-piece mollifier of Bui shape with maps x (plain) and y (twisted).
MollifierSpec two_piece(CoefMap x, CoefMap y, double y1, double y2, cd alpha = 1.0);

/// z = x + alpha * y entrywise; both parts must share their length.
MollifierSpec n0_reduce(const MollifierSpec& spec);
/// Keep only (a,b) = 1 and (ab, q) = 1.
MollifierSpec project_coprime(const MollifierSpec& spec, std::uint64_t q);
/// Drop coefficients with ab > length (both parts).
MollifierSpec truncate(const MollifierSpec& spec, double length);
MollifierSpec scale(const MollifierSpec& spec, cd u);
MollifierSpec operator+(const MollifierSpec& s1, const MollifierSpec& s2);

cd evaluate(const MollifierSpec& spec, const characters::DirichletCharacter& chi,
            std::optional<cd> eps = std::nullopt);
/// M(chi) for every member of the family, in family order; workers split the index range.
Eigen::VectorXcd evaluate_family(const MollifierSpec& spec, const characters::CharacterFamily& fam,
                                 unsigned workers = 1);

/// Parse "a b re [im]" lines; '#' starts a comment.
CoefMap read_coefficients(std::istream& in);
CoefMap read_coefficient_file(const std::string& path);
void write_coefficients(std::ostream& out, const CoefMap& m);

}  // namespace mollify::mollifiers
