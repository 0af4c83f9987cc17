#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "mollify/calculus.hpp"
#include "mollify/characters.hpp"
#include "mollify/lvalues.hpp"
#include "mollify/mollifiers.hpp"

namespace mollify::moments {

using cd = std::complex<double>;
using characters::CharacterFamily;
using mollifiers::MollifierSpec;

/// (L M)(chi) over the family. Requires L-values.
Eigen::VectorXcd lm_values(const MollifierSpec& m, const CharacterFamily& fam, unsigned workers = 1);

/// sum^+ L(1/2,chi) M(chi).
cd psi_first(std::uint64_t q, const MollifierSpec& m, const CharacterFamily& fam, unsigned workers = 1);
/// sum^+ L M conj(L N).
cd psi_second(std::uint64_t q, const MollifierSpec& m, const MollifierSpec& n, const CharacterFamily& fam,
              unsigned workers = 1);
/// |E Psi_M|^2 / E Psi_MM over the family (family averages), 0 when the denominator vanishes.
double beta_q(std::uint64_t q, const MollifierSpec& m, const CharacterFamily& fam, unsigned workers = 1);

/// Family averages (sums divided by the family size) of the five moments.
MomentSetd moment_set(std::uint64_t q, const MollifierSpec& m, const MollifierSpec& n, const CharacterFamily& fam,
                      unsigned workers = 1);
/// Same, from precomputed L M and L N vectors.
MomentSetd moment_set_from_values(const Eigen::VectorXcd& lm, const Eigen::VectorXcd& ln);

/// Smooth weight on (1/2, 2) for the modulus average.
struct Weight {
  std::function<double(double)> phi;
  std::string name;
};

/// 2 exp(1 - 1/(1 - t^2)), t = (4x - 5)/3.
Weight default_weight();
/// Scaled copy (same support).
Weight scaled(const Weight& w, double factor);
/// Throws ConfigError unless phi >= 0, phi vanishes off (1/2, 2) and phi(1) >= 1 (checked on a fine grid).
void validate_weight(const Weight& w);

/// Families with L-values, built on demand; optionally persisted as text files in a directory.
class FamilyStore {
 public:
  explicit FamilyStore(std::string cache_dir = {}, lvalues::LRoute route = lvalues::LRoute::Afe,
                       lvalues::AfeConfig cfg = {}, std::size_t keep = 4);
  std::shared_ptr<const CharacterFamily> get(std::uint64_t q);
  std::size_t built() const noexcept { return built_; }
  std::size_t loaded() const noexcept { return loaded_; }

 private:
  std::string dir_;
  lvalues::LRoute route_;
  lvalues::AfeConfig cfg_;
  std::size_t keep_;
  std::map<std::uint64_t, std::shared_ptr<const CharacterFamily>> live_;
  std::vector<std::uint64_t> order_;
  std::size_t built_ = 0, loaded_ = 0;
};

inline constexpr const char* kFamilyCacheMagic = "mollify-family";
inline constexpr int kFamilyCacheVersion = 1;

/// Text cache: header line, then "id eps_re eps_im L_re L_im" per member.
void write_family_cache(std::ostream& out, const CharacterFamily& fam, const std::string& tag = "afe");
/// Rebuilds members from ids; throws ConfigError on malformed or version-mismatched input.
CharacterFamily read_family_cache(std::istream& in, std::string* tag = nullptr);

/// Weighted average over q in [Q/2, 2Q] with weights phi(q/Q) q/phi(q); the mollifier may depend on q.
using MollifierForQ = std::function<MollifierSpec(std::uint64_t q)>;
MomentSetd moment_set_weighted(std::uint64_t Q, const Weight& w, const MollifierForQ& m, const MollifierForQ& n,
                               FamilyStore& store, unsigned workers = 1);
double beta_weighted(std::uint64_t Q, const Weight& w, const MollifierSpec& m, FamilyStore& store,
                     unsigned workers = 1);

/// One CSV line per modulus: q, phi_plus, the five moments (re/im split), beta_M, beta_N.
std::string csv_header();
std::string csv_row(std::uint64_t q, std::uint64_t phi_plus, const MomentSetd& ms);

/// ||u||^2 ||v||^2 - |<u,v>|^2 and ||v||^-2 || ||v||^2 u - <u,v> v ||^2 under weights w.
struct CauchySchwarzSides {
  double gram;
  double residual_form;
};
CauchySchwarzSides cauchy_schwarz_sides(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
                                        const Eigen::VectorXd& w);

}  // namespace mollify::moments
