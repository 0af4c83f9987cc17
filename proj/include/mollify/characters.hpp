#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mollify/numtheory.hpp"

namespace mollify::characters {

using cd = std::complex<double>;

/// One cyclic factor of (Z/qZ)^*: a subgroup generated by `generator`
/// (a residue mod q lifted via CRT), of order `order`, living on the p-part `modulus`.
struct CyclicFactor {
  std::uint64_t p = 0;
  unsigned e = 0;
  std::uint64_t modulus = 0;   // p^e
  std::uint64_t order = 0;
  std::uint64_t generator = 0; // lifted to Z/qZ
  bool minus_one_part = false; // the order-2 factor of (Z/2^e)^*, e >= 3
};

/// Immutable discrete-log data for (Z/qZ)^*; shared by all characters mod q.
class CharacterGroup {
 public:
  static constexpr std::uint32_t kNonUnit = 0xffffffffu;

  explicit CharacterGroup(std::uint64_t q);

  std::uint64_t modulus() const noexcept { return q_; }
  std::uint64_t group_order() const noexcept { return phi_; }
  const std::vector<CyclicFactor>& factors() const noexcept { return factors_; }
  /// Exponent of the group; character values are powers of e(1/L).
  std::uint64_t exponent() const noexcept { return L_; }
  bool cyclic() const noexcept { return factors_.size() <= 1; }

  /// Per-factor discrete logarithm of n, or kNonUnit.
  std::uint32_t log(std::size_t factor, std::uint64_t n) const noexcept {
    return logs_[factors_.size() * (n % q_) + factor];
  }
  bool is_unit(std::uint64_t n) const noexcept {
    return factors_.empty() ? (q_ != 2 || n % 2 == 1) : logs_[factors_.size() * (n % q_)] != kNonUnit;
  }
  /// e(k/L).
  const cd& root(std::uint64_t k) const noexcept { return roots_[k]; }
  /// e(a/q), built lazily.
  const std::vector<cd>& additive() const;
  /// For cyclic groups: residue of generator^j, j < order.
  const std::vector<std::uint32_t>& powers() const noexcept { return powers_; }

 private:
  std::uint64_t q_;
  std::uint64_t phi_;
  std::uint64_t L_ = 1;
  std::vector<CyclicFactor> factors_;
  std::vector<std::uint32_t> logs_;
  std::vector<cd> roots_;
  std::vector<std::uint32_t> powers_;
  mutable std::vector<cd> additive_;
  mutable std::once_flag additive_once_;
};

std::shared_ptr<const CharacterGroup> group_for(std::uint64_t q);

/// Dirichlet character mod q, stored as an exponent vector over the cyclic factors.
class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const CharacterGroup> g, std::vector<std::uint32_t> exps);

  std::uint64_t modulus() const noexcept { return group_->modulus(); }
  const CharacterGroup& group() const noexcept { return *group_; }
  const std::shared_ptr<const CharacterGroup>& group_ptr() const noexcept { return group_; }
  const std::vector<std::uint32_t>& exponents() const noexcept { return exps_; }

  /// Phase index T(n) with chi(n) = e(T(n)/L), or kNonUnit.
  std::uint64_t phase(std::uint64_t n) const noexcept {
    const auto& g = *group_;
    const std::size_t r = mult_.size();
    if (r == 0) return g.modulus() == 2 && n % 2 == 0 ? CharacterGroup::kNonUnit : 0;
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < r; ++i) {
      const std::uint32_t l = g.log(i, n);
      if (l == CharacterGroup::kNonUnit) return CharacterGroup::kNonUnit;
      t += mult_[i] * l;
    }
    return t % g.exponent();
  }
  cd operator()(std::uint64_t n) const noexcept {
    if (!table_.empty()) return table_[n % modulus()];
    const std::uint64_t t = phase(n);
    return t == CharacterGroup::kNonUnit ? cd(0.0, 0.0) : group_->root(t);
  }
  const std::vector<std::uint64_t>& multipliers() const noexcept { return mult_; }

  int parity() const noexcept { return parity_; }
  bool even() const noexcept { return parity_ == 1; }
  std::uint64_t conductor() const noexcept { return conductor_; }
  bool primitive() const noexcept { return conductor_ == modulus(); }
  /// Mixed-radix encoding of the exponent vector; stable across runs.
  std::uint64_t id() const noexcept { return id_; }
  DirichletCharacter conj() const;

  /// Materialise a length-q value table (used for small moduli).
  void materialize();
  bool materialized() const noexcept { return !table_.empty(); }

 private:
  std::shared_ptr<const CharacterGroup> group_;
  std::vector<std::uint32_t> exps_;
  std::vector<std::uint64_t> mult_;
  std::vector<cd> table_;
  int parity_ = 1;
  std::uint64_t conductor_ = 1;
  std::uint64_t id_ = 0;
};

/// Moduli up to this bound get materialised value tables.
inline constexpr std::uint64_t kMaterializeBound = 2000;

/// All phi(q) characters mod q, ordered by id.
std::vector<DirichletCharacter> enumerate_characters(std::uint64_t q);

/// Character with the given id.
DirichletCharacter character_from_id(std::uint64_t q, std::uint64_t id);

/// tau(chi) = sum_{a mod q} chi(a) e(a/q), compensated.
cd gauss_sum(const DirichletCharacter& chi);

/// tau(chi) for every character mod q, indexed by id; one multi-axis FFT over the unit group.
std::vector<cd> all_gauss_sums(const CharacterGroup& g);

/// eps_chi = tau(chi)/sqrt(q); throws DomainError for imprimitive chi.
cd root_number(const DirichletCharacter& chi);

/// The even primitive characters mod q with root numbers and (optionally) L-values.
struct CharacterFamily {
  std::uint64_t q = 0;
  std::shared_ptr<const CharacterGroup> group;
  std::vector<DirichletCharacter> members;
  Eigen::VectorXcd root_numbers;
  Eigen::VectorXcd l_values;
  std::vector<std::size_t> conj_index;

  std::size_t size() const noexcept { return members.size(); }
  bool has_l_values() const noexcept { return l_values.size() == static_cast<Eigen::Index>(members.size()); }
};

/// Even primitive family mod q; empty for q = 2 (mod 4). Root numbers are filled.
CharacterFamily even_primitive_family(std::uint64_t q);

/// Right-hand side of the even-primitive orthogonality relation for (mn, q) = 1.
double orthogonality_rhs(std::uint64_t q, std::uint64_t m, std::uint64_t n);
/// Right-hand side of the root-number weighted orthogonality relation, (mn, q) = 1.
double eps_orthogonality_rhs(std::uint64_t q, std::uint64_t m, std::uint64_t n);
/// sum over all chi mod w of conj(eps_chi) chi(m) conj(chi(n)), with eps_chi = tau/sqrt(w).
/// Equals phi(w)/sqrt(w) e(-m nbar/w) for (mn, w) = 1.
cd all_characters_rhs(std::uint64_t w, std::uint64_t m, std::uint64_t n);

}  // namespace mollify::characters
