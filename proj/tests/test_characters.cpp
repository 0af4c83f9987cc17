#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "mollify/characters.hpp"

using namespace mollify;
using namespace mollify::characters;

namespace {

std::size_t count_even_primitive_enum(std::uint64_t q) {
  std::size_t c = 0;
  for (const auto& chi : enumerate_characters(q)) c += chi.even() && chi.primitive();
  return c;
}

// Conductor from values: the least d | q with chi(n) = 1 whenever n = 1 (mod d), (n, q) = 1.
std::uint64_t conductor_brute(const DirichletCharacter& chi) {
  const std::uint64_t q = chi.modulus();
  for (auto d : numtheory::divisors(q)) {
    bool ok = true;
    for (std::uint64_t n = 1; n < q + 1 && ok; ++n)
      if (std::gcd(n, q) == 1 && n % d == 1 % d) ok = std::abs(chi(n) - cd(1.0)) < 1e-9;
    if (ok) return d;
  }
  return q;
}

cd direct_gauss(const DirichletCharacter& chi) {
  const std::uint64_t q = chi.modulus();
  cd s = 0.0;
  for (std::uint64_t a = 0; a < q; ++a)
    s += chi(a) * std::polar(1.0, 2.0 * std::numbers::pi * double(a) / double(q));
  return s;
}

}  // namespace

TEST_CASE("enumeration counts") {
  CHECK(enumerate_characters(5).size() == 4);
  CHECK(enumerate_characters(1).size() == 1);
  CHECK(enumerate_characters(8).size() == 4);
  CHECK(count_even_primitive_enum(5) == 1);
  CHECK(count_even_primitive_enum(8) == 1);
  CHECK(count_even_primitive_enum(3) == 0);
  CHECK(count_even_primitive_enum(4) == 0);
  CHECK_THROWS_AS(enumerate_characters(0), DomainError);
}

TEST_CASE("character axioms and flags for q <= 120") {
  for (std::uint64_t q = 1; q <= 120; ++q) {
    const auto chars = enumerate_characters(q);
    REQUIRE(chars.size() == numtheory::euler_phi(q));
    std::set<std::vector<std::pair<long, long>>> distinct;
    for (const auto& chi : chars) {
      std::vector<std::pair<long, long>> key;
      for (std::uint64_t n = 0; n < q; ++n) {
        const cd v = chi(n);
        key.emplace_back(std::lround(v.real() * 1e6), std::lround(v.imag() * 1e6));
        const bool unit = std::gcd(n, q) == 1;
        REQUIRE(std::abs(std::abs(v) - (unit ? 1.0 : 0.0)) < 1e-12);
        for (std::uint64_t m = 0; m < q; m += 7) REQUIRE(std::abs(chi(m * n) - chi(m) * v) < 1e-12);
      }
      distinct.insert(key);
      if (q > 2) REQUIRE(chi.even() == (std::abs(chi(q - 1) - cd(1.0)) < 1e-12));
      REQUIRE(chi.conductor() == conductor_brute(chi));
      REQUIRE(chi.primitive() == (chi.conductor() == q));
      REQUIRE(character_from_id(q, chi.id()).exponents() == chi.exponents());
    }
    CHECK(distinct.size() == chars.size());
  }
}

TEST_CASE("even primitive count versus mu * phi") {
  for (std::uint64_t q = 3; q <= 10'000; ++q) {
    const auto n = numtheory::even_primitive_count(q);
    REQUIRE(std::abs(double(n) - 0.5 * double(numtheory::mu_phi_conv(q))) <= 1.0);
  }
  for (std::uint64_t q = 1; q <= 200; ++q) REQUIRE(numtheory::even_primitive_count(q) == count_even_primitive_enum(q));
}

TEST_CASE("Gauss sums and root numbers") {
  const auto fam5 = even_primitive_family(5);
  REQUIRE(fam5.size() == 1);
  const cd t5 = gauss_sum(fam5.members[0]);
  CHECK(std::abs(t5 - cd(std::sqrt(5.0), 0.0)) < 1e-12);
  CHECK(std::abs(fam5.root_numbers[0] - cd(1.0)) < 1e-12);

  const auto fam8 = even_primitive_family(8);
  REQUIRE(fam8.size() == 1);
  CHECK(std::abs(fam8.root_numbers[0] - cd(1.0)) < 1e-12);

  CHECK(std::abs(gauss_sum(enumerate_characters(1)[0]) - cd(1.0)) < 1e-15);

  for (std::uint64_t q = 3; q <= 200; ++q)
    for (const auto& chi : enumerate_characters(q)) {
      const cd t = gauss_sum(chi);
      REQUIRE(std::abs(t - direct_gauss(chi)) < 1e-9);
      if (chi.primitive()) REQUIRE(std::abs(std::abs(t) - std::sqrt(double(q))) < 1e-10 * std::sqrt(double(q)));
    }

  const auto odd = enumerate_characters(7)[1];
  CHECK_THROWS_AS(root_number(odd), PreconditionError);
  CHECK_THROWS_AS(root_number(enumerate_characters(9)[0]), PreconditionError);
}

TEST_CASE("batched Gauss sums agree with per-character sums") {
  for (std::uint64_t q : {1ull, 2ull, 3ull, 4ull, 8ull, 16ull, 32ull, 45ull, 64ull, 97ull, 120ull, 180ull, 243ull, 1024ull, 2310ull}) {
    const auto g = group_for(q);
    const auto tau = all_gauss_sums(*g);
    const auto chars = enumerate_characters(q);
    REQUIRE(tau.size() == chars.size());
    for (const auto& chi : chars) REQUIRE(std::abs(tau[chi.id()] - gauss_sum(chi)) < 1e-9 * std::sqrt(double(q)));
  }
  const auto fam = even_primitive_family(2003);
  for (std::size_t i = 0; i < fam.size(); i += 97)
    CHECK(std::abs(fam.root_numbers[static_cast<Eigen::Index>(i)] - root_number(fam.members[i])) < 1e-11);
}

TEST_CASE("families are closed under conjugation") {
  for (std::uint64_t q : {13ull, 9ull, 16ull, 45ull, 61ull, 97ull, 120ull, 1009ull, 4096ull, 6300ull}) {
    const auto fam = even_primitive_family(q);
    CHECK(fam.size() == numtheory::even_primitive_count(q));
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto j = fam.conj_index[i];
      REQUIRE(fam.conj_index[j] == i);
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      REQUIRE(std::abs(std::abs(fam.root_numbers[ii]) - 1.0) < 1e-10);
      REQUIRE(std::abs(fam.root_numbers[jj] - std::conj(fam.root_numbers[ii])) < 1e-10);
    }
  }
  CHECK(even_primitive_family(6).size() == 0);
  CHECK(even_primitive_family(4).size() == 0);
}

TEST_CASE("orthogonality relations") {
  auto lhs = [](std::uint64_t q, std::uint64_t m, std::uint64_t n, bool with_eps) {
    const auto fam = even_primitive_family(q);
    cd s = 0.0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const cd w = with_eps ? fam.root_numbers[static_cast<Eigen::Index>(i)] : cd(1.0);
      s += w * fam.members[i](m) * std::conj(fam.members[i](n));
    }
    return s;
  };
  CHECK(std::abs(lhs(5, 1, 1, false) - 1.0) < 1e-12);
  CHECK(orthogonality_rhs(5, 1, 1) == 1.0);
  CHECK(std::abs(lhs(5, 2, 3, false) - orthogonality_rhs(5, 2, 3)) < 1e-9);
  CHECK(std::abs(lhs(25, 7, 11, false) - orthogonality_rhs(25, 7, 11)) < 1e-9);

  CHECK(std::abs(lhs(5, 1, 1, true) - 1.0) < 1e-12);
  CHECK(std::abs(lhs(13, 2, 1, true) - eps_orthogonality_rhs(13, 2, 1)) < 1e-8);
  CHECK(std::abs(lhs(16, 3, 2, true)) < 1e-12);  // chi(2) = 0 on both sides of the pairing
  CHECK(std::abs(lhs(16, 3, 5, true) - eps_orthogonality_rhs(16, 3, 5)) < 1e-8);
  CHECK_THROWS_AS(eps_orthogonality_rhs(16, 3, 2), DomainError);
}

TEST_CASE("all-characters root-number sum") {
  CHECK(std::abs(gauss_sum(enumerate_characters(2)[0]) - cd(-1.0)) < 1e-15);
  for (std::uint64_t w : {1ull, 2ull, 7ull, 9ull, 12ull, 16ull, 25ull}) {
    const auto chars = enumerate_characters(w);
    for (std::uint64_t m = 1; m <= 10; ++m)
      for (std::uint64_t n = 1; n <= 10; ++n) {
        if (std::gcd(m * n, w) != 1) continue;
        cd s = 0.0;
        for (const auto& chi : chars) s += std::conj(gauss_sum(chi)) / std::sqrt(double(w)) * chi(m) * std::conj(chi(n));
        REQUIRE(std::abs(s - all_characters_rhs(w, m, n)) < 1e-9);
      }
  }
}
