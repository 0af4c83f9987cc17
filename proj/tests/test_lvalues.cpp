#include <doctest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>

#include "mollify/lvalues.hpp"

using namespace mollify;
using namespace mollify::lvalues;
using characters::even_primitive_family;

namespace {

constexpr double kPi = std::numbers::pi;

// eta(s) = (1 - 2^{1-s}) zeta(s) via the Borwein acceleration of the alternating series.
double zeta_via_eta(double s) {
  const int n = 40;
  std::vector<double> d(n + 1);
  double term = 1.0 / n, acc = term;
  d[0] = acc;
  for (int i = 1; i <= n; ++i) {
    term *= 4.0 * (n + i - 1) * (n - i + 1) / ((2.0 * i - 1) * (2.0 * i));
    acc += term;
    d[i] = acc;
  }
  double e = 0.0;
  for (int k = 0; k < n; ++k) e += (k % 2 ? -1.0 : 1.0) * (d[n] - d[k]) / std::pow(k + 1.0, s);
  e = -e / d[n];
  return -e / (1.0 - std::pow(2.0, 1.0 - s));
}

}  // namespace

TEST_CASE("log gamma and digamma") {
  for (double x : {0.1, 0.25, 0.5, 1.0, 2.5, 7.0, 33.3}) {
    CHECK(log_gamma(cd(x, 0.0)).real() == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
    CHECK(digamma(x) == doctest::Approx(boost::math::digamma(x)).epsilon(1e-13));
  }
  for (double t : {0.5, 3.0, 10.0, 40.0}) {
    const double m = std::norm(gamma(cd(0.5, t)));
    CHECK(m == doctest::Approx(kPi / std::cosh(kPi * t)).epsilon(1e-11));
  }
  const double psi14 = -kEulerGamma - 3.0 * std::log(2.0) - kPi / 2.0;
  CHECK(std::abs(digamma(0.25) - psi14) < 1e-13);
  CHECK(digamma(-0.5) == doctest::Approx(boost::math::digamma(-0.5)).epsilon(1e-12));
}

TEST_CASE("Hurwitz zeta") {
  CHECK(std::abs(hurwitz_zeta(cd(2.0), 1.0) - kPi * kPi / 6.0) < 1e-12);
  const double z12 = zeta_via_eta(0.5);
  CHECK(std::abs(z12 - (-1.4603545088095868)) < 1e-12);
  CHECK(std::abs(hurwitz_zeta(0.5, 1.0) - z12) < 1e-12);
  CHECK(std::abs(hurwitz_zeta(cd(3.0), 0.5) - (8.0 - 1.0) * boost::math::zeta(3.0)) < 1e-12);
  CHECK_THROWS_AS(hurwitz_zeta(cd(1.0), 0.5), DomainError);
  // Critical line, |Im s| <= 10: compare against the Hurwitz identity sum_{a<k} zeta(s, a/k) = k^s zeta(s).
  for (double t : {0.0, 2.0, 7.5, 10.0}) {
    const cd s(0.5, t);
    const int k = 6;
    cd lhs = 0.0;
    for (int a = 1; a <= k; ++a) lhs += hurwitz_zeta(s, double(a) / k);
    const cd rhs = std::exp(s * std::log(double(k))) * hurwitz_zeta(s, 1.0);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("V1 against the incomplete gamma closed form") {
  const MellinKernel v1(KernelKind::V1);
  for (double x : {0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 3.0}) {
    const double exact = boost::math::gamma_q(0.25, kPi * x * x);
    CHECK(std::abs(v1(x) - exact) < 1e-11);
  }
  CHECK(std::abs(v1(10.0)) < 1e-6);
  // V1 = 1 - c x^{1/2} + ...; at x = 0.01 the value is about 0.853.
  CHECK(std::abs(v1(0.01) - 0.8533) < 1e-3);
  CHECK_THROWS_AS(v1(0.0), DomainError);
  CHECK(v1_tail_bound(2.0) >= v1(2.0));
}

TEST_CASE("kernel contour independence") {
  for (auto kind : {KernelKind::V1, KernelKind::V2, KernelKind::F}) {
    const MellinKernel a(kind, {.contour = 1.0});
    const MellinKernel b(kind, {.contour = 2.0});
    const MellinKernel c(kind, {.contour = 3.0});
    for (double x : {0.2, 0.5, 1.0, 1.7}) {
      CHECK(std::abs(a(x) - b(x)) < 1e-9);
      CHECK(std::abs(a(x) - c(x)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(MellinKernel(KernelKind::F, {.contour = 2.5}), DomainError);
  CHECK_THROWS_AS(MellinKernel(KernelKind::F, {.contour = 11.0}), DomainError);
}

TEST_CASE("F reflection and V2") {
  const MellinKernel f(KernelKind::F);
  CHECK(std::abs(f(1.0) - 0.5) < 1e-12);
  CHECK(std::abs(f(0.01) + f(100.0) - 1.0) < 1e-8);
  for (int i = 0; i < 50; ++i) {
    const double x = std::exp(-4.0 + 8.0 * i / 49.0);
    REQUIRE(std::abs(f(x) + f(1.0 / x) - 1.0) < 1e-8);
  }
  // Reference values from an independent arbitrary-precision line integral.
  CHECK(std::abs(f(2.0) - (-3.0379181411811259)) < 1e-9);
  CHECK(std::abs(f(10.0) - (-2.1387528741774686e-6)) < 1e-12);
  const MellinKernel v2(KernelKind::V2);
  CHECK(std::abs(v2(0.3) - (-6.7195506251010561)) < 1e-9);
  CHECK(std::abs(v2(0.05) - 0.71441062253826326) < 1e-9);
  CHECK(kernel_g(cd(0.0)) == cd(1.0));
  CHECK(std::abs(kernel_g(cd(0.5))) < 1e-15);
  CHECK(std::abs(kernel_g(cd(8.5))) < 1e-12);
}

TEST_CASE("AFE against Hurwitz") {
  for (std::uint64_t q : {5ull, 8ull, 13ull, 29ull, 97ull, 100ull}) {
    auto fam = even_primitive_family(q);
    auto fh = fam;
    fill_l_values(fam, LRoute::Afe);
    fill_l_values(fh, LRoute::Hurwitz);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(fam.conj_index[i]);
      REQUIRE(std::abs(fam.l_values[ii] - fh.l_values[ii]) < 1e-8);
      REQUIRE(std::abs(fh.l_values[jj] - std::conj(fh.l_values[ii])) < 1e-12);
      REQUIRE(std::abs(fam.l_values[jj] - std::conj(fam.l_values[ii])) < 1e-10);
      REQUIRE(std::abs(std::conj(fam.root_numbers[ii]) * fh.l_values[ii] - fh.l_values[jj]) < 1e-8);
    }
  }
  const auto f5 = even_primitive_family(5);
  const cd l5 = l_value_hurwitz(f5.members[0]);
  CHECK(std::abs(l5.imag()) < 1e-13);
  CHECK(l5.real() > 0.0);
  AfeConfig tight;
  tight.max_terms = 3;
  CHECK_THROWS_AS(l_value_afe(f5.members[0], f5.root_numbers[0], tight), ConfigError);
  CHECK_THROWS_AS(l_value_hurwitz(characters::enumerate_characters(9)[0]), PreconditionError);
}
