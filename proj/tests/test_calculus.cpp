#include <doctest.h>

#include <random>

#include "mollify/calculus.hpp"
#include "synthetic.hpp"

using namespace mollify;
using namespace mollify::calculus;
using testsupport::cd;
using testsupport::grid_sup;
using testsupport::realized_moment_set;

namespace {

MomentSetd ms5(cd m, cd n, double mm, cd mn, double nn) {
  MomentSetd s;
  s.psi_m = m;
  s.psi_n = n;
  s.psi_mm = mm;
  s.psi_mn = mn;
  s.psi_nn = nn;
  return s;
}

}  // namespace

TEST_CASE("beta") {
  CHECK(beta(cd(0.0), 0.0) == 0.0);
  CHECK(beta(cd(1.0), 4.0) == 0.25);
  CHECK(beta(cd(0.0, 3.0), 9.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(beta(cd(1.0), -1.0), PreconditionError);
}

TEST_CASE("alpha_opt examples") {
  const auto a = ms5(1, 1, 3, 1, 2);
  CHECK(std::abs(alpha_opt(a) - cd(2.0)) < 1e-15);
  CHECK(beta_combined(a, cd(2.0)) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(std::abs(grid_sup(a, 10.0) - 0.6) < 1e-9);
  const auto [f1, f2] = beta_closed_forms(a);
  CHECK(f1 == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(f2 == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(beta_combined(a, cd(0.0)) == doctest::Approx(1.0 / 3.0));

  const auto b = ms5(1, 0, 2, 1, 1);
  CHECK(std::abs(alpha_opt(b) - cd(-1.0)) < 1e-15);
  CHECK(beta_combined(b, alpha_opt(b)) == doctest::Approx(1.0).epsilon(1e-15));

  const auto d = ms5(1, 1, 2, 2, 2);
  try {
    (void)alpha_opt(d);
    CHECK(false);
  } catch (const DegenerateCombination& e) {
    CHECK(e.kind == Degeneracy::Flat);
  }
  for (double t : {-3.0, -0.5, 0.0, 2.0}) CHECK(beta_combined(d, cd(t, 0.7)) == doctest::Approx(0.5));
  CHECK(beta_combined(d, cd(-1.0)) == 0.0);
  CHECK_THROWS_AS(alpha_opt(ms5(0, 1, 1, 0, 1)), DegenerateCombination);
  CHECK_THROWS_AS(alpha_opt(ms5(1, 1, 1, 0, 0)), DegenerateCombination);
}

TEST_CASE("domination criterion") {
  const auto same = ms5(1, 1, 2, 2, 2);
  const auto r = criterion_dominates(same, 0.0);
  CHECK(r.holds);
  CHECK(r.implication_ok);
  CHECK(r.beta_n == doctest::Approx(beta_m(same)));
  const auto f = criterion_dominates(ms5(1, 1, 3, 1, 2), 0.0);
  CHECK_FALSE(f.holds);
  CHECK(f.lhs == 1.0);
  CHECK(f.rhs == 3.0);
  CHECK_THROWS_AS(criterion_dominates(same, 0.1), DomainError);
  CHECK_THROWS_AS(criterion_dominates(same, -0.01), DomainError);
}

TEST_CASE("classify examples") {
  const auto a = classify(ms5(1, 1, 3, 1, 2), 0.3);
  CHECK(a.verdict == Verdict::EfficientGain);
  CHECK(a.certified);
  CHECK(a.beta_combined - a.beta_m == doctest::Approx(4.0 / 15.0).epsilon(1e-12));

  const auto b = classify(ms5(1, 0.5, 2, 1, 1), 0.01);
  CHECK(b.verdict == Verdict::NotImprovable);
  CHECK(std::abs(grid_sup(b.inputs, 10.0) - 0.5) < 1e-9);

  const auto c = classify(ms5(1, 0.01, 1.25, 0.05, 1), 0.01);
  CHECK(c.verdict == Verdict::WeakNoGain);
  CHECK(c.certified);
  const double bm = 1.0 / 1.25;
  CHECK(grid_sup(c.inputs, 10.0 * std::abs(*c.alpha1) + 10.0) - bm <= 5 * 0.01 * bm + 1e-9);

  CHECK(classify(ms5(1, 1, 2, 2, 2), 0.05).verdict == Verdict::Flat);
  CHECK(classify(ms5(0, 1, 1, 0, 1), 0.05).verdict == Verdict::Degenerate);
  CHECK(classify(ms5(1, 1, 3, 1, 2), 0.0).verdict == Verdict::Improvable);
  CHECK_THROWS_AS(classify(ms5(1, 1, 1, 2, 1), 0.1), PreconditionError);
  CHECK_THROWS_AS(classify(ms5(1, 1, 3, 1, 2), 0.5), DomainError);
}

TEST_CASE("maximality and closed forms on realised moment sets") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  int tested = 0;
  for (int k = 0; k < 200; ++k) {
    const auto ms = realized_moment_set(rng);
    REQUIRE(ms.gram_feasible());
    REQUIRE(std::norm(ms.psi_m) <= ms.psi_mm * (1 + 1e-9));
    cd a1;
    try {
      a1 = alpha_opt(ms);
    } catch (const DegenerateCombination&) {
      continue;
    }
    ++tested;
    const double best = beta_combined(ms, a1);
    for (int i = 0; i < 500; ++i) {
      const double r = 10.0 * std::abs(g(rng));
      REQUIRE(beta_combined(ms, cd(r * g(rng), r * g(rng))) <= best + 1e-9);
    }
    const auto [f1, f2] = beta_closed_forms(ms);
    REQUIRE(std::abs(f1 - best) < 1e-10);
    REQUIRE(std::abs(f2 - best) < 1e-10);
    REQUIRE(best >= std::max(beta_m(ms), beta_n(ms)) - 1e-9);
  }
  CHECK(tested > 150);
}

TEST_CASE("Gram positivity under the quantitative hypothesis") {
  std::mt19937_64 rng(99);
  int hits = 0;
  for (int k = 0; k < 400; ++k) {
    const auto ms = realized_moment_set(rng);
    for (double delta : {0.01, 0.05, 0.2}) {
      if (std::abs(flat_defect(ms)) >= delta * std::abs(ms.psi_m) * ms.psi_nn) {
        ++hits;
        REQUIRE(ms.gram() >= delta * delta * std::norm(ms.psi_m) * ms.psi_nn - 1e-9);
      }
    }
  }
  CHECK(hits > 100);
}

TEST_CASE("scaling invariance") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto ms = realized_moment_set(rng);
    const auto sc = ms.rescaled(cd(3.0, -1.0), cd(-0.5, 2.0));
    CHECK(beta_m(sc) == doctest::Approx(beta_m(ms)).epsilon(1e-12));
    try {
      const double b1 = beta_combined(ms, alpha_opt(ms));
      const double b2 = beta_combined(sc, alpha_opt(sc));
      REQUIRE(std::abs(b1 - b2) < 1e-10 * std::max(1.0, b1));
    } catch (const DegenerateCombination&) {
    }
  }
}

TEST_CASE("domination implication end to end") {
  std::mt19937_64 rng(17);
  int holds = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto ms = realized_moment_set(rng, 1);
    for (double delta : {0.0, 0.01, 0.05}) {
      const auto r = criterion_dominates(ms, delta);
      if (r.holds) {
        ++holds;
        REQUIRE(r.beta_n <= (1 + 4 * delta) * beta_m(ms) + 1e-9);
      }
    }
  }
  CHECK(holds > 50);
}

TEST_CASE("classify bounds against grid search") {
  std::mt19937_64 rng(31);
  int eff = 0, weak = 0;
  for (int k = 0; k < 4000 && (eff < 30 || weak < 30); ++k) {
    const auto ms = realized_moment_set(rng);
    const auto rep = classify(ms, 0.2);
    REQUIRE(rep.certified);
    if (!rep.alpha1) continue;
    const double sup = grid_sup(ms, 10.0 * std::abs(*rep.alpha1) + 10.0, 61);
    REQUIRE(sup <= rep.beta_combined + 1e-9);
    const double gain = sup - rep.beta_m;
    switch (rep.verdict) {
      case Verdict::EfficientGain: ++eff; REQUIRE(gain >= std::pow(0.2, 4) * rep.beta_n - 1e-9); break;
      case Verdict::EfficientNoGain: ++eff; REQUIRE(gain <= 0.04 * rep.beta_n / rep.beta_m + 1e-9); break;
      case Verdict::WeakGain: ++weak; REQUIRE(gain >= 0.05 * rep.beta_m - 1e-9); break;
      case Verdict::WeakNoGain: ++weak; REQUIRE(gain <= 1.0 * rep.beta_m + 1e-9); break;
      default: break;
    }
  }
  CHECK(eff >= 30);
  CHECK(weak >= 30);
}

TEST_CASE("optimize_in_class") {
  Eigen::VectorXcd v1(1);
  v1 << 2.0;
  Eigen::MatrixXcd A1(1, 1);
  A1 << 4.0;
  const auto o1 = optimize_in_class<double>(v1, A1);
  CHECK(o1.beta_max == doctest::Approx(1.0));

  Eigen::VectorXcd v(2);
  v << 1.0, 0.0;
  Eigen::MatrixXcd A(2, 2);
  A << 2.0, 1.0, 1.0, 2.0;
  const auto o = optimize_in_class<double>(v, A);
  CHECK(o.beta_max == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(o.c[0] / o.c[1] - cd(-2.0)) < 1e-12);
  double best = 0;
  for (int i = 0; i < 20000; ++i) {
    const double t = M_PI * i / 20000.0;
    Eigen::VectorXcd c(2);
    c << std::cos(t), std::sin(t);
    best = std::max(best, std::norm(c.dot(v)) / std::real(c.dot(A * c)));
  }
  CHECK(std::abs(best - 2.0 / 3.0) < 1e-6);

  // Duplicate basis element: rank-deficient path, same optimum.
  Eigen::VectorXcd vd(3);
  vd << 1.0, 0.0, 1.0;
  Eigen::MatrixXcd Ad(3, 3);
  Ad << 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
  const auto od = optimize_in_class<double>(vd, Ad);
  CHECK(od.rank == 2);
  CHECK(od.beta_max == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(stationarity_residual<double>(vd, Ad, od.c) < 1e-12);

  Eigen::VectorXcd bad(2);
  bad << 1.0, 1.0;
  Eigen::MatrixXcd sing(2, 2);
  sing << 1.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(optimize_in_class<double>(bad, sing), DegenerateCombination);
}

TEST_CASE("template works for long double") {
  MomentSet<long double> m;
  m.psi_m = 1;
  m.psi_n = 1;
  m.psi_mm = 3;
  m.psi_mn = 1;
  m.psi_nn = 2;
  CHECK(std::abs(alpha_opt(m) - std::complex<long double>(2)) < 1e-18L);
}
