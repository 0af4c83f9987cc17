#pragma once

#include <complex>
#include <random>

#include "mollify/calculus.hpp"

namespace testsupport {

using cd = std::complex<double>;
using mollify::MomentSetd;

/// Moment set realised from explicit random value vectors; `shape` steers the pair's correlation.
inline MomentSetd realized_moment_set(std::mt19937_64& rng, int shape = -1) {
  std::uniform_int_distribution<int> dim(2, 9), pick(0, 4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  const int n = dim(rng);
  const int s = shape < 0 ? pick(rng) : shape;
  Eigen::VectorXcd a(n), b(n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = uw(rng);
    a[i] = cd(1.0 + g(rng), g(rng));
    b[i] = cd(g(rng), g(rng));
  }
  switch (s) {
    case 1:  // strongly correlated
      b = cd(g(rng), g(rng)) * a + 0.05 * b;
      break;
    case 2: {  // N with tiny first moment
      const cd mean = (w.cast<cd>().array() * b.array()).sum() / w.sum();
      b.array() -= mean * (1.0 - 1e-3 * std::abs(g(rng)));
      break;
    }
    case 3:  // N nearly orthogonal to M's first moment direction
      b = 0.1 * a + b;
      break;
    default:
      break;
  }
  return mollify::moments_from_values<double>(a, b, w);
}

/// sup over alpha of beta(M + alpha N) by a polar grid refined around the best point.
inline double grid_sup(const MomentSetd& ms, double radius, int n = 201) {
  double best = mollify::calculus::beta_combined(ms, cd(0.0));
  cd centre = 0.0;
  double h = 2.0 * radius / (n - 1);
  for (int pass = 0; pass < 8; ++pass) {
    cd next = centre;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cd a = centre + cd(-radius + i * h, -radius + j * h);
        const double v = mollify::calculus::beta_combined(ms, a);
        if (v > best) {
          best = v;
          next = a;
        }
      }
    centre = next;
    radius = 4 * h;
    h = 2.0 * radius / (n - 1);
  }
  return best;
}

}  // namespace testsupport
