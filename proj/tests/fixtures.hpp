#pragma once

// Shared synthetic data for the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nirom/dmd.hpp"

namespace nirom::testing {

struct LinearSystem {
  Matrix generator;
  ComplexVector eigenvalues;
  dmd::SnapshotSeries series;
};

/// Random n x n real generator with distinct eigenvalues, spectral radius in
/// [0.3, 1.05], and a trajectory of 2n + 2 snapshots from a random start.
inline LinearSystem random_linear_system(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<complex> eigs;
  auto far_enough = [&](complex z) {
    for (const auto& e : eigs)
      if (std::abs(e - z) < 0.08) return false;
    return true;
  };
  Matrix block = Matrix::Zero(n, n);
  int i = 0;
  while (i < n) {
    const double radius = 0.3 + 0.75 * u(rng);
    if (i + 1 < n && u(rng) < 0.5) {
      const double angle = 0.2 + 2.5 * u(rng);
      const complex z = std::polar(radius, angle);
      if (!far_enough(z) || !far_enough(std::conj(z))) continue;
      eigs.push_back(z);
      eigs.push_back(std::conj(z));
      block(i, i) = z.real();
      block(i, i + 1) = -z.imag();
      block(i + 1, i) = z.imag();
      block(i + 1, i + 1) = z.real();
      i += 2;
    } else {
      const double z = (u(rng) < 0.5 ? -1.0 : 1.0) * radius;
      if (!far_enough(z)) continue;
      eigs.emplace_back(z, 0.0);
      block(i, i) = z;
      i += 1;
    }
  }
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = nd(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector scale(n);
  for (int r = 0; r < n; ++r) scale[r] = 1.0 + u(rng);
  const Matrix s = q * scale.asDiagonal();
  LinearSystem sys;
  sys.generator = s * block * s.inverse();
  sys.eigenvalues = Eigen::Map<ComplexVector>(eigs.data(), n);
  const int m = 2 * n + 2;
  sys.series.data.resize(n, m);
  Vector x(n);
  for (int r = 0; r < n; ++r) x[r] = nd(rng);
  for (int k = 0; k < m; ++k) {
    sys.series.data.col(k) = x;
    x = sys.generator * x;
  }
  return sys;
}

/// Worst relative error after matching each true eigenvalue to its nearest
/// unused estimate.
inline double max_relative_eigenvalue_error(const ComplexVector& truth, const ComplexVector& estimate) {
  std::vector<bool> used(static_cast<std::size_t>(estimate.size()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    double best = INFINITY;
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < estimate.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(truth[i] - estimate[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best_j < 0) return INFINITY;
    used[static_cast<std::size_t>(best_j)] = true;
    worst = std::max(worst, best / std::abs(truth[i]));
  }
  return worst;
}

/// Field x_k[j] = 5 + 0.9^k cos(k/2 + 0.3 j) on 8 points; regime limit 5.
inline dmd::SnapshotSeries damped_oscillation(int samples) {
  dmd::SnapshotSeries s;
  s.data.resize(8, samples);
  for (int k = 0; k < samples; ++k)
    for (int j = 0; j < 8; ++j) s.data(j, k) = 5.0 + std::pow(0.9, k) * std::cos(k / 2.0 + 0.3 * j);
  return s;
}

}  // namespace nirom::testing
