#pragma once

#include <utility>

#include "nirom/numerics.hpp"

namespace nirom::dmd {

/// Equispaced snapshots: column k is the state at t0 + k * dt.
struct SnapshotSeries {
  Matrix data;
  double dt = 1.0;
  double t0 = 0.0;

  /// Throws DomainError unless there are >= 2 columns, dt > 0, and all entries are finite.
  void validate() const;
  Eigen::Index samples() const { return data.cols(); }
};

enum class ModeKind {
  Exact,      ///< Y V_r Sigma_r^-1 W
  Projected,  ///< U_r W
};

struct Model {
  std::size_t rank = 0;
  Matrix basis;             ///< U_r, n x r
  Vector singular_values;   ///< Sigma_r
  Matrix reduced_operator;  ///< U_r^T Y V_r Sigma_r^-1, r x r
  ComplexVector eigenvalues;
  ComplexMatrix reduced_eigenvectors;  ///< W, with reduced_operator W = W diag(eigenvalues)
  ComplexMatrix modes;                 ///< Phi, n x r
  ComplexVector amplitudes;            ///< b, least squares Phi b ~ x_1
  ModeKind mode_kind = ModeKind::Exact;
  double dt = 1.0;
  double t0 = 0.0;
  std::size_t training_samples = 0;
  double amplitude_residual = 0.0;  ///< |Phi b - x_1|
  double fit_residual = 0.0;        ///< max_k |predict(t_k) - x_k| over the training window
};

/// X = columns 1..m-1, Y = columns 2..m.
std::pair<Matrix, Matrix> split_snapshots(const SnapshotSeries& series);

/// Fits a DMD model without forming the full n x n operator. The retained rank
/// is additionally capped at the numerical rank of X (cutoff 1e-12 * sigma_max).
Model fit(const SnapshotSeries& series, const RankSpec& rank, ModeKind kind = ModeKind::Exact);

/// Complex reconstruction Phi diag(lambda^p) b with p = (t - t0)/dt. Integral p
/// uses exact integer powers; otherwise the principal branch exp(p log lambda).
ComplexVector predict_complex(const Model& model, double t);

/// Real part of predict_complex.
Vector predict(const Model& model, double t);

struct RegimeEstimate {
  Vector value;            ///< mean over the window
  Vector spread;           ///< per-component max - min over the window
  double max_spread = 0.0;
  bool divergent = false;  ///< a retained mode with |lambda| > 1 + 1e-6 carries non-negligible energy
};

/// Mean of predict over `window` times spaced by dt and ending at `horizon`.
/// The horizon must lie past the training window.
RegimeEstimate regime_value(const Model& model, double horizon, std::size_t window);

/// Hankel (time-delay) embedding: stacks `depth` consecutive snapshots into one
/// state, turning an m-sample series into m - depth + 1 samples. Used to give a
/// scalar monitor enough state dimension for DMD.
SnapshotSeries delay_embed(const SnapshotSeries& series, std::size_t depth);

}  // namespace nirom::dmd
