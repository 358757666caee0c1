#include "nirom/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nirom/errors.hpp"

namespace nirom::dmd {

void SnapshotSeries::validate() const {
  if (data.cols() < 2) throw DomainError("dmd: need at least two snapshots");
  if (data.rows() < 1) throw DomainError("dmd: empty state dimension");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dmd: time step must be positive");
  if (!std::isfinite(t0)) throw DomainError("dmd: non-finite initial time");
  require_finite(data, "dmd snapshots");
}

std::pair<Matrix, Matrix> split_snapshots(const SnapshotSeries& series) {
  series.validate();
  const Eigen::Index m = series.data.cols();
  return {series.data.leftCols(m - 1), series.data.rightCols(m - 1)};
}

namespace {

complex integer_power(complex base, long long exponent) {
  if (exponent < 0) {
    if (base == complex(0.0, 0.0)) throw NumericError("dmd: zero eigenvalue raised to a negative power");
    base = 1.0 / base;
    exponent = -exponent;
  }
  complex result(1.0, 0.0);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

complex eigenvalue_power(const complex& lambda, double p) {
  const double rounded = std::round(p);
  if (std::abs(p - rounded) <= 1e-9 * std::max(1.0, std::abs(p)))
    return integer_power(lambda, static_cast<long long>(rounded));
  if (lambda == complex(0.0, 0.0))
    throw NumericError("dmd: zero eigenvalue evaluated at a non-integer time step");
  return std::exp(p * std::log(lambda));
}

}  // namespace

ComplexVector predict_complex(const Model& model, double t) {
  if (!std::isfinite(t)) throw DomainError("dmd predict: non-finite time");
  const double p = (t - model.t0) / model.dt;
  ComplexVector weights(model.eigenvalues.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    weights[i] = eigenvalue_power(model.eigenvalues[i], p) * model.amplitudes[i];
  return model.modes * weights;
}

Vector predict(const Model& model, double t) { return predict_complex(model, t).real(); }

Model fit(const SnapshotSeries& series, const RankSpec& rank, ModeKind kind) {
  const auto [x, y] = split_snapshots(series);
  if (x.cwiseAbs().maxCoeff() == 0.0) throw DomainError("dmd: zero snapshot matrix");

  SvdResult svd = truncated_svd(x, rank);
  const double cutoff = 1e-12 * svd.all_sigma[0];
  std::size_t r = 0;
  while (r < svd.rank && svd.sigma[static_cast<Eigen::Index>(r)] > cutoff) ++r;
  const auto rr = static_cast<Eigen::Index>(r);

  Model model;
  model.rank = r;
  model.basis = svd.u.leftCols(rr);
  model.singular_values = svd.sigma.head(rr);
  model.mode_kind = kind;
  model.dt = series.dt;
  model.t0 = series.t0;
  model.training_samples = static_cast<std::size_t>(series.samples());

  // Y V_r Sigma_r^-1 is shared by the reduced operator and the exact modes.
  const Matrix yv = y * svd.v.leftCols(rr) * model.singular_values.cwiseInverse().asDiagonal();
  model.reduced_operator = model.basis.transpose() * yv;

  const GeneralEigResult eig = general_eig(model.reduced_operator);
  model.eigenvalues = eig.eigenvalues;
  model.reduced_eigenvectors = eig.eigenvectors;

  if (kind == ModeKind::Exact) {
    model.modes = yv.cast<complex>() * eig.eigenvectors;
    // a zero eigenvalue annihilates its exact mode; fall back to the projected one
    const ComplexMatrix projected = model.basis.cast<complex>() * eig.eigenvectors;
    for (Eigen::Index j = 0; j < rr; ++j)
      if (model.modes.col(j).norm() <= 1e-14 * yv.norm()) model.modes.col(j) = projected.col(j);
  } else {
    model.modes = model.basis.cast<complex>() * eig.eigenvectors;
  }

  const ComplexVector x1 = series.data.col(0).cast<complex>();
  model.amplitudes = model.modes.completeOrthogonalDecomposition().solve(x1);
  model.amplitude_residual = (model.modes * model.amplitudes - x1).norm();

  double worst = 0.0;
  for (Eigen::Index k = 0; k < series.samples(); ++k) {
    const double t = series.t0 + static_cast<double>(k) * series.dt;
    worst = std::max(worst, (predict(model, t) - series.data.col(k)).norm());
  }
  model.fit_residual = worst;
  return model;
}

RegimeEstimate regime_value(const Model& model, double horizon, std::size_t window) {
  const double train_end = model.t0 + static_cast<double>(model.training_samples - 1) * model.dt;
  if (!(horizon > train_end))
    throw DomainError("dmd regime: horizon " + std::to_string(horizon) + " must exceed the training window end " +
                      std::to_string(train_end));
  if (window < 1) throw DomainError("dmd regime: window must hold at least one sample");

  const Eigen::Index n = model.modes.rows();
  RegimeEstimate out;
  Vector sum = Vector::Zero(n);
  Vector lo = Vector::Constant(n, INFINITY);
  Vector hi = Vector::Constant(n, -INFINITY);
  for (std::size_t j = 0; j < window; ++j) {
    const double t = horizon - static_cast<double>(window - 1 - j) * model.dt;
    const Vector state = predict(model, t);
    sum += state;
    lo = lo.cwiseMin(state);
    hi = hi.cwiseMax(state);
  }
  out.value = sum / static_cast<double>(window);
  out.spread = hi - lo;
  out.max_spread = out.spread.maxCoeff();

  double energy_max = 0.0;
  std::vector<double> energy(static_cast<std::size_t>(model.eigenvalues.size()));
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
    energy[static_cast<std::size_t>(i)] = std::abs(model.amplitudes[i]) * model.modes.col(i).norm();
    energy_max = std::max(energy_max, energy[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
    if (std::abs(model.eigenvalues[i]) > 1.0 + 1e-6 && energy[static_cast<std::size_t>(i)] > 1e-10 * energy_max)
      out.divergent = true;
  return out;
}

SnapshotSeries delay_embed(const SnapshotSeries& series, std::size_t depth) {
  series.validate();
  const Eigen::Index n = series.data.rows();
  const Eigen::Index m = series.data.cols();
  const auto d = static_cast<Eigen::Index>(depth);
  if (depth < 1 || m - d + 1 < 2)
    throw DomainError("dmd delay_embed: depth " + std::to_string(depth) + " leaves fewer than two samples");
  SnapshotSeries out;
  out.dt = series.dt;
  out.t0 = series.t0;
  out.data.resize(n * d, m - d + 1);
  for (Eigen::Index k = 0; k < m - d + 1; ++k)
    for (Eigen::Index lag = 0; lag < d; ++lag) out.data.col(k).segment(lag * n, n) = series.data.col(k + lag);
  return out;
}

}  // namespace nirom::dmd
