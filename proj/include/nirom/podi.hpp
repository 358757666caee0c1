#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nirom/interpolation.hpp"
#include "nirom/numerics.hpp"

namespace nirom::podi {

/// One full-order output column per parameter point.
struct ParametricSnapshotSet {
  std::vector<Vector> parameters;
  Matrix snapshots;  ///< dofs x samples

  /// Throws DomainError on count mismatch, mixed dimensions, non-finite data,
  /// or two parameters closer than 1e-12.
  void validate() const;
  Eigen::Index dof_count() const { return snapshots.rows(); }
  std::size_t size() const { return parameters.size(); }
};

enum class Scheme {
  Auto,    ///< spline for one parameter, rbf otherwise
  Spline,  ///< not-a-knot cubic spline, one parameter only
  Rbf,     ///< thin-plate spline with linear tail
};

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

struct Model {
  Matrix basis;            ///< U_N, dofs x N
  Vector singular_values;  ///< full spectrum of the snapshot matrix
  Matrix coefficients;     ///< U_N^T X, N x samples
  std::vector<Vector> parameters;
  Vector param_lower;  ///< bounding box of the training parameters
  Vector param_upper;
  Scheme scheme = Scheme::Auto;  ///< resolved scheme, never Auto
  std::optional<interp::CubicSpline> spline;
  std::optional<interp::ThinPlateRbf> rbf;
  std::shared_ptr<std::atomic<bool>> clamp_warned = std::make_shared<std::atomic<bool>>(false);

  std::size_t rank() const { return static_cast<std::size_t>(basis.cols()); }
  Eigen::Index param_dim() const { return param_lower.size(); }
};

Model build(const ParametricSnapshotSet& set, const RankSpec& rank, Scheme scheme = Scheme::Auto);

/// Interpolated reduced coefficients at mu. Points outside the training
/// bounding box are clamped to it; the first clamp logs a warning and
/// `clamped` (when given) reports it per call.
Vector coefficients(const Model& model, const Vector& mu, bool* clamped = nullptr);

/// U_N times the interpolated coefficients.
Vector evaluate(const Model& model, const Vector& mu, bool* clamped = nullptr);

struct DecayEntry {
  std::size_t index = 0;  ///< 1-based
  double sigma = 0.0;
  double normalized = 0.0;  ///< sigma / sigma_1
};

/// Singular values divided by the largest. An all-zero spectrum reports 1
/// followed by zeros.
std::vector<DecayEntry> decay_report(const Vector& sigma);
inline std::vector<DecayEntry> decay_report(const Model& model) { return decay_report(model.singular_values); }

/// index,sigma,sigma_normalized with a schema comment.
void write_decay_csv(const std::filesystem::path& path, const std::vector<DecayEntry>& decay);

/// Directory layout: manifest.csv (id, mu_0.., file) and fields/<id>.csv,
/// one value per line.
void write_snapshot_set(const std::filesystem::path& dir, const ParametricSnapshotSet& set);
ParametricSnapshotSet read_snapshot_set(const std::filesystem::path& dir);

}  // namespace nirom::podi
