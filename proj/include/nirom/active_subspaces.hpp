#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nirom/box.hpp"
#include "nirom/interpolation.hpp"
#include "nirom/numerics.hpp"

namespace nirom::as {

/// One gradient observation. `mu` and `grad` are in normalized coordinates.
struct GradientSample {
  Vector mu;
  Vector grad;
  double value = 0.0;
};

/// Fixed active dimension, or the largest normalized spectral gap.
class DimSpec {
 public:
  static DimSpec fixed(std::size_t m) { return DimSpec(m); }
  static DimSpec spectral_gap() { return DimSpec(0); }
  bool is_fixed() const { return m_ > 0; }
  std::size_t count() const { return m_; }

 private:
  explicit DimSpec(std::size_t m) : m_(m) {}
  std::size_t m_;
};

struct ActiveSubspace {
  Vector eigenvalues;   ///< non-increasing, clamped at 0
  Matrix eigenvectors;  ///< W = [W1 W2], orthonormal
  std::size_t active_dim = 0;
  Matrix w1;
  Matrix w2;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

/// C = (1/K) sum_k g_k g_k^T, symmetrized.
Matrix estimate_covariance(const std::vector<GradientSample>& samples);

/// Eigendecomposition of the covariance partitioned at M. The gap rule picks
/// M = argmax_i (lambda_i - lambda_{i+1}) / lambda_1, smallest i on ties, and
/// throws NumericError when every gap vanishes (isotropic or zero spectrum).
ActiveSubspace fit_subspace(const Matrix& c, const DimSpec& spec);

/// Active variable W1^T mu.
Vector project(const ActiveSubspace& as, const Vector& mu);

/// Scalar objective in normalized coordinates. `gradient` is optional and
/// returns d f / d mu_normalized.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

enum class GradientScheme { Analytic, CentralFd, LocalLinear };

GradientScheme parse_scheme(const std::string& name);
std::string scheme_name(GradientScheme scheme);

struct GradientOptions {
  GradientScheme scheme = GradientScheme::CentralFd;
  double step = 1e-4;        ///< central-difference step in normalized coordinates
  std::size_t neighbors = 0; ///< local-linear neighbourhood size; 0 means 2P + 1
  std::size_t workers = 1;
};

/// Gradients at the given normalized points using the analytic or central-fd
/// scheme. Central differences need every coordinate within [-1 + h, 1 - h].
/// Oracle failures are rethrown with the offending point attached.
std::vector<GradientSample> estimate_gradients(const Objective& f, const std::vector<Vector>& mus,
                                               const GradientOptions& options);

/// Local-linear gradients from scattered values: for every sample, a least
/// squares affine fit over its `neighbors` nearest samples (itself included).
std::vector<GradientSample> local_linear_gradients(const std::vector<Vector>& mus, const std::vector<double>& values,
                                                   std::size_t neighbors = 0);

/// Output of sample_active. All vectors are per-sample and index aligned.
struct ActiveSamples {
  std::vector<Vector> normalized;
  std::vector<Vector> physical;
  std::vector<Vector> active;  ///< W1^T mu of the accepted point
  std::vector<bool> fallback;  ///< rejection failed and the deterministic fallback was used
  Vector range_lower;          ///< achievable active range per active direction
  Vector range_upper;
};

/// Achievable range of W1^T mu over [-1, 1]^P, per active direction.
std::pair<Vector, Vector> active_range(const ActiveSubspace& as);

/// A point of [-1, 1]^P with active coordinates y: the minimum-norm point
/// W1 y when it lies in the cube, otherwise (M = 1) the point on the ray
/// through W1 that reaches y, or (M > 1) W1 y clipped to the cube.
Vector lift(const ActiveSubspace& as, const Vector& y);

/// Draws n points whose active coordinates stratify the achievable range.
/// For M = 1 the targets are evenly spaced from the range minimum to its
/// maximum; for M = 2, 3 they are Halton points over the range box. The
/// inactive part is drawn by rejection (1000 tries), with a deterministic
/// fallback onto the box when every try lands outside.
ActiveSamples sample_active(const ActiveSubspace& as, const ParameterBox& box, std::size_t n, std::uint64_t seed);

/// One-dimensional response surface g(W1^T mu) for M = 1.
class RidgeSurrogate {
 public:
  RidgeSurrogate(Vector direction, interp::CubicSpline spline)
      : direction_(std::move(direction)), spline_(std::move(spline)) {}
  double operator()(double y) const { return spline_(y)[0]; }
  double at(const Vector& mu) const { return (*this)(direction_.dot(mu)); }
  double lower() const { return spline_.lower(); }
  double upper() const { return spline_.upper(); }

 private:
  Vector direction_;
  interp::CubicSpline spline_;
};

/// Fits g on the projected training set; duplicate y values are averaged.
/// Needs M = 1 and at least four distinct projected values.
RidgeSurrogate surrogate_g(const ActiveSubspace& as, const std::vector<Vector>& mus, const std::vector<double>& values);

/// index, eigenvalue, eigenvalue / eigenvalue_0
void write_spectrum_csv(const std::filesystem::path& path, const ActiveSubspace& as);
/// One row per parameter, one column per active direction.
void write_w1_csv(const std::filesystem::path& path, const ActiveSubspace& as);

/// Gradient ledger: mu_0..mu_{P-1}, f, grad_0..grad_{P-1}.
void write_gradient_ledger(const std::filesystem::path& path, const std::vector<GradientSample>& samples);
std::vector<GradientSample> read_gradient_ledger(const std::filesystem::path& path);

}  // namespace nirom::as
