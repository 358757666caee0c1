#pragma once

#include <memory>
#include <string>

#include "nirom/box.hpp"
#include "nirom/dmd.hpp"
#include "nirom/geometry_ffd.hpp"
#include "nirom/numerics.hpp"

namespace nirom {

/// Full-order model stand-in. Parameters are physical coordinates inside
/// box(). Evaluations must be deterministic functions of mu and safe to call
/// from several threads at once.
class ParametricOracle {
 public:
  virtual ~ParametricOracle() = default;

  virtual std::string name() const = 0;
  virtual const ParameterBox& box() const = 0;

  /// Scalar objective f(mu).
  virtual double value(const Vector& mu) const = 0;

  virtual bool has_gradient() const { return false; }
  /// df/dmu in physical coordinates.
  virtual Vector gradient(const Vector& mu) const;

  virtual bool has_field() const { return false; }
  /// Steady output field s(mu).
  virtual Vector field(const Vector& mu) const;

  virtual bool time_resolved() const { return false; }
  /// `samples` states at t = 0, dt, 2 dt, ... converging to the regime field.
  virtual dmd::SnapshotSeries time_series(const Vector& mu, std::size_t samples, double dt) const;

  /// The scalar objective computed from a field, so surrogates of the field
  /// induce surrogates of f.
  virtual double functional(const Vector& field) const;
};

/// Trapezoid rule on the uniform grid of [0, 1] with field.size() points.
double trapezoid_mean(const Vector& field);

/// f = h(a^T m) + eps |B^T m|^2 in normalized coordinates m, with
/// h(t) = 2 + 0.8 (t - 0.4)^2 + 0.3 t^4 and B an orthonormal basis of the
/// complement of a. The field on a uniform grid of [0, 1] is
/// f + 0.3 tanh(t) cos(pi x) + eps sum_l z_l cos((2 + l) pi x), whose
/// trapezoid mean is f.
class RidgeDragOracle : public ParametricOracle {
 public:
  struct Settings {
    Vector direction;  ///< a (normalized internally); default (0.6, 0.55, 0.5, 0.45, 0.4)
    double leakage = 0.05;
    double half_width = 0.2;  ///< physical box [-w, w]^P
    Eigen::Index grid = 2000;
  };

  RidgeDragOracle();
  explicit RidgeDragOracle(Settings settings);

  std::string name() const override { return "ridge-drag"; }
  const ParameterBox& box() const override { return box_; }
  double value(const Vector& mu) const override;
  bool has_gradient() const override { return true; }
  Vector gradient(const Vector& mu) const override;
  bool has_field() const override { return true; }
  Vector field(const Vector& mu) const override;
  double functional(const Vector& field) const override { return trapezoid_mean(field); }

  const Vector& direction() const { return a_; }
  const Matrix& complement() const { return b_; }
  /// Minimizer of h over the achievable range and the physical point a t*.
  double ridge_minimizer() const;
  Vector argmin() const;
  double minimum() const;

  static double profile(double t);
  static double profile_derivative(double t);

 private:
  Settings settings_;
  ParameterBox box_;
  Vector a_;
  Matrix b_;
  Vector grid_;
};

/// Linear relaxation toward a parameter-dependent regime field on a uniform
/// grid of [0, 1]:
///   x(t) = r(mu) - sum_k exp(-kappa_k t) g_k(mu) sin(k pi x),  k = 1..3,
/// with r = 1 + 0.5 mu_0 x + 0.3 mu_1 sin(pi x) + 0.2 mu_2^2 cos(2 pi x).
/// The objective is the trapezoid mean of r, known in closed form.
class HeatRegimeOracle : public ParametricOracle {
 public:
  explicit HeatRegimeOracle(Eigen::Index grid = 200);

  std::string name() const override { return "heat-regime"; }
  const ParameterBox& box() const override { return box_; }
  double value(const Vector& mu) const override;
  bool has_field() const override { return true; }
  Vector field(const Vector& mu) const override;
  bool time_resolved() const override { return true; }
  dmd::SnapshotSeries time_series(const Vector& mu, std::size_t samples, double dt) const override;
  double functional(const Vector& field) const override { return trapezoid_mean(field); }

  /// The state at time t.
  Vector state(const Vector& mu, double t) const;

 private:
  ParameterBox box_;
  Vector grid_;
};

/// Deforms a UV sphere inside a 3x3x3 lattice with five control-point
/// displacements and scores the enclosed volume. The field is the flattened
/// vertex coordinates.
class GeoDemoOracle : public ParametricOracle {
 public:
  GeoDemoOracle();

  std::string name() const override { return "geo-demo"; }
  const ParameterBox& box() const override { return box_; }
  double value(const Vector& mu) const override;
  bool has_field() const override { return true; }
  Vector field(const Vector& mu) const override;
  double functional(const Vector& field) const override;

  const ffd::TriMesh& mesh() const { return mesh_; }
  const ffd::Lattice& lattice() const { return lattice_; }
  const ffd::GeoParamMap& parameter_map() const { return map_; }

 private:
  ffd::TriMesh mesh_;
  ffd::Lattice lattice_;
  ffd::GeoParamMap map_;
  ParameterBox box_;
};

/// f = c and field = c everywhere.
class ConstantOracle : public ParametricOracle {
 public:
  ConstantOracle(Eigen::Index dim, double constant, Eigen::Index grid = 16);
  std::string name() const override { return "constant"; }
  const ParameterBox& box() const override { return box_; }
  double value(const Vector&) const override { return c_; }
  bool has_gradient() const override { return true; }
  Vector gradient(const Vector& mu) const override { return Vector::Zero(mu.size()); }
  bool has_field() const override { return true; }
  Vector field(const Vector&) const override { return Vector::Constant(grid_, c_); }
  double functional(const Vector& field) const override { return trapezoid_mean(field); }

 private:
  ParameterBox box_;
  double c_;
  Eigen::Index grid_;
};

/// Affine field s(mu) = v_0 + sum_i mu_i v_i with smooth fixed profiles;
/// f is its trapezoid mean.
class LinearOracle : public ParametricOracle {
 public:
  explicit LinearOracle(Eigen::Index dim, Eigen::Index grid = 64);
  std::string name() const override { return "linear"; }
  const ParameterBox& box() const override { return box_; }
  double value(const Vector& mu) const override { return functional(field(mu)); }
  bool has_field() const override { return true; }
  Vector field(const Vector& mu) const override;
  double functional(const Vector& field) const override { return trapezoid_mean(field); }

 private:
  ParameterBox box_;
  Matrix profiles_;  ///< grid x (dim + 1)
};

struct OracleOptions {
  double leakage = 0.05;    ///< ridge-drag inactive leakage
  Eigen::Index dim = 3;     ///< constant and linear oracles
  double constant = 1.0;    ///< constant oracle value
};

/// Builds a shipped oracle by name: ridge-drag, heat-regime, geo-demo,
/// constant, linear. Throws ConfigError for unknown names.
std::unique_ptr<ParametricOracle> make_oracle(const std::string& name, const OracleOptions& options = {});

}  // namespace nirom
