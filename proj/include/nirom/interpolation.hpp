#pragma once

#include <vector>

#include "nirom/numerics.hpp"

namespace nirom::interp {

/// Piecewise cubic through strictly increasing knots with not-a-knot end
/// conditions, so any cubic polynomial is reproduced exactly. Three knots
/// give the interpolating parabola and two knots the line. Each column of
/// `values` is an independent channel sharing the same knots. Queries outside
/// the knot range are clamped to the end values.
class CubicSpline {
 public:
  CubicSpline(Vector knots, Matrix values);

  Vector operator()(double x) const;
  double lower() const { return knots_[0]; }
  double upper() const { return knots_[knots_.size() - 1]; }
  const Vector& knots() const { return knots_; }

 private:
  Vector knots_;
  Matrix values_;   ///< knots x channels
  Matrix second_;   ///< second derivatives at the knots
};

/// Thin-plate-spline radial basis interpolant r^2 log r with an appended
/// linear polynomial, so affine data are reproduced exactly. The saddle
/// system is solved with the pseudo-inverse to tolerate clustered centers.
class ThinPlateRbf {
 public:
  ThinPlateRbf(std::vector<Vector> centers, const Matrix& values, double cutoff = 1e-12);

  Vector operator()(const Vector& x) const;
  Eigen::Index dim() const { return dim_; }

 private:
  std::vector<Vector> centers_;
  Eigen::Index dim_ = 0;
  Matrix weights_;  ///< (n + dim + 1) x channels
};

double thin_plate_kernel(double r);

}  // namespace nirom::interp
