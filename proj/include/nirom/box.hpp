#pragma once

#include "nirom/numerics.hpp"

namespace nirom {

/// Axis-aligned parameter domain with the uniform density. All subspace
/// computations happen in normalized coordinates [-1, 1]^P.
class ParameterBox {
 public:
  ParameterBox(Vector lower, Vector upper);
  /// [-1, 1]^dim
  static ParameterBox symmetric(Eigen::Index dim, double half_width = 1.0);

  Eigen::Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Vector to_normalized(const Vector& physical) const;
  Vector to_physical(const Vector& normalized) const;
  /// d(physical)/d(normalized) per coordinate: (upper - lower) / 2.
  Vector half_widths() const { return 0.5 * (upper_ - lower_); }

  bool contains(const Vector& physical, double tol = 0.0) const;
  Vector clamp(const Vector& physical) const;

 private:
  Vector lower_;
  Vector upper_;
};

}  // namespace nirom
