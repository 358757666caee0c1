#include "nirom/box.hpp"

#include "nirom/errors.hpp"

namespace nirom {

ParameterBox::ParameterBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size())
    throw DomainError("parameter box: bounds must be non-empty and of equal length");
  if (!lower_.allFinite() || !upper_.allFinite()) throw DomainError("parameter box: non-finite bound");
  if (!(lower_.array() < upper_.array()).all()) throw DomainError("parameter box: need lower < upper componentwise");
}

ParameterBox ParameterBox::symmetric(Eigen::Index dim, double half_width) {
  return ParameterBox(Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width));
}

Vector ParameterBox::to_normalized(const Vector& physical) const {
  if (physical.size() != dim()) throw DomainError("parameter box: dimension mismatch");
  return (2.0 * (physical - lower_).array() / (upper_ - lower_).array() - 1.0).matrix();
}

Vector ParameterBox::to_physical(const Vector& normalized) const {
  if (normalized.size() != dim()) throw DomainError("parameter box: dimension mismatch");
  return (lower_.array() + (normalized.array() + 1.0) * 0.5 * (upper_ - lower_).array()).matrix();
}

bool ParameterBox::contains(const Vector& physical, double tol) const {
  if (physical.size() != dim()) return false;
  return (physical.array() >= lower_.array() - tol).all() && (physical.array() <= upper_.array() + tol).all();
}

Vector ParameterBox::clamp(const Vector& physical) const { return physical.cwiseMax(lower_).cwiseMin(upper_); }

}  // namespace nirom
