#include "nirom/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "nirom/errors.hpp"

namespace nirom::interp {

CubicSpline::CubicSpline(Vector knots, Matrix values) : knots_(std::move(knots)), values_(std::move(values)) {
  const Eigen::Index n = knots_.size();
  if (n < 2) throw DomainError("cubic spline: need at least two knots");
  if (values_.rows() != n) throw DomainError("cubic spline: one value row per knot required");
  require_finite(knots_, "cubic spline knots");
  require_finite(values_, "cubic spline values");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(knots_[i] > knots_[i - 1])) throw DomainError("cubic spline: knots must be strictly increasing");

  const Eigen::Index channels = values_.cols();
  second_ = Matrix::Zero(n, channels);
  if (n == 2) return;
  if (n == 3) {
    // the interpolating parabola has constant second derivative 2 f[x0, x1, x2]
    const double h0 = knots_[1] - knots_[0], h1 = knots_[2] - knots_[1];
    const Matrix dd = ((values_.row(2) - values_.row(1)) / h1 - (values_.row(1) - values_.row(0)) / h0) / (h0 + h1);
    for (Eigen::Index i = 0; i < 3; ++i) second_.row(i) = 2.0 * dd;
    return;
  }

  Vector h(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) h[i] = knots_[i + 1] - knots_[i];
  Matrix a = Matrix::Zero(n, n);
  Matrix rhs = Matrix::Zero(n, channels);
  // not-a-knot: third derivative continuous across the second and second-to-last knots
  a(0, 0) = h[1];
  a(0, 1) = -(h[0] + h[1]);
  a(0, 2) = h[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    a(i, i - 1) = h[i - 1];
    a(i, i) = 2.0 * (h[i - 1] + h[i]);
    a(i, i + 1) = h[i];
    rhs.row(i) = 6.0 * ((values_.row(i + 1) - values_.row(i)) / h[i] - (values_.row(i) - values_.row(i - 1)) / h[i - 1]);
  }
  a(n - 1, n - 3) = h[n - 2];
  a(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
  a(n - 1, n - 1) = h[n - 3];
  second_ = a.partialPivLu().solve(rhs);
}

Vector CubicSpline::operator()(double x) const {
  const Eigen::Index n = knots_.size();
  if (!(x > knots_[0])) return values_.row(0).transpose();
  if (!(x < knots_[n - 1])) return values_.row(n - 1).transpose();
  const double* begin = knots_.data();
  const auto it = std::upper_bound(begin, begin + n, x);
  const Eigen::Index i = (it - begin) - 1;
  if (knots_[i] == x) return values_.row(i).transpose();
  const double h = knots_[i + 1] - knots_[i];
  const double left = knots_[i + 1] - x, right = x - knots_[i];
  return (second_.row(i) * (left * left * left / (6.0 * h)) + second_.row(i + 1) * (right * right * right / (6.0 * h)) +
          (values_.row(i) / h - second_.row(i) * (h / 6.0)) * left +
          (values_.row(i + 1) / h - second_.row(i + 1) * (h / 6.0)) * right)
      .transpose();
}

double thin_plate_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

ThinPlateRbf::ThinPlateRbf(std::vector<Vector> centers, const Matrix& values, double cutoff)
    : centers_(std::move(centers)) {
  const auto n = static_cast<Eigen::Index>(centers_.size());
  if (n < 1) throw DomainError("rbf: no centers");
  if (values.rows() != n) throw DomainError("rbf: one value row per center required");
  dim_ = centers_.front().size();
  for (const auto& c : centers_) {
    if (c.size() != dim_) throw DomainError("rbf: centers have inconsistent dimension");
    require_finite(c, "rbf center");
  }
  require_finite(values, "rbf values");

  const Eigen::Index size = n + dim_ + 1;
  Matrix system = Matrix::Zero(size, size);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = thin_plate_kernel((centers_[static_cast<std::size_t>(i)] - centers_[static_cast<std::size_t>(j)]).norm());
      system(i, j) = k;
      system(j, i) = k;
    }
    system(i, n) = 1.0;
    system(n, i) = 1.0;
    system.block(i, n + 1, 1, dim_) = centers_[static_cast<std::size_t>(i)].transpose();
    system.block(n + 1, i, dim_, 1) = centers_[static_cast<std::size_t>(i)];
  }
  Matrix rhs = Matrix::Zero(size, values.cols());
  rhs.topRows(n) = values;
  weights_ = pseudo_inverse(system, cutoff) * rhs;
}

Vector ThinPlateRbf::operator()(const Vector& x) const {
  if (x.size() != dim_) throw DomainError("rbf: query dimension mismatch");
  const auto n = static_cast<Eigen::Index>(centers_.size());
  Vector basis(n + dim_ + 1);
  for (Eigen::Index i = 0; i < n; ++i) basis[i] = thin_plate_kernel((x - centers_[static_cast<std::size_t>(i)]).norm());
  basis[n] = 1.0;
  basis.tail(dim_) = x;
  return weights_.transpose() * basis;
}

}  // namespace nirom::interp
