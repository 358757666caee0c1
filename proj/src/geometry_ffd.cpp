#include "nirom/geometry_ffd.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "nirom/errors.hpp"

namespace nirom::ffd {

Lattice::Lattice(const Vec3& origin, const Eigen::Matrix3d& axes, std::array<std::size_t, 3> counts)
    : origin_(origin), axes_(axes), counts_(counts) {
  for (std::size_t c : counts)
    if (c < 2) throw DomainError("ffd lattice: each axis needs at least 2 control points");
  if (!origin.allFinite() || !axes.allFinite()) throw DomainError("ffd lattice: non-finite box");
  const double scale = axes.colwise().norm().maxCoeff();
  if (!(std::abs(axes.determinant()) > 1e-12 * scale * scale * scale))
    throw DomainError("ffd lattice: singular box axes");
  inverse_axes_ = axes.inverse();
  displacements_.assign(counts[0] * counts[1] * counts[2], Vec3::Zero());
}

Lattice Lattice::box(const Vec3& lower, const Vec3& lengths, std::array<std::size_t, 3> counts) {
  return Lattice(lower, lengths.asDiagonal(), counts);
}

std::size_t Lattice::flat_index(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= counts_[0] || j >= counts_[1] || k >= counts_[2])
    throw DomainError("ffd lattice: control point index (" + std::to_string(i) + "," + std::to_string(j) +
                      "," + std::to_string(k) + ") out of range");
  return (i * counts_[1] + j) * counts_[2] + k;
}

const Vec3& Lattice::displacement(std::size_t i, std::size_t j, std::size_t k) const {
  return displacements_[flat_index(i, j, k)];
}

void Lattice::set_displacement(std::size_t i, std::size_t j, std::size_t k, const Vec3& d) {
  if (!d.allFinite()) throw DomainError("ffd lattice: non-finite displacement");
  displacements_[flat_index(i, j, k)] = d;
}

void Lattice::clear_displacements() { std::fill(displacements_.begin(), displacements_.end(), Vec3::Zero()); }

void TriMesh::validate() const {
  for (const auto& v : vertices)
    if (!v.allFinite()) throw DomainError("mesh: non-finite vertex coordinate");
  for (const auto& t : triangles)
    for (std::size_t idx : t)
      if (idx >= vertices.size()) throw DomainError("mesh: triangle index out of range");
}

GeoParamMap::GeoParamMap(std::vector<ParamEntry> entries) : entries_(std::move(entries)) {
  std::set<std::array<std::size_t, 4>> seen;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.lower) || !std::isfinite(e.upper) || e.lower > e.upper)
      throw DomainError("parameter map: bounds must be finite with lower <= upper");
    const std::array<std::size_t, 4> key{e.index[0], e.index[1], e.index[2], static_cast<std::size_t>(e.axis)};
    if (!seen.insert(key).second) throw DomainError("parameter map: duplicate entry");
  }
}

Vector GeoParamMap::lower() const {
  Vector v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) v[static_cast<Eigen::Index>(i)] = entries_[i].lower;
  return v;
}

Vector GeoParamMap::upper() const {
  Vector v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) v[static_cast<Eigen::Index>(i)] = entries_[i].upper;
  return v;
}

ReferencePoint to_reference(const Lattice& lattice, const Vec3& x) {
  ReferencePoint r;
  r.s = lattice.inverse_axes_ * (x - lattice.origin_);
  constexpr double tol = 1e-12;
  r.inside = (r.s.array() >= -tol).all() && (r.s.array() <= 1.0 + tol).all();
  return r;
}

double bernstein(std::size_t n, std::size_t i, double t) {
  if (i > n) return 0.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= i; ++k) binom = binom * static_cast<double>(n - i + k) / static_cast<double>(k);
  return binom * std::pow(t, static_cast<double>(i)) * std::pow(1.0 - t, static_cast<double>(n - i));
}

Vec3 deform_point(const Lattice& lattice, const Vec3& x) {
  const ReferencePoint ref = to_reference(lattice, x);
  if (!ref.inside) return x;
  const Vec3 s = ref.s.cwiseMax(0.0).cwiseMin(1.0);
  const auto& counts = lattice.counts();

  std::array<std::vector<double>, 3> basis;
  for (int a = 0; a < 3; ++a) {
    const std::size_t degree = counts[a] - 1;
    basis[a].resize(counts[a]);
    for (std::size_t i = 0; i < counts[a]; ++i) basis[a][i] = bernstein(degree, i, s[a]);
  }

  // T(s) = sum B (P0 + d) = s + sum B d, since the Bernstein basis reproduces
  // the undisplaced lattice coordinates exactly.
  Vec3 shift = Vec3::Zero();
  const auto& disp = lattice.displacements();
  std::size_t flat = 0;
  for (std::size_t i = 0; i < counts[0]; ++i)
    for (std::size_t j = 0; j < counts[1]; ++j) {
      const double bij = basis[0][i] * basis[1][j];
      for (std::size_t k = 0; k < counts[2]; ++k, ++flat) {
        if (disp[flat].isZero(0.0)) continue;
        shift += bij * basis[2][k] * disp[flat];
      }
    }
  if (shift.isZero(0.0)) return x;
  return x + lattice.axes() * shift;
}

TriMesh deform_mesh(const Lattice& lattice, const TriMesh& mesh) {
  mesh.validate();
  TriMesh out;
  out.triangles = mesh.triangles;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(deform_point(lattice, v));
  return out;
}

Lattice apply_parameters(const Lattice& lattice, const GeoParamMap& pmap, const Vector& mu) {
  if (static_cast<std::size_t>(mu.size()) != pmap.size())
    throw DomainError("apply_parameters: expected " + std::to_string(pmap.size()) + " parameters, got " +
                      std::to_string(mu.size()));
  Lattice out = lattice;
  out.clear_displacements();
  for (std::size_t p = 0; p < pmap.size(); ++p) {
    const auto& e = pmap.entries()[p];
    const double value = mu[static_cast<Eigen::Index>(p)];
    if (!std::isfinite(value)) throw DomainError("apply_parameters: non-finite parameter");
    if (value < e.lower || value > e.upper)
      throw DomainError("apply_parameters: parameter " + std::to_string(p) + " = " + std::to_string(value) +
                        " outside [" + std::to_string(e.lower) + ", " + std::to_string(e.upper) + "]");
    Vec3 d = out.displacement(e.index[0], e.index[1], e.index[2]);
    d[static_cast<int>(e.axis)] = value;
    out.set_displacement(e.index[0], e.index[1], e.index[2], d);
  }
  return out;
}

double max_displacement(const TriMesh& before, const TriMesh& after) {
  if (before.vertices.size() != after.vertices.size())
    throw DomainError("max_displacement: vertex counts differ");
  double best = 0.0;
  for (std::size_t i = 0; i < before.vertices.size(); ++i)
    best = std::max(best, (after.vertices[i] - before.vertices[i]).norm());
  return best;
}

}  // namespace nirom::ffd
