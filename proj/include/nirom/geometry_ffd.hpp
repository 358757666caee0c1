#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nirom/numerics.hpp"

namespace nirom::ffd {

using Vec3 = Eigen::Vector3d;

/// Result of mapping a physical point into the unit reference box.
struct ReferencePoint {
  Vec3 s;
  bool inside = false;
};

/// Box-embedded lattice of Bernstein control points.
///
/// The physical box is origin + axes * s for s in [0,1]^3; axes holds the
/// box edge vectors as columns. Control point (i,j,k) sits at
/// (i/l, j/m, k/n) in reference coordinates, with l = counts[0] - 1 and so on.
/// Displacements are stored in reference coordinates; a lattice whose
/// displacements are all zero is the identity map.
class Lattice {
 public:
  Lattice(const Vec3& origin, const Eigen::Matrix3d& axes, std::array<std::size_t, 3> counts);

  /// Axis-aligned box with the given corner and edge lengths.
  static Lattice box(const Vec3& lower, const Vec3& lengths, std::array<std::size_t, 3> counts);

  const Vec3& origin() const { return origin_; }
  const Eigen::Matrix3d& axes() const { return axes_; }
  const std::array<std::size_t, 3>& counts() const { return counts_; }
  std::size_t size() const { return displacements_.size(); }

  const Vec3& displacement(std::size_t i, std::size_t j, std::size_t k) const;
  void set_displacement(std::size_t i, std::size_t j, std::size_t k, const Vec3& d);
  void clear_displacements();
  const std::vector<Vec3>& displacements() const { return displacements_; }

  std::size_t flat_index(std::size_t i, std::size_t j, std::size_t k) const;

 private:
  Vec3 origin_;
  Eigen::Matrix3d axes_;
  Eigen::Matrix3d inverse_axes_;
  std::array<std::size_t, 3> counts_;
  std::vector<Vec3> displacements_;

  friend ReferencePoint to_reference(const Lattice&, const Vec3&);
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  /// Throws DomainError on out-of-range indices or non-finite coordinates.
  void validate() const;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// One free displacement component: control point (i,j,k), along `axis`.
struct ParamEntry {
  std::array<std::size_t, 3> index;
  Axis axis;
  double lower;
  double upper;
};

/// Maps a parameter vector mu onto lattice displacement components.
class GeoParamMap {
 public:
  explicit GeoParamMap(std::vector<ParamEntry> entries);
  const std::vector<ParamEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Vector lower() const;
  Vector upper() const;

 private:
  std::vector<ParamEntry> entries_;
};

/// Physical -> reference coordinates. `inside` is false when any component
/// leaves [0,1] by more than 1e-12.
ReferencePoint to_reference(const Lattice& lattice, const Vec3& x);

/// Bernstein basis value B_i^n(t).
double bernstein(std::size_t n, std::size_t i, double t);

/// Free-form deformation of a single point. Points outside the box pass
/// through unchanged; inside, the deformed point is x + axes * sum(B d).
Vec3 deform_point(const Lattice& lattice, const Vec3& x);

TriMesh deform_mesh(const Lattice& lattice, const TriMesh& mesh);

/// Copy of `lattice` with every displacement zeroed except the components
/// named in `pmap`, which take the values of `mu`.
Lattice apply_parameters(const Lattice& lattice, const GeoParamMap& pmap, const Vector& mu);

/// Largest vertex displacement between two meshes with equal vertex counts.
double max_displacement(const TriMesh& before, const TriMesh& after);

}  // namespace nirom::ffd
