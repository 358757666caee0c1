#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nirom/errors.hpp"
#include "nirom/geometry_ffd.hpp"
#include "nirom/mesh_io.hpp"

using namespace nirom;
using namespace nirom::ffd;

namespace {

Lattice unit_lattice(std::size_t n = 2) { return Lattice::box(Vec3::Zero(), Vec3::Ones(), {n, n, n}); }

Lattice random_lattice(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity() * 2.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) axes(i, j) += 0.3 * u(rng);
  Lattice lat(Vec3(u(rng), u(rng), u(rng)), axes,
              {2 + rng() % 3, 2 + rng() % 3, 2 + rng() % 3});
  const auto& c = lat.counts();
  for (std::size_t i = 0; i < c[0]; ++i)
    for (std::size_t j = 0; j < c[1]; ++j)
      for (std::size_t k = 0; k < c[2]; ++k) lat.set_displacement(i, j, k, 0.2 * Vec3(u(rng), u(rng), u(rng)));
  return lat;
}

Vec3 interior_point(const Lattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return lat.origin() + lat.axes() * Vec3(u(rng), u(rng), u(rng));
}

}  // namespace

TEST_CASE("to_reference: corner, center and scaled box") {
  const Lattice lat = unit_lattice();
  auto r = to_reference(lat, Vec3::Zero());
  CHECK(r.inside);
  CHECK(r.s.norm() == 0.0);
  r = to_reference(lat, Vec3(0.5, 0.5, 0.5));
  CHECK((r.s - Vec3(0.5, 0.5, 0.5)).norm() < 1e-15);

  // axes = 2 I: solve 2 s = (1, 0, 0) -> s = (0.5, 0, 0)
  const Lattice big(Vec3(1, 1, 1), 2.0 * Eigen::Matrix3d::Identity(), {2, 2, 2});
  r = to_reference(big, Vec3(2, 1, 1));
  CHECK((r.s - Vec3(0.5, 0, 0)).norm() < 1e-15);
  CHECK_FALSE(to_reference(big, Vec3(3.5, 1, 1)).inside);
}

TEST_CASE("lattice: invalid construction") {
  CHECK_THROWS_AS(Lattice(Vec3::Zero(), Eigen::Matrix3d::Identity(), {1, 2, 2}), DomainError);
  Eigen::Matrix3d singular = Eigen::Matrix3d::Identity();
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(Lattice(Vec3::Zero(), singular, {2, 2, 2}), DomainError);
  Lattice lat = unit_lattice();
  CHECK_THROWS_AS(lat.set_displacement(2, 0, 0, Vec3::Zero()), DomainError);
  CHECK_THROWS_AS(lat.set_displacement(0, 0, 0, Vec3(NAN, 0, 0)), DomainError);
}

TEST_CASE("bernstein basis is a partition of unity") {
  for (std::size_t n = 1; n < 6; ++n)
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      double sum = 0.0;
      for (std::size_t i = 0; i <= n; ++i) sum += bernstein(n, i, t);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("deform_point: zero displacements are the exact identity") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Lattice lat = random_lattice(rng);
    lat.clear_displacements();
    const Vec3 x = interior_point(lat, rng);
    CHECK(deform_point(lat, x) == x);
  }
}

TEST_CASE("deform_point: hand-evaluated trilinear corner case") {
  Lattice lat = unit_lattice();
  lat.set_displacement(1, 1, 1, Vec3(0.5, 0, 0));
  // B_1^1(0.5)^3 = 0.125, so the center moves by 0.125 * 0.5 = 0.0625 in x
  const Vec3 y = deform_point(lat, Vec3(0.5, 0.5, 0.5));
  CHECK(std::abs(y.x() - 0.5625) < 1e-12);
  CHECK(std::abs(y.y() - 0.5) < 1e-12);
  CHECK(std::abs(y.z() - 0.5) < 1e-12);
  // the displaced corner itself moves by the full displacement
  CHECK((deform_point(lat, Vec3(1, 1, 1)) - Vec3(1.5, 1, 1)).norm() < 1e-12);
}

TEST_CASE("deform_point: points outside the box are fixed") {
  std::mt19937_64 rng(2);
  const Lattice lat = random_lattice(rng);
  const Vec3 far = lat.origin() + lat.axes() * Vec3(1.5, 0.2, 0.3);
  CHECK(deform_point(lat, far) == far);
  const Vec3 below = lat.origin() + lat.axes() * Vec3(0.5, -0.01, 0.5);
  CHECK(deform_point(lat, below) == below);
}

TEST_CASE("deform_point: affine in the displacements") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Lattice a = random_lattice(rng);
    Lattice b_on_a(a.origin(), a.axes(), a.counts());
    Lattice sum(a.origin(), a.axes(), a.counts());
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    const auto& c = a.counts();
    for (std::size_t i = 0; i < c[0]; ++i)
      for (std::size_t j = 0; j < c[1]; ++j)
        for (std::size_t k = 0; k < c[2]; ++k) {
          const Vec3 d(u(rng), u(rng), u(rng));
          b_on_a.set_displacement(i, j, k, d);
          sum.set_displacement(i, j, k, a.displacement(i, j, k) + d);
        }
    const Vec3 x = interior_point(a, rng);
    const Vec3 lhs = deform_point(sum, x) - x;
    const Vec3 rhs = (deform_point(a, x) - x) + (deform_point(b_on_a, x) - x);
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("deform_point: Lipschitz bound from the control-point spread") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Lattice lat = random_lattice(rng);
    double max_d = 0.0;
    for (const auto& d : lat.displacements()) max_d = std::max(max_d, d.norm());
    const std::size_t max_degree = *std::max_element(lat.counts().begin(), lat.counts().end()) - 1;
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(lat.axes());
    const double cond = svd.singularValues()[0] / svd.singularValues()[2];
    // |d/ds sum B d| <= 2 n max|d| per reference direction
    const double lipschitz = cond * (1.0 + 2.0 * std::sqrt(3.0) * static_cast<double>(max_degree) * max_d);
    const Vec3 x = lat.origin() + lat.axes() * Vec3(0.3, 0.6, 0.4);
    for (int k = 0; k < 10; ++k) {
      const Vec3 delta = 1e-6 * Vec3::Random();
      const double moved = (deform_point(lat, x + delta) - deform_point(lat, x)).norm();
      CHECK(moved <= lipschitz * delta.norm() * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("deform_mesh: per-vertex application, connectivity kept") {
  Lattice lat = unit_lattice();
  TriMesh mesh;
  mesh.vertices = {Vec3(0.5, 0.5, 0.5), Vec3(0.2, 0.3, 0.9), Vec3(0.8, 0.1, 0.4)};
  mesh.triangles = {{0, 1, 2}};
  const TriMesh same = deform_mesh(lat, mesh);
  CHECK(same.vertices == mesh.vertices);

  lat.set_displacement(1, 1, 1, Vec3(0.5, 0, 0));
  const TriMesh moved = deform_mesh(lat, mesh);
  CHECK(moved.triangles == mesh.triangles);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK(moved.vertices[i] == deform_point(lat, mesh.vertices[i]));

  TriMesh outside;
  outside.vertices = {Vec3(2, 2, 2), Vec3(3, 2, 2), Vec3(2, 3, 2)};
  outside.triangles = {{0, 1, 2}};
  CHECK(deform_mesh(lat, outside).vertices == outside.vertices);

  TriMesh broken = mesh;
  broken.triangles = {{0, 1, 7}};
  CHECK_THROWS_AS(deform_mesh(lat, broken), DomainError);
}

TEST_CASE("apply_parameters: sets listed components only") {
  const Lattice base = Lattice::box(Vec3::Zero(), Vec3::Ones(), {3, 3, 3});
  const GeoParamMap pmap({{{2, 1, 1}, Axis::X, -0.3, 0.3},
                          {{2, 1, 1}, Axis::Z, -0.3, 0.3},
                          {{1, 2, 1}, Axis::Y, -0.3, 0.3},
                          {{1, 1, 2}, Axis::Z, -0.3, 0.3},
                          {{2, 2, 1}, Axis::X, -0.3, 0.3}});
  CHECK(pmap.size() == 5);
  Vector mu(5);
  mu << 0.1, -0.2, 0.3, 0.05, -0.1;
  const Lattice out = apply_parameters(base, pmap, mu);
  CHECK(out.displacement(2, 1, 1) == Vec3(0.1, 0, -0.2));
  CHECK(out.displacement(1, 2, 1) == Vec3(0, 0.3, 0));
  CHECK(out.displacement(1, 1, 2) == Vec3(0, 0, 0.05));
  CHECK(out.displacement(2, 2, 1) == Vec3(-0.1, 0, 0));
  std::size_t nonzero = 0;
  for (const auto& d : out.displacements()) nonzero += static_cast<std::size_t>((d.array() != 0.0).count());
  CHECK(nonzero == 5);
  for (const auto& d : base.displacements()) CHECK(d.isZero(0.0));

  const Lattice zero = apply_parameters(base, pmap, Vector::Zero(5));
  for (const auto& d : zero.displacements()) CHECK(d.isZero(0.0));

  CHECK_THROWS_AS(apply_parameters(base, pmap, Vector::Zero(4)), DomainError);
  mu[0] = 0.31;
  CHECK_THROWS_AS(apply_parameters(base, pmap, mu), DomainError);
}

TEST_CASE("apply_parameters: single entry reproduces the corner lattice") {
  const GeoParamMap pmap({{{1, 1, 1}, Axis::X, -1.0, 1.0}});
  Vector mu(1);
  mu << 0.5;
  const Lattice lat = apply_parameters(unit_lattice(), pmap, mu);
  Lattice expected = unit_lattice();
  expected.set_displacement(1, 1, 1, Vec3(0.5, 0, 0));
  CHECK(lat.displacements() == expected.displacements());
}

TEST_CASE("parameter map: rejects duplicates and bad bounds") {
  CHECK_THROWS_AS(GeoParamMap({{{0, 0, 0}, Axis::X, 0, 1}, {{0, 0, 0}, Axis::X, -1, 1}}), DomainError);
  CHECK_THROWS_AS(GeoParamMap({{{0, 0, 0}, Axis::X, 1, 0}}), DomainError);
  CHECK_THROWS_AS(GeoParamMap({{{0, 0, 0}, Axis::X, 0, INFINITY}}), DomainError);
}

TEST_CASE("mesh io: STL and point CSV round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nirom_test_mesh_io";
  fs::remove_all(dir);
  TriMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.1, 0.2, 1.0 / 3.0)};
  mesh.triangles = {{0, 1, 2}, {0, 1, 3}, {1, 2, 3}};
  io::write_mesh(dir / "m.stl", mesh);
  const TriMesh back = io::read_mesh(dir / "m.stl");
  CHECK(back.vertices == mesh.vertices);
  CHECK(back.triangles == mesh.triangles);

  io::write_mesh(dir / "p.csv", mesh);
  const TriMesh pts = io::read_mesh(dir / "p.csv");
  CHECK(pts.vertices == mesh.vertices);
  CHECK(pts.triangles.empty());

  {
    std::ofstream bad(dir / "bad.stl");
    bad << "solid x\n facet normal 0 0 1\n  outer loop\n   vertex 0 0 0\n   vertex 1 oops 0\n";
  }
  try {
    io::read_stl(dir / "bad.stl");
    FAIL("expected a parse error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":5:") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_mesh(dir / "missing.stl"), IoError);
  CHECK_THROWS_AS(io::read_mesh(dir / "m.obj"), IoError);
  fs::remove_all(dir);
}
