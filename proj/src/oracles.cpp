#include <cmath>
#include <numbers>

#include "nirom/errors.hpp"
#include "nirom/oracle.hpp"

namespace nirom {

using std::numbers::pi;

Vector ParametricOracle::gradient(const Vector&) const {
  throw DomainError(name() + ": no analytic gradient");
}

Vector ParametricOracle::field(const Vector&) const { throw DomainError(name() + ": no field output"); }

dmd::SnapshotSeries ParametricOracle::time_series(const Vector&, std::size_t, double) const {
  throw DomainError(name() + ": not time resolved");
}

double ParametricOracle::functional(const Vector&) const { throw DomainError(name() + ": no field functional"); }

double trapezoid_mean(const Vector& field) {
  const Eigen::Index n = field.size();
  if (n < 2) throw DomainError("trapezoid: need at least two grid points");
  return (field.sum() - 0.5 * (field[0] + field[n - 1])) / static_cast<double>(n - 1);
}

namespace {

Vector uniform_grid(Eigen::Index n) {
  if (n < 2) throw DomainError("oracle grid needs at least two points");
  return Vector::LinSpaced(n, 0.0, 1.0);
}

void check_point(const ParametricOracle& o, const Vector& mu) {
  if (mu.size() != o.box().dim())
    throw DomainError(o.name() + ": expected " + std::to_string(o.box().dim()) + " parameters, got " +
                      std::to_string(mu.size()));
  if (!mu.allFinite()) throw DomainError(o.name() + ": non-finite parameter");
}

}  // namespace

// ---------------------------------------------------------------------------

RidgeDragOracle::RidgeDragOracle() : RidgeDragOracle(Settings{}) {}

RidgeDragOracle::RidgeDragOracle(Settings settings)
    : settings_(std::move(settings)),
      box_(ParameterBox::symmetric(settings_.direction.size() > 0 ? settings_.direction.size() : 5,
                                   settings_.half_width)) {
  if (settings_.direction.size() == 0) settings_.direction = (Vector(5) << 0.6, 0.55, 0.5, 0.45, 0.4).finished();
  if (!(settings_.direction.norm() > 0.0)) throw DomainError("ridge-drag: zero direction");
  if (!(settings_.leakage >= 0.0)) throw DomainError("ridge-drag: leakage must be nonnegative");
  const Eigen::Index p = settings_.direction.size();
  a_ = settings_.direction.normalized();
  Matrix seed = Matrix::Identity(p, p);
  seed.col(0) = a_;
  const Matrix q = Eigen::HouseholderQR<Matrix>(seed).householderQ();
  b_ = q.rightCols(p - 1);
  grid_ = uniform_grid(settings_.grid);
}

double RidgeDragOracle::profile(double t) { return 2.0 + 0.8 * (t - 0.4) * (t - 0.4) + 0.3 * t * t * t * t; }
double RidgeDragOracle::profile_derivative(double t) { return 1.6 * (t - 0.4) + 1.2 * t * t * t; }

double RidgeDragOracle::value(const Vector& mu) const {
  check_point(*this, mu);
  const Vector m = box_.to_normalized(mu);
  return profile(a_.dot(m)) + settings_.leakage * (b_.transpose() * m).squaredNorm();
}

Vector RidgeDragOracle::gradient(const Vector& mu) const {
  check_point(*this, mu);
  const Vector m = box_.to_normalized(mu);
  const Vector dm = profile_derivative(a_.dot(m)) * a_ + 2.0 * settings_.leakage * b_ * (b_.transpose() * m);
  return dm.cwiseQuotient(box_.half_widths());
}

Vector RidgeDragOracle::field(const Vector& mu) const {
  check_point(*this, mu);
  const Vector m = box_.to_normalized(mu);
  const double t = a_.dot(m);
  const Vector z = b_.transpose() * m;
  const double f = profile(t) + settings_.leakage * z.squaredNorm();
  Vector s(grid_.size());
  for (Eigen::Index j = 0; j < grid_.size(); ++j) {
    const double x = grid_[j];
    double v = f + 0.3 * std::tanh(t) * std::cos(pi * x);
    for (Eigen::Index l = 0; l < std::min<Eigen::Index>(4, z.size()); ++l)
      v += settings_.leakage * z[l] * std::cos(static_cast<double>(2 + l) * pi * x);
    s[j] = v;
  }
  return s;
}

double RidgeDragOracle::ridge_minimizer() const {
  // h' is strictly increasing (1.6 + 3.6 t^2 > 0), so bisection on the achievable range
  const double reach = a_.lpNorm<1>();
  double lo = -reach, hi = reach;
  if (profile_derivative(lo) >= 0.0) return lo;
  if (profile_derivative(hi) <= 0.0) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (profile_derivative(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vector RidgeDragOracle::argmin() const { return box_.to_physical(a_ * ridge_minimizer()); }

double RidgeDragOracle::minimum() const { return profile(ridge_minimizer()); }

// ---------------------------------------------------------------------------

namespace {

constexpr double kRates[3] = {1.0, 2.5, 4.0};

}  // namespace

HeatRegimeOracle::HeatRegimeOracle(Eigen::Index grid) : box_(ParameterBox::symmetric(3)), grid_(uniform_grid(grid)) {}

Vector HeatRegimeOracle::state(const Vector& mu, double t) const {
  check_point(*this, mu);
  Vector x(grid_.size());
  for (Eigen::Index j = 0; j < grid_.size(); ++j) {
    const double g = grid_[j];
    double v = 1.0 + 0.5 * mu[0] * g + 0.3 * mu[1] * std::sin(pi * g) + 0.2 * mu[2] * mu[2] * std::cos(2.0 * pi * g);
    if (std::isfinite(t))
      for (int k = 0; k < 3; ++k)
        v -= std::exp(-kRates[k] * t) * (1.0 + 0.2 * mu[k]) * std::sin(static_cast<double>(k + 1) * pi * g);
    x[j] = v;
  }
  return x;
}

Vector HeatRegimeOracle::field(const Vector& mu) const { return state(mu, INFINITY); }

double HeatRegimeOracle::value(const Vector& mu) const { return trapezoid_mean(field(mu)); }

dmd::SnapshotSeries HeatRegimeOracle::time_series(const Vector& mu, std::size_t samples, double dt) const {
  if (samples < 2 || !(dt > 0.0)) throw DomainError("heat-regime: need two samples and a positive step");
  dmd::SnapshotSeries s;
  s.dt = dt;
  s.data.resize(grid_.size(), static_cast<Eigen::Index>(samples));
  for (std::size_t k = 0; k < samples; ++k)
    s.data.col(static_cast<Eigen::Index>(k)) = state(mu, static_cast<double>(k) * dt);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

ffd::TriMesh uv_sphere(const ffd::Vec3& center, double radius, std::size_t rings, std::size_t segments) {
  ffd::TriMesh mesh;
  mesh.vertices.push_back(center + ffd::Vec3(0.0, 0.0, radius));
  for (std::size_t r = 1; r < rings; ++r) {
    const double theta = pi * static_cast<double>(r) / static_cast<double>(rings);
    for (std::size_t s = 0; s < segments; ++s) {
      const double phi = 2.0 * pi * static_cast<double>(s) / static_cast<double>(segments);
      mesh.vertices.push_back(center + radius * ffd::Vec3(std::sin(theta) * std::cos(phi),
                                                          std::sin(theta) * std::sin(phi), std::cos(theta)));
    }
  }
  mesh.vertices.push_back(center - ffd::Vec3(0.0, 0.0, radius));
  const std::size_t south = mesh.vertices.size() - 1;
  auto ring = [&](std::size_t r, std::size_t s) { return 1 + (r - 1) * segments + s % segments; };
  for (std::size_t s = 0; s < segments; ++s) mesh.triangles.push_back({0, ring(1, s), ring(1, s + 1)});
  for (std::size_t r = 1; r + 1 < rings; ++r)
    for (std::size_t s = 0; s < segments; ++s) {
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
    }
  for (std::size_t s = 0; s < segments; ++s)
    mesh.triangles.push_back({south, ring(rings - 1, s + 1), ring(rings - 1, s)});
  return mesh;
}

}  // namespace

GeoDemoOracle::GeoDemoOracle()
    : mesh_(uv_sphere(ffd::Vec3(0.5, 0.5, 0.5), 0.3, 12, 24)),
      lattice_(ffd::Lattice::box(ffd::Vec3::Zero(), ffd::Vec3::Ones(), {3, 3, 3})),
      map_({{{1, 1, 2}, ffd::Axis::Z, -0.2, 0.2},
            {{1, 1, 0}, ffd::Axis::Z, -0.2, 0.2},
            {{2, 1, 1}, ffd::Axis::X, -0.2, 0.2},
            {{0, 1, 1}, ffd::Axis::X, -0.2, 0.2},
            {{1, 2, 1}, ffd::Axis::Y, -0.2, 0.2}}),
      box_(map_.lower(), map_.upper()) {}

Vector GeoDemoOracle::field(const Vector& mu) const {
  check_point(*this, mu);
  const ffd::TriMesh deformed = ffd::deform_mesh(ffd::apply_parameters(lattice_, map_, mu), mesh_);
  Vector out(static_cast<Eigen::Index>(3 * deformed.vertices.size()));
  for (std::size_t i = 0; i < deformed.vertices.size(); ++i)
    out.segment<3>(static_cast<Eigen::Index>(3 * i)) = deformed.vertices[i];
  return out;
}

double GeoDemoOracle::functional(const Vector& field) const {
  if (field.size() != static_cast<Eigen::Index>(3 * mesh_.vertices.size()))
    throw DomainError("geo-demo: field length does not match the template mesh");
  double six_volume = 0.0;
  for (const auto& tri : mesh_.triangles) {
    const ffd::Vec3 a = field.segment<3>(static_cast<Eigen::Index>(3 * tri[0]));
    const ffd::Vec3 b = field.segment<3>(static_cast<Eigen::Index>(3 * tri[1]));
    const ffd::Vec3 c = field.segment<3>(static_cast<Eigen::Index>(3 * tri[2]));
    six_volume += a.dot(b.cross(c));
  }
  return std::abs(six_volume) / 6.0;
}

double GeoDemoOracle::value(const Vector& mu) const { return functional(field(mu)); }

// ---------------------------------------------------------------------------

ConstantOracle::ConstantOracle(Eigen::Index dim, double constant, Eigen::Index grid)
    : box_(ParameterBox::symmetric(dim)), c_(constant), grid_(grid) {}

LinearOracle::LinearOracle(Eigen::Index dim, Eigen::Index grid) : box_(ParameterBox::symmetric(dim)) {
  const Vector x = uniform_grid(grid);
  profiles_.resize(grid, dim + 1);
  for (Eigen::Index j = 0; j < grid; ++j) {
    profiles_(j, 0) = 1.0 + x[j] * x[j];
    for (Eigen::Index i = 0; i < dim; ++i)
      profiles_(j, i + 1) = std::sin(static_cast<double>(i + 1) * pi * x[j]) + 0.1 * static_cast<double>(i + 1) * x[j];
  }
}

Vector LinearOracle::field(const Vector& mu) const {
  check_point(*this, mu);
  return profiles_.col(0) + profiles_.rightCols(mu.size()) * mu;
}

std::unique_ptr<ParametricOracle> make_oracle(const std::string& name, const OracleOptions& options) {
  if (name == "ridge-drag") {
    RidgeDragOracle::Settings s;
    s.leakage = options.leakage;
    return std::make_unique<RidgeDragOracle>(s);
  }
  if (name == "heat-regime") return std::make_unique<HeatRegimeOracle>();
  if (name == "geo-demo") return std::make_unique<GeoDemoOracle>();
  if (name == "constant") return std::make_unique<ConstantOracle>(options.dim, options.constant);
  if (name == "linear") return std::make_unique<LinearOracle>(options.dim);
  throw ConfigError("unknown oracle '" + name + "' (ridge-drag, heat-regime, geo-demo, constant, linear)");
}

}  // namespace nirom
