#include "nirom/active_subspaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nirom/csv.hpp"
#include "nirom/errors.hpp"
#include "nirom/parallel.hpp"
#include "nirom/sampling.hpp"

namespace nirom::as {

Matrix estimate_covariance(const std::vector<GradientSample>& samples) {
  if (samples.empty()) throw DomainError("covariance: no gradient samples");
  const Eigen::Index p = samples.front().grad.size();
  if (p == 0) throw DomainError("covariance: empty gradient");
  if (samples.size() < static_cast<std::size_t>(p))
    spdlog::warn("covariance estimated from {} samples in dimension {}", samples.size(), p);
  Matrix c = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vector& g = samples[k].grad;
    if (g.size() != p || samples[k].mu.size() != p)
      throw DomainError("covariance: sample " + std::to_string(k) + " has a different dimension");
    require_finite(g, "gradient sample");
    c.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  c = c.selfadjointView<Eigen::Lower>();
  c /= static_cast<double>(samples.size());
  return 0.5 * (c + c.transpose());
}

ActiveSubspace fit_subspace(const Matrix& c, const DimSpec& spec) {
  SymEigResult eig = sym_eig(c);
  const Eigen::Index p = eig.eigenvalues.size();
  const double tol = 1e-10 * std::max(1.0, std::abs(eig.eigenvalues[0]));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (eig.eigenvalues[i] < -tol)
      throw NumericError("active subspace: covariance has eigenvalue " + io::format_double(eig.eigenvalues[i]) +
                         ", not positive semi-definite");
    eig.eigenvalues[i] = std::max(eig.eigenvalues[i], 0.0);
  }

  std::size_t m = 0;
  if (spec.is_fixed()) {
    m = spec.count();
    if (m > static_cast<std::size_t>(p))
      throw DomainError("active subspace: dimension " + std::to_string(m) + " exceeds parameter count " +
                        std::to_string(p));
  } else if (p == 1) {
    m = 1;
  } else {
    const double lead = eig.eigenvalues[0];
    if (!(lead > 0.0)) throw NumericError("active subspace: zero covariance, a fixed dimension is required");
    double best = 0.0;
    for (Eigen::Index i = 0; i + 1 < p; ++i) {
      const double gap = (eig.eigenvalues[i] - eig.eigenvalues[i + 1]) / lead;
      if (gap > best) {
        best = gap;
        m = static_cast<std::size_t>(i + 1);
      }
    }
    if (best <= 1e-12) throw NumericError("active subspace: isotropic spectrum has no gap, a fixed dimension is required");
  }

  ActiveSubspace out;
  out.eigenvalues = eig.eigenvalues;
  out.eigenvectors = eig.eigenvectors;
  out.active_dim = m;
  const auto mm = static_cast<Eigen::Index>(m);
  out.w1 = eig.eigenvectors.leftCols(mm);
  out.w2 = eig.eigenvectors.rightCols(p - mm);
  return out;
}

Vector project(const ActiveSubspace& as, const Vector& mu) {
  if (mu.size() != as.w1.rows())
    throw DomainError("active subspace project: expected " + std::to_string(as.w1.rows()) + " coordinates, got " +
                      std::to_string(mu.size()));
  return as.w1.transpose() * mu;
}

GradientScheme parse_scheme(const std::string& name) {
  if (name == "analytic") return GradientScheme::Analytic;
  if (name == "central-fd") return GradientScheme::CentralFd;
  if (name == "local-linear") return GradientScheme::LocalLinear;
  throw ConfigError("unknown gradient scheme '" + name + "' (analytic, central-fd, local-linear)");
}

std::string scheme_name(GradientScheme scheme) {
  switch (scheme) {
    case GradientScheme::Analytic: return "analytic";
    case GradientScheme::CentralFd: return "central-fd";
    case GradientScheme::LocalLinear: return "local-linear";
  }
  return "unknown";
}

std::vector<GradientSample> estimate_gradients(const Objective& f, const std::vector<Vector>& mus,
                                               const GradientOptions& options) {
  if (options.scheme == GradientScheme::LocalLinear)
    throw DomainError("estimate_gradients: local-linear works on stored values, use local_linear_gradients");
  if (options.scheme == GradientScheme::Analytic && !f.gradient)
    throw DomainError("estimate_gradients: the objective provides no analytic gradient");
  if (!f.value) throw DomainError("estimate_gradients: objective has no value function");
  const double h = options.step;
  if (options.scheme == GradientScheme::CentralFd && !(h > 0.0 && h < 1.0))
    throw DomainError("estimate_gradients: finite-difference step must lie in (0, 1)");

  std::vector<GradientSample> out(mus.size());
  parallel_for(mus.size(), options.workers, [&](std::size_t k) {
    const Vector& mu = mus[k];
    require_finite(mu, "gradient point");
    GradientSample s;
    s.mu = mu;
    try {
      s.value = f.value(mu);
      if (options.scheme == GradientScheme::Analytic) {
        s.grad = f.gradient(mu);
        if (s.grad.size() != mu.size()) throw DomainError("analytic gradient has the wrong length");
      } else {
        if ((mu.array().abs() > 1.0 - h + 1e-15).any())
          throw DomainError("point is within the finite-difference step of the box boundary");
        s.grad.resize(mu.size());
        Vector probe = mu;
        for (Eigen::Index i = 0; i < mu.size(); ++i) {
          probe[i] = mu[i] + h;
          const double up = f.value(probe);
          probe[i] = mu[i] - h;
          const double down = f.value(probe);
          probe[i] = mu[i];
          s.grad[i] = (up - down) / (2.0 * h);
        }
      }
      if (!std::isfinite(s.value) || !s.grad.allFinite()) throw NumericError("non-finite objective or gradient");
    } catch (const Error& e) {
      rethrow_with_context(e, "gradient at mu = " + io::format_vector(mu));
    } catch (const std::exception& e) {
      throw NumericError(std::string(e.what()) + " (gradient at mu = " + io::format_vector(mu) + ")");
    }
    out[k] = std::move(s);
  });
  return out;
}

std::vector<GradientSample> local_linear_gradients(const std::vector<Vector>& mus, const std::vector<double>& values,
                                                   std::size_t neighbors) {
  if (mus.empty() || mus.size() != values.size())
    throw DomainError("local-linear gradients: need matching non-empty points and values");
  const Eigen::Index p = mus.front().size();
  const std::size_t n = mus.size();
  const std::size_t kappa = std::min(neighbors == 0 ? static_cast<std::size_t>(2 * p + 1) : neighbors, n);
  if (kappa < static_cast<std::size_t>(p + 1))
    throw DomainError("local-linear gradients: need at least " + std::to_string(p + 1) + " samples, have " +
                      std::to_string(kappa));

  std::vector<GradientSample> out(n);
  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (mus[i].size() != p) throw DomainError("local-linear gradients: inconsistent dimensions");
    for (std::size_t j = 0; j < n; ++j) dist[j] = (mus[j] - mus[i]).squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kappa), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    Matrix design(static_cast<Eigen::Index>(kappa), p + 1);
    Vector rhs(static_cast<Eigen::Index>(kappa));
    for (std::size_t r = 0; r < kappa; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      design(row, 0) = 1.0;
      design.row(row).tail(p) = (mus[order[r]] - mus[i]).transpose();
      rhs[row] = values[order[r]];
    }
    const Vector coef = design.completeOrthogonalDecomposition().solve(rhs);
    out[i].mu = mus[i];
    out[i].value = values[i];
    out[i].grad = coef.tail(p);
  }
  return out;
}

std::pair<Vector, Vector> active_range(const ActiveSubspace& as) {
  // the extremes of w^T mu over the cube sit at the corner sign(w)
  Vector upper(as.w1.cols());
  for (Eigen::Index j = 0; j < as.w1.cols(); ++j) upper[j] = as.w1.col(j).lpNorm<1>();
  return {-upper, upper};
}

namespace {

// Point of the cube on the ray through w whose projection onto w equals y.
Vector ray_fallback(const Vector& w, double y) {
  if (y == 0.0) return Vector::Zero(w.size());
  const Vector dir = y > 0.0 ? Vector(w) : Vector(-w);
  const double target = std::abs(y);
  auto reach = [&](double lambda) { return dir.dot((lambda * dir).cwiseMax(-1.0).cwiseMin(1.0)); };
  double hi = 1.0;
  for (int i = 0; i < 200 && reach(hi) < target; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (reach(mid) < target) lo = mid;
    else hi = mid;
  }
  return (hi * dir).cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace

Vector lift(const ActiveSubspace& as, const Vector& y) {
  if (y.size() != as.w1.cols()) throw DomainError("lift: active coordinate count mismatch");
  const Vector base = as.w1 * y;
  if ((base.array().abs() <= 1.0).all()) return base;
  if (as.w1.cols() == 1) return ray_fallback(as.w1.col(0), y[0]);
  return base.cwiseMax(-1.0).cwiseMin(1.0);
}

ActiveSamples sample_active(const ActiveSubspace& as, const ParameterBox& box, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_active: need at least one sample");
  const Eigen::Index p = as.w1.rows();
  const auto m = static_cast<Eigen::Index>(as.active_dim);
  if (m < 1 || as.w1.cols() != m) throw DomainError("sample_active: subspace has no active directions");
  if (box.dim() != p) throw DomainError("sample_active: box dimension does not match the subspace");

  ActiveSamples out;
  std::tie(out.range_lower, out.range_upper) = active_range(as);
  if (!((out.range_upper - out.range_lower).array() > 0.0).all())
    throw DomainError("sample_active: empty achievable active range");

  Rng rng(seed);
  std::vector<Vector> targets;
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
      targets.push_back(Vector::Constant(1, out.range_lower[0] + s * (out.range_upper[0] - out.range_lower[0])));
    }
  } else if (m <= 3) {
    for (const Vector& u : halton_unit(n, m, halton_offset(seed)))
      targets.push_back(out.range_lower.array() + u.array() * (out.range_upper - out.range_lower).array());
  } else {
    spdlog::warn("sample_active: {} active directions, drawing targets from random box points instead of strata", m);
    for (std::size_t i = 0; i < n; ++i) {
      Vector mu(p);
      for (Eigen::Index d = 0; d < p; ++d) mu[d] = rng.uniform(-1.0, 1.0);
      targets.push_back(as.w1.transpose() * mu);
    }
  }

  Vector z_bound(as.w2.cols());
  for (Eigen::Index j = 0; j < as.w2.cols(); ++j) z_bound[j] = as.w2.col(j).lpNorm<1>();

  std::size_t fallbacks = 0;
  for (const Vector& y : targets) {
    const Vector base = as.w1 * y;
    Vector mu;
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      Vector z(as.w2.cols());
      for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.uniform(-z_bound[j], z_bound[j]);
      mu = base + as.w2 * z;
      found = (mu.array().abs() <= 1.0 + 1e-12).all();
    }
    if (found) {
      mu = mu.cwiseMax(-1.0).cwiseMin(1.0);
    } else {
      mu = lift(as, y);
      ++fallbacks;
    }
    out.normalized.push_back(mu);
    out.physical.push_back(box.to_physical(mu));
    out.active.push_back(as.w1.transpose() * mu);
    out.fallback.push_back(!found);
  }
  if (fallbacks > 0) spdlog::debug("sample_active: {} of {} points used the fallback", fallbacks, n);
  return out;
}

RidgeSurrogate surrogate_g(const ActiveSubspace& as, const std::vector<Vector>& mus, const std::vector<double>& values) {
  if (as.active_dim != 1) throw DomainError("surrogate_g: only a one-dimensional active subspace is supported");
  if (mus.size() != values.size()) throw DomainError("surrogate_g: points and values differ in count");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    if (!std::isfinite(values[i])) throw DomainError("surrogate_g: non-finite training value");
    pts.emplace_back(project(as, mus[i])[0], values[i]);
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> ys, fs;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < pts.size() && pts[j].first - pts[i].first <= 1e-12 * std::max(1.0, std::abs(pts[i].first))) {
      sum += pts[j].second;
      ++j;
    }
    ys.push_back(pts[i].first);
    fs.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  if (ys.size() < 4)
    throw DomainError("surrogate_g: need at least 4 distinct active coordinates, have " + std::to_string(ys.size()));
  const auto k = static_cast<Eigen::Index>(ys.size());
  return RidgeSurrogate(as.w1.col(0), interp::CubicSpline(Eigen::Map<Vector>(ys.data(), k),
                                                          Eigen::Map<Matrix>(fs.data(), k, 1)));
}

void write_spectrum_csv(const std::filesystem::path& path, const ActiveSubspace& as) {
  std::ostringstream out;
  out << "# schema_version=1\nindex,eigenvalue,normalized\n";
  const double lead = as.eigenvalues.size() > 0 ? as.eigenvalues[0] : 0.0;
  for (Eigen::Index i = 0; i < as.eigenvalues.size(); ++i)
    out << i + 1 << ',' << io::format_double(as.eigenvalues[i]) << ','
        << io::format_double(lead > 0.0 ? as.eigenvalues[i] / lead : 0.0) << '\n';
  io::write_text(path, out.str());
}

void write_w1_csv(const std::filesystem::path& path, const ActiveSubspace& as) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < as.w1.cols(); ++j) header.push_back("w" + std::to_string(j + 1));
  io::write_matrix_csv(path, as.w1, header);
}

void write_gradient_ledger(const std::filesystem::path& path, const std::vector<GradientSample>& samples) {
  std::ostringstream out;
  out << "# schema_version=1\n";
  const Eigen::Index p = samples.empty() ? 0 : samples.front().mu.size();
  for (Eigen::Index i = 0; i < p; ++i) out << "mu_" << i << ',';
  out << 'f';
  for (Eigen::Index i = 0; i < p; ++i) out << ",grad_" << i;
  out << '\n';
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < p; ++i) out << io::format_double(s.mu[i]) << ',';
    out << io::format_double(s.value);
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << io::format_double(s.grad[i]);
    out << '\n';
  }
  io::write_text(path, out.str());
}

std::vector<GradientSample> read_gradient_ledger(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path, true);
  const std::size_t cols = table.header.size();
  if (cols < 3 || cols % 2 == 0) throw IoError(path.string() + ": malformed gradient ledger header");
  const auto p = static_cast<Eigen::Index>((cols - 1) / 2);
  std::vector<GradientSample> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != cols) throw IoError(where + ": expected " + std::to_string(cols) + " fields");
    GradientSample s;
    s.mu.resize(p);
    s.grad.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      s.mu[i] = io::parse_double(row[static_cast<std::size_t>(i)], where);
      s.grad[i] = io::parse_double(row[static_cast<std::size_t>(p + 1 + i)], where);
    }
    s.value = io::parse_double(row[static_cast<std::size_t>(p)], where);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nirom::as
