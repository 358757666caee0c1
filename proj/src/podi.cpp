#include "nirom/podi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nirom/csv.hpp"
#include "nirom/errors.hpp"

namespace nirom::podi {

void ParametricSnapshotSet::validate() const {
  const std::size_t n = parameters.size();
  if (n != static_cast<std::size_t>(snapshots.cols()))
    throw DomainError("snapshot set: " + std::to_string(n) + " parameters for " + std::to_string(snapshots.cols()) +
                      " snapshots");
  if (n < 1 || snapshots.rows() < 1) throw DomainError("snapshot set: empty");
  const Eigen::Index d = parameters.front().size();
  if (d < 1) throw DomainError("snapshot set: empty parameter vector");
  for (const auto& p : parameters) {
    if (p.size() != d) throw DomainError("snapshot set: parameters have mixed dimensions");
    require_finite(p, "snapshot parameter");
  }
  require_finite(snapshots, "snapshot matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if ((parameters[i] - parameters[j]).norm() <= 1e-12)
        throw DomainError("snapshot set: samples " + std::to_string(j) + " and " + std::to_string(i) +
                          " share the parameter " + io::format_vector(parameters[i]));
}

Scheme parse_scheme(const std::string& name) {
  if (name == "auto") return Scheme::Auto;
  if (name == "spline") return Scheme::Spline;
  if (name == "rbf") return Scheme::Rbf;
  throw ConfigError("unknown interpolation scheme '" + name + "' (auto, spline, rbf)");
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Auto: return "auto";
    case Scheme::Spline: return "spline";
    case Scheme::Rbf: return "rbf";
  }
  return "unknown";
}

Model build(const ParametricSnapshotSet& set, const RankSpec& rank, Scheme scheme) {
  set.validate();
  if (set.size() < 2) throw DomainError("podi: need at least two snapshots");
  const Eigen::Index d = set.parameters.front().size();
  if (scheme == Scheme::Auto) scheme = d == 1 ? Scheme::Spline : Scheme::Rbf;
  if (scheme == Scheme::Spline && d != 1) throw ConfigError("podi: spline interpolation needs a scalar parameter");

  const SvdResult svd = truncated_svd(set.snapshots, rank);
  Model model;
  model.basis = svd.u;
  model.singular_values = svd.all_sigma;
  model.coefficients = svd.u.transpose() * set.snapshots;
  model.parameters = set.parameters;
  model.scheme = scheme;
  model.param_lower = set.parameters.front();
  model.param_upper = set.parameters.front();
  for (const auto& p : set.parameters) {
    model.param_lower = model.param_lower.cwiseMin(p);
    model.param_upper = model.param_upper.cwiseMax(p);
  }

  const Matrix values = model.coefficients.transpose();
  if (scheme == Scheme::Spline) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set.parameters[a][0] < set.parameters[b][0]; });
    Vector knots(static_cast<Eigen::Index>(order.size()));
    Matrix sorted(values.rows(), values.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
      knots[static_cast<Eigen::Index>(i)] = set.parameters[order[i]][0];
      sorted.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(order[i]));
    }
    model.spline.emplace(knots, sorted);
  } else {
    model.rbf.emplace(set.parameters, values);
  }
  return model;
}

Vector coefficients(const Model& model, const Vector& mu, bool* clamped) {
  if (mu.size() != model.param_dim())
    throw DomainError("podi evaluate: expected " + std::to_string(model.param_dim()) + " parameters, got " +
                      std::to_string(mu.size()));
  require_finite(mu, "podi evaluate parameter");
  const Vector inside = mu.cwiseMax(model.param_lower).cwiseMin(model.param_upper);
  const bool outside = inside != mu;
  if (clamped) *clamped = outside;
  if (outside && !model.clamp_warned->exchange(true))
    spdlog::warn("podi: query {} lies outside the training box and is clamped", io::format_vector(mu));
  return model.spline ? (*model.spline)(inside[0]) : (*model.rbf)(inside);
}

Vector evaluate(const Model& model, const Vector& mu, bool* clamped) {
  return model.basis * coefficients(model, mu, clamped);
}

std::vector<DecayEntry> decay_report(const Vector& sigma) {
  std::vector<DecayEntry> out;
  const double lead = sigma.size() > 0 ? sigma[0] : 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    DecayEntry e;
    e.index = static_cast<std::size_t>(i + 1);
    e.sigma = sigma[i];
    e.normalized = lead > 0.0 ? sigma[i] / lead : (i == 0 ? 1.0 : 0.0);
    out.push_back(e);
  }
  return out;
}

void write_decay_csv(const std::filesystem::path& path, const std::vector<DecayEntry>& decay) {
  std::ostringstream out;
  out << "# schema_version=1\nindex,sigma,sigma_normalized\n";
  for (const auto& e : decay)
    out << e.index << ',' << io::format_double(e.sigma) << ',' << io::format_double(e.normalized) << '\n';
  io::write_text(path, out.str());
}

namespace {

std::string sample_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04zu", i);
  return buf;
}

}  // namespace

void write_snapshot_set(const std::filesystem::path& dir, const ParametricSnapshotSet& set) {
  set.validate();
  const Eigen::Index d = set.parameters.front().size();
  std::ostringstream manifest;
  manifest << "# schema_version=1\nid";
  for (Eigen::Index k = 0; k < d; ++k) manifest << ",mu_" << k;
  manifest << ",file\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::string id = sample_id(i);
    const std::string file = "fields/" + id + ".csv";
    manifest << id;
    for (Eigen::Index k = 0; k < d; ++k) manifest << ',' << io::format_double(set.parameters[i][k]);
    manifest << ',' << file << '\n';
    std::string field;
    for (Eigen::Index r = 0; r < set.snapshots.rows(); ++r) {
      field += io::format_double(set.snapshots(r, static_cast<Eigen::Index>(i)));
      field += '\n';
    }
    io::write_text(dir / file, field);
  }
  io::write_text(dir / "manifest.csv", manifest.str());
}

ParametricSnapshotSet read_snapshot_set(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.csv";
  const io::CsvTable table = io::read_csv(manifest_path, true);
  const std::size_t cols = table.header.size();
  if (cols < 3 || table.header.front() != "id" || table.header.back() != "file")
    throw IoError(manifest_path.string() + ": header must be id,mu_0,...,file");
  const auto d = static_cast<Eigen::Index>(cols - 2);
  ParametricSnapshotSet set;
  std::vector<Vector> fields;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = manifest_path.string() + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != cols) throw IoError(where + ": expected " + std::to_string(cols) + " fields");
    Vector mu(d);
    for (Eigen::Index k = 0; k < d; ++k) mu[k] = io::parse_double(row[static_cast<std::size_t>(k + 1)], where);
    set.parameters.push_back(mu);
    const Matrix field = io::read_matrix_csv(dir / row.back());
    if (field.cols() != 1) throw IoError((dir / row.back()).string() + ": expected one value per line");
    if (!fields.empty() && field.rows() != fields.front().size())
      throw IoError((dir / row.back()).string() + ": field length differs from the first sample");
    fields.push_back(field.col(0));
  }
  if (fields.empty()) throw IoError(manifest_path.string() + ": no samples");
  set.snapshots.resize(fields.front().size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) set.snapshots.col(static_cast<Eigen::Index>(i)) = fields[i];
  set.validate();
  return set;
}

}  // namespace nirom::podi
