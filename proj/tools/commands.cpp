#include "commands.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nirom/active_subspaces.hpp"
#include "nirom/csv.hpp"
#include "nirom/dmd.hpp"
#include "nirom/errors.hpp"
#include "nirom/geometry_ffd.hpp"
#include "nirom/mesh_io.hpp"
#include "nirom/oracle.hpp"
#include "nirom/pipeline.hpp"
#include "nirom/podi.hpp"
#include "nirom/sampling.hpp"

namespace nirom::cli {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const Settings& s) {
  const fs::path dir = s.text("output_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::array<std::size_t, 3> index3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": index must be [i, j, k]");
  std::array<std::size_t, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    if (!v[a].is_number_integer() || v[a].get<long long>() < 0) throw ConfigError(where + ": index must be [i, j, k]");
    out[a] = v[a].get<std::size_t>();
  }
  return out;
}

Eigen::Vector3d vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + " must be a 3-vector");
  Eigen::Vector3d out;
  for (int a = 0; a < 3; ++a) {
    if (!v[a].is_number()) throw ConfigError(where + " must be a 3-vector");
    out[a] = v[a].get<double>();
  }
  return out;
}

RankSpec rank_of(const Settings& s, const std::string& key) {
  const json& v = s.raw(key);
  try {
    return pipeline::parse_rank(v.is_number_integer() ? std::to_string(v.get<long long>()) : s.text(key));
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<KeySpec>& ffd_keys() {
  static const std::vector<KeySpec> keys = {
      {"schema_version", "integer", 1, "config format version"},
      {"output_dir", "string", "ffd_out", "directory receiving the deformed mesh"},
      {"mesh", "string", nullptr, "input mesh, ASCII STL (.stl) or x,y,z point CSV (.csv)", true},
      {"output_name", "string", nullptr, "deformed mesh file name; defaults to deformed.<input extension>"},
      {"lattice.origin", "3-vector", json::array({0.0, 0.0, 0.0}), "lattice box corner"},
      {"lattice.lengths", "3-vector", json::array({1.0, 1.0, 1.0}), "edge lengths of an axis-aligned box"},
      {"lattice.axes", "3 x 3-vector", nullptr, "box edge vectors, one per row; overrides lattice.lengths"},
      {"lattice.counts", "3 integers", json::array({2, 2, 2}), "control points per direction"},
      {"displacements", "array", json::array(),
       "fixed control-point moves [{\"index\": [i,j,k], \"value\": [dx,dy,dz]}] in reference coordinates"},
      {"parameters", "array", json::array(),
       "parameter map [{\"index\": [i,j,k], \"axis\": \"x\", \"lower\": l, \"upper\": u}]"},
      {"mu", "array of numbers", json::array(), "one value per parameters entry"},
  };
  return keys;
}

void run_ffd(const json& doc) {
  const Settings s(ffd_keys(), doc);
  const fs::path mesh_path = s.text("mesh");
  const ffd::TriMesh mesh = io::read_mesh(mesh_path);

  const Eigen::Vector3d origin = vec3(s.raw("lattice.origin"), "lattice.origin");
  const json& counts_doc = s.raw("lattice.counts");
  const auto counts = index3(counts_doc, "lattice.counts");
  Eigen::Matrix3d axes = Eigen::Matrix3d::Zero();
  if (s.has("lattice.axes")) {
    const json& a = s.raw("lattice.axes");
    if (!a.is_array() || a.size() != 3) throw ConfigError("lattice.axes must hold three edge vectors");
    for (int c = 0; c < 3; ++c) axes.col(c) = vec3(a[static_cast<std::size_t>(c)], "lattice.axes");
  } else {
    axes = vec3(s.raw("lattice.lengths"), "lattice.lengths").asDiagonal();
  }
  ffd::Lattice lattice(origin, axes, counts);

  const json& params = s.raw("parameters");
  if (!params.is_array()) throw ConfigError("config key 'parameters' must be an array");
  if (!params.empty()) {
    std::vector<ffd::ParamEntry> entries;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const json& e = params[p];
      const std::string where = "parameters[" + std::to_string(p) + "]";
      if (!e.is_object()) throw ConfigError(where + " must be an object");
      const std::string axis = e.value("axis", "");
      if (axis != "x" && axis != "y" && axis != "z") throw ConfigError(where + ".axis must be x, y or z");
      if (!e.contains("lower") || !e.contains("upper") || !e["lower"].is_number() || !e["upper"].is_number())
        throw ConfigError(where + " needs numeric lower and upper");
      entries.push_back({index3(e.value("index", json()), where), static_cast<ffd::Axis>(axis[0] - 'x'),
                         e["lower"].get<double>(), e["upper"].get<double>()});
    }
    const ffd::GeoParamMap pmap(std::move(entries));
    const Vector mu = s.vector("mu");
    if (static_cast<std::size_t>(mu.size()) != pmap.size())
      throw ConfigError("config key 'mu' needs " + std::to_string(pmap.size()) + " values");
    lattice = ffd::apply_parameters(lattice, pmap, mu);
  }
  const json& moves = s.raw("displacements");
  if (!moves.is_array()) throw ConfigError("config key 'displacements' must be an array");
  for (std::size_t m = 0; m < moves.size(); ++m) {
    const std::string where = "displacements[" + std::to_string(m) + "]";
    const auto ijk = index3(moves[m].value("index", json()), where);
    const Eigen::Vector3d d = vec3(moves[m].value("value", json()), where + ".value");
    lattice.set_displacement(ijk[0], ijk[1], ijk[2], lattice.displacement(ijk[0], ijk[1], ijk[2]) + d);
  }

  const ffd::TriMesh deformed = ffd::deform_mesh(lattice, mesh);
  const std::string name = s.has("output_name") ? s.text("output_name") : "deformed" + mesh_path.extension().string();
  if (fs::path(name).has_parent_path()) throw ConfigError("config key 'output_name' must be a plain file name");
  const fs::path out = output_dir(s) / name;
  io::write_mesh(out, deformed);
  std::cout << "vertices " << deformed.vertices.size() << "\n"
            << "max displacement " << g(ffd::max_displacement(mesh, deformed)) << "\n"
            << "wrote " << out.string() << "\n";
}

// ---------------------------------------------------------------------------

const std::vector<KeySpec>& dmd_keys() {
  static const std::vector<KeySpec> keys = {
      {"schema_version", "integer", 1, "config format version"},
      {"output_dir", "string", "dmd_out", "directory receiving eigenvalues.csv, reconstruction.csv and forecasts"},
      {"snapshots", "string", nullptr, "CSV with one row per state component and one column per time sample", true},
      {"dt", "number", 1.0, "time between snapshot columns"},
      {"t0", "number", 0.0, "time of the first column"},
      {"rank", "string or integer", "energy:1", "truncation: a count or \"energy:<fraction>\""},
      {"modes", "string", "exact", "exact or projected"},
      {"predict", "array of numbers", json::array(), "times written to predictions.csv"},
      {"horizon", "number", nullptr, "time at which the regime value is read (written to regime.csv)"},
      {"window", "integer", 16, "samples averaged for the regime value"},
  };
  return keys;
}

void run_dmd(const json& doc) {
  const Settings s(dmd_keys(), doc);
  dmd::SnapshotSeries series;
  series.data = io::read_matrix_csv(s.text("snapshots"));
  series.dt = s.number("dt");
  series.t0 = s.number("t0");
  const std::string modes = s.text("modes");
  if (modes != "exact" && modes != "projected") throw ConfigError("config key 'modes' must be exact or projected");
  const dmd::Model model =
      dmd::fit(series, rank_of(s, "rank"), modes == "exact" ? dmd::ModeKind::Exact : dmd::ModeKind::Projected);

  const fs::path out = output_dir(s);
  std::ostringstream eig;
  eig << "# schema_version=1\nre,im,magnitude\n";
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
    eig << io::format_double(model.eigenvalues[i].real()) << ',' << io::format_double(model.eigenvalues[i].imag())
        << ',' << io::format_double(std::abs(model.eigenvalues[i])) << '\n';
  io::write_text(out / "eigenvalues.csv", eig.str());

  Matrix recon(series.data.rows(), series.data.cols());
  for (Eigen::Index k = 0; k < recon.cols(); ++k)
    recon.col(k) = dmd::predict(model, series.t0 + static_cast<double>(k) * series.dt);
  io::write_matrix_csv(out / "reconstruction.csv", recon);

  std::cout << "rank " << model.rank << "\n";
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
    std::cout << "eigenvalue " << g(model.eigenvalues[i].real()) << (model.eigenvalues[i].imag() < 0 ? " - " : " + ")
              << g(std::abs(model.eigenvalues[i].imag())) << "i  |" << g(std::abs(model.eigenvalues[i])) << "|\n";
  std::cout << "fit residual " << g(model.fit_residual) << "\n";

  const auto times = s.numbers("predict");
  if (!times.empty()) {
    Matrix states(series.data.rows(), static_cast<Eigen::Index>(times.size()));
    std::string header = "# schema_version=1\n# times=";
    for (std::size_t j = 0; j < times.size(); ++j) {
      states.col(static_cast<Eigen::Index>(j)) = dmd::predict(model, times[j]);
      header += (j ? ";" : "") + io::format_double(times[j]);
    }
    std::ostringstream text;
    text << header << '\n';
    for (Eigen::Index r = 0; r < states.rows(); ++r) {
      for (Eigen::Index c = 0; c < states.cols(); ++c) text << (c ? "," : "") << io::format_double(states(r, c));
      text << '\n';
    }
    io::write_text(out / "predictions.csv", text.str());
    std::cout << "wrote " << (out / "predictions.csv").string() << "\n";
  }

  if (s.has("horizon")) {
    const dmd::RegimeEstimate regime = dmd::regime_value(model, s.number("horizon"), s.count("window"));
    std::ostringstream text;
    text << "# schema_version=1\n# horizon=" << io::format_double(s.number("horizon")) << "\nvalue,spread\n";
    for (Eigen::Index r = 0; r < regime.value.size(); ++r)
      text << io::format_double(regime.value[r]) << ',' << io::format_double(regime.spread[r]) << '\n';
    io::write_text(out / "regime.csv", text.str());
    std::cout << "regime value";
    for (Eigen::Index r = 0; r < std::min<Eigen::Index>(regime.value.size(), 8); ++r) std::cout << ' ' << g(regime.value[r]);
    if (regime.value.size() > 8) std::cout << " ...";
    std::cout << "\nregime spread " << g(regime.max_spread) << "\n";
    if (regime.divergent) spdlog::warn("a growing mode carries energy; the regime value is not a limit");
  }
}

// ---------------------------------------------------------------------------

const std::vector<KeySpec>& as_keys() {
  static const std::vector<KeySpec> keys = {
      {"schema_version", "integer", 1, "config format version"},
      {"output_dir", "string", "as_out", "directory receiving as_spectrum.csv, w1.csv and gradients.csv"},
      {"seed", "integer", 2024, "seed of the Halton sample plan"},
      {"oracle.name", "string", "ridge-drag", "ridge-drag, heat-regime, geo-demo, constant or linear"},
      {"oracle.leakage", "number", 0.05, "ridge-drag inactive leakage"},
      {"oracle.dim", "integer", 3, "parameter count of the constant and linear oracles"},
      {"oracle.constant", "number", 1.0, "value of the constant oracle"},
      {"samples", "integer", 200, "gradient samples"},
      {"gradients.scheme", "string", "central-fd", "analytic, central-fd or local-linear"},
      {"gradients.step", "number", 1e-4, "central-difference step in normalized coordinates"},
      {"gradients.neighbors", "integer", 0, "local-linear neighbourhood size, 0 for 2P + 1"},
      {"gradients.workers", "integer", 1, "concurrent oracle evaluations"},
      {"dim", "integer or \"gap\"", 1, "active dimension, or the spectral-gap rule"},
      {"ledger", "string", nullptr, "existing gradient ledger to fit instead of evaluating the oracle"},
  };
  return keys;
}

void run_as(const json& doc) {
  const Settings s(as_keys(), doc);
  as::DimSpec dim = as::DimSpec::fixed(1);
  const json& d = s.raw("dim");
  if (d.is_string() && d.get<std::string>() == "gap") dim = as::DimSpec::spectral_gap();
  else if (d.is_number_integer() && d.get<long long>() >= 1) dim = as::DimSpec::fixed(d.get<std::size_t>());
  else throw ConfigError("config key 'dim' must be a positive integer or \"gap\"");

  std::vector<as::GradientSample> samples;
  if (s.has("ledger")) {
    samples = as::read_gradient_ledger(s.text("ledger"));
  } else {
    OracleOptions options;
    options.leakage = s.number("oracle.leakage");
    options.dim = static_cast<Eigen::Index>(s.count("oracle.dim"));
    options.constant = s.number("oracle.constant");
    const auto oracle = make_oracle(s.text("oracle.name"), options);
    const ParameterBox& box = oracle->box();
    as::GradientOptions g;
    g.scheme = as::parse_scheme(s.text("gradients.scheme"));
    g.step = s.number("gradients.step");
    g.neighbors = s.count("gradients.neighbors");
    g.workers = std::max<std::size_t>(1, s.count("gradients.workers"));
    if (g.scheme == as::GradientScheme::Analytic && !oracle->has_gradient())
      throw ConfigError("oracle '" + oracle->name() + "' has no analytic gradient");
    if (!(g.step > 0.0 && g.step < 1.0)) throw ConfigError("config key 'gradients.step' must lie in (0, 1)");

    // the Halton plan is drawn inside the central-difference margin
    const double margin = g.scheme == as::GradientScheme::CentralFd ? g.step : 0.0;
    const ParameterBox inner = ParameterBox::symmetric(box.dim(), 1.0 - margin);
    const std::vector<Vector> mus = pipeline::sample_full(inner, s.count("samples"), derive_seed(s.count("seed"), "as"));
    if (g.scheme == as::GradientScheme::LocalLinear) {
      std::vector<double> values;
      for (const auto& m : mus) values.push_back(oracle->value(box.to_physical(m)));
      samples = as::local_linear_gradients(mus, values, g.neighbors);
    } else {
      as::Objective f;
      f.value = [&](const Vector& m) { return oracle->value(box.to_physical(m)); };
      if (oracle->has_gradient())
        f.gradient = [&](const Vector& m) {
          return Vector(oracle->gradient(box.to_physical(m)).cwiseProduct(box.half_widths()));
        };
      samples = as::estimate_gradients(f, mus, g);
    }
  }

  const as::ActiveSubspace subspace = as::fit_subspace(as::estimate_covariance(samples), dim);
  const fs::path out = output_dir(s);
  as::write_gradient_ledger(out / "gradients.csv", samples);
  as::write_spectrum_csv(out / "as_spectrum.csv", subspace);
  as::write_w1_csv(out / "w1.csv", subspace);
  std::cout << "samples " << samples.size() << "\nactive dimension " << subspace.active_dim << "\neigenvalues";
  for (Eigen::Index i = 0; i < subspace.eigenvalues.size(); ++i) std::cout << ' ' << g(subspace.eigenvalues[i]);
  std::cout << '\n';
  for (Eigen::Index j = 0; j < subspace.w1.cols(); ++j) {
    std::cout << "w" << j + 1;
    for (Eigen::Index i = 0; i < subspace.w1.rows(); ++i) std::cout << ' ' << g(subspace.w1(i, j));
    std::cout << '\n';
  }
}

// ---------------------------------------------------------------------------

const std::vector<KeySpec>& podi_keys() {
  static const std::vector<KeySpec> keys = {
      {"schema_version", "integer", 1, "config format version"},
      {"output_dir", "string", "podi_out", "directory receiving decay.csv and evaluated fields"},
      {"snapshots", "string", nullptr, "snapshot-set directory holding manifest.csv", true},
      {"rank", "string or integer", "energy:0.99999", "retained modes: a count or \"energy:<fraction>\""},
      {"scheme", "string", "auto", "coefficient interpolation: auto, spline or rbf"},
      {"evaluate", "array of parameter vectors", json::array(), "points written to evaluations/eval_XXXX.csv"},
  };
  return keys;
}

void run_podi(const json& doc) {
  const Settings s(podi_keys(), doc);
  const podi::ParametricSnapshotSet set = podi::read_snapshot_set(s.text("snapshots"));
  const podi::Model model = podi::build(set, rank_of(s, "rank"), podi::parse_scheme(s.text("scheme")));
  const fs::path out = output_dir(s);
  const auto decay = podi::decay_report(model);
  podi::write_decay_csv(out / "decay.csv", decay);
  std::cout << "samples " << set.size() << "\ndofs " << set.dof_count() << "\nrank " << model.rank() << "\nscheme "
            << podi::scheme_name(model.scheme) << "\nnormalized sigma";
  for (std::size_t i = 0; i < std::min<std::size_t>(decay.size(), 8); ++i) std::cout << ' ' << g(decay[i].normalized);
  std::cout << '\n';

  const json& points = s.raw("evaluate");
  if (!points.is_array()) throw ConfigError("config key 'evaluate' must be an array of parameter vectors");
  for (std::size_t k = 0; k < points.size(); ++k) {
    const json& p = points[k];
    if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != model.param_dim())
      throw ConfigError("evaluate[" + std::to_string(k) + "] must hold " + std::to_string(model.param_dim()) + " numbers");
    Vector mu(model.param_dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      if (!p[static_cast<std::size_t>(i)].is_number())
        throw ConfigError("evaluate[" + std::to_string(k) + "] must hold numbers");
      mu[i] = p[static_cast<std::size_t>(i)].get<double>();
    }
    const Vector field = podi::evaluate(model, mu);
    char name[48];
    std::snprintf(name, sizeof name, "evaluations/eval_%04zu.csv", k);
    io::write_matrix_csv(out / name, field);
    std::cout << "wrote " << (out / name).string() << "\n";
  }
}

// ---------------------------------------------------------------------------

void run_campaign(const json& doc, const std::atomic<bool>& stop) {
  const pipeline::CampaignConfig config = pipeline::config_from_json(doc);
  const auto oracle = make_oracle(config.oracle, config.oracle_options);
  spdlog::info("campaign on '{}' writing to {}", oracle->name(), config.output_dir.string());
  const pipeline::CampaignReport report = pipeline::run_campaign(*oracle, config, pipeline::RunControl{&stop});
  std::cout << pipeline::render_report(pipeline::report_to_json(report), config.output_dir);
  for (const auto& [stage, seconds] : report.timings) spdlog::info("{}: {:.3f} s", stage, seconds);
}

void run_report(const fs::path& report, const fs::path& out) {
  json doc;
  try {
    doc = json::parse(io::read_text(report));
  } catch (const json::parse_error& e) {
    throw IoError(report.string() + ": " + e.what());
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  std::cout << pipeline::render_report(doc, out);
}

}  // namespace nirom::cli
