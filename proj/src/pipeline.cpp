#include "nirom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nirom/csv.hpp"
#include "nirom/dmd.hpp"
#include "nirom/errors.hpp"
#include "nirom/parallel.hpp"
#include "nirom/sampling.hpp"

namespace nirom::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration

namespace {

struct KeyInfo {
  const char* path;
  const char* type;
  const char* help;
};

const std::vector<KeyInfo>& key_table() {
  static const std::vector<KeyInfo> keys = {
      {"schema_version", "integer", "config format version, must be 1"},
      {"seed", "integer", "top-level seed; every stage derives its own seed from it by a fixed label"},
      {"output_dir", "string", "directory receiving ledgers, fields and reports"},
      {"oracle.name", "string", "ridge-drag, heat-regime, geo-demo, constant or linear"},
      {"oracle.leakage", "number", "ridge-drag inactive leakage"},
      {"oracle.dim", "integer", "parameter count of the constant and linear oracles"},
      {"oracle.constant", "number", "value of the constant oracle"},
      {"sampling.n_pod", "integer", "full-space Halton samples (>= 2)"},
      {"sampling.n_pod_as", "integer", "samples along the active subspace (>= 2)"},
      {"gradients.scheme", "string", "analytic, central-fd or local-linear"},
      {"gradients.step", "number", "central-difference step in normalized coordinates"},
      {"gradients.neighbors", "integer", "local-linear neighbourhood size, 0 for 2P + 1"},
      {"active_subspace.dim", "integer or \"gap\"", "active dimension, or the spectral-gap rule"},
      {"pod.rank", "string or integer", "retained POD modes: a count or \"energy:<fraction>\""},
      {"pod.scheme", "string", "coefficient interpolation: auto, spline or rbf"},
      {"dmd.snapshots", "integer", "early-time snapshots per sample for time-resolved oracles"},
      {"dmd.dt", "number", "snapshot spacing"},
      {"dmd.rank", "string or integer", "DMD truncation: a count or \"energy:<fraction>\""},
      {"dmd.horizon", "number", "time at which the regime value is read"},
      {"dmd.window", "integer", "samples averaged for the regime value"},
      {"dmd.modes", "string", "exact or projected"},
      {"optimizer.enabled", "boolean", "run the surrogate optimizer and audit"},
      {"optimizer.budget", "integer", "surrogate evaluations (>= 10)"},
      {"execution.workers", "integer", "concurrent oracle evaluations"},
      {"execution.min_success_fraction", "number", "abort a stage when fewer samples succeed"},
      {"execution.max_new_evaluations", "integer", "stop after this many new samples, 0 for no limit"},
  };
  return keys;
}

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else {
    out[prefix] = node;
  }
}

class Reader {
 public:
  explicit Reader(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    flatten(doc, "", values_);
    std::set<std::string> known;
    for (const auto& k : key_table()) known.insert(k.path);
    for (const auto& [path, value] : values_)
      if (!known.count(path)) throw ConfigError("unknown config key '" + path + "'");
  }

  const json* find(const std::string& path) const {
    const auto it = values_.find(path);
    return it == values_.end() ? nullptr : &it->second;
  }

  void count(const std::string& path, std::size_t& out) const {
    if (const json* v = find(path)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        throw ConfigError("config key '" + path + "' must be a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void number(const std::string& path, double& out) const {
    if (const json* v = find(path)) {
      if (!v->is_number()) throw ConfigError("config key '" + path + "' must be a number");
      out = v->get<double>();
    }
  }
  void text(const std::string& path, std::string& out) const {
    if (const json* v = find(path)) {
      if (!v->is_string()) throw ConfigError("config key '" + path + "' must be a string");
      out = v->get<std::string>();
    }
  }
  void flag(const std::string& path, bool& out) const {
    if (const json* v = find(path)) {
      if (!v->is_boolean()) throw ConfigError("config key '" + path + "' must be true or false");
      out = v->get<bool>();
    }
  }
  // rank keys accept an integer count or a string
  void rank(const std::string& path, std::string& out) const {
    if (const json* v = find(path)) {
      if (v->is_number_integer()) out = std::to_string(v->get<long long>());
      else if (v->is_string()) out = v->get<std::string>();
      else throw ConfigError("config key '" + path + "' must be a count or \"energy:<fraction>\"");
      try {
        parse_rank(out);
      } catch (const ConfigError& e) {
        throw ConfigError("config key '" + path + "': " + e.what());
      }
    }
  }

 private:
  std::map<std::string, json> values_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

json rank_to_json(const std::string& rank) {
  if (!rank.empty() && std::all_of(rank.begin(), rank.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::stoull(rank);
  return rank;
}

}  // namespace

RankSpec parse_rank(const std::string& text) {
  const std::string prefix = "energy:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string tail = text.substr(prefix.size());
    char* end = nullptr;
    const double eps = std::strtod(tail.c_str(), &end);
    if (tail.empty() || end != tail.c_str() + tail.size() || !(eps > 0.0 && eps <= 1.0))
      throw ConfigError("energy threshold in '" + text + "' must lie in (0, 1]");
    return RankSpec::energy(eps);
  }
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const auto r = std::stoull(text);
    if (r < 1) throw ConfigError("rank must be at least 1");
    return RankSpec::fixed(static_cast<std::size_t>(r));
  }
  throw ConfigError("rank '" + text + "' is neither a count nor \"energy:<fraction>\"");
}

CampaignConfig config_from_json(const json& doc) {
  const Reader r(doc);
  CampaignConfig c;
  if (const json* v = r.find("schema_version")) {
    if (!v->is_number_integer() || v->get<long long>() != kSchemaVersion)
      throw ConfigError("config schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (const json* v = r.find("seed")) {
    if (!v->is_number_integer() || v->get<long long>() < 0) throw ConfigError("config key 'seed' must be a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  std::string out = c.output_dir.string();
  r.text("output_dir", out);
  require(!out.empty(), "config key 'output_dir' must not be empty");
  c.output_dir = out;

  r.text("oracle.name", c.oracle);
  r.number("oracle.leakage", c.oracle_options.leakage);
  std::size_t dim = static_cast<std::size_t>(c.oracle_options.dim);
  r.count("oracle.dim", dim);
  c.oracle_options.dim = static_cast<Eigen::Index>(dim);
  r.number("oracle.constant", c.oracle_options.constant);
  require(c.oracle_options.leakage >= 0.0, "config key 'oracle.leakage' must be nonnegative");
  require(dim >= 1, "config key 'oracle.dim' must be at least 1");

  r.count("sampling.n_pod", c.n_pod);
  r.count("sampling.n_pod_as", c.n_pod_as);
  require(c.n_pod >= 2, "config key 'sampling.n_pod' must be at least 2");
  require(c.n_pod_as >= 2, "config key 'sampling.n_pod_as' must be at least 2");

  std::string scheme = as::scheme_name(c.gradients.scheme);
  r.text("gradients.scheme", scheme);
  c.gradients.scheme = as::parse_scheme(scheme);
  r.number("gradients.step", c.gradients.step);
  r.count("gradients.neighbors", c.gradients.neighbors);
  require(c.gradients.step > 0.0 && c.gradients.step < 1.0, "config key 'gradients.step' must lie in (0, 1)");

  if (const json* v = r.find("active_subspace.dim")) {
    if (v->is_string() && v->get<std::string>() == "gap") c.as_dim = 0;
    else if (v->is_number_integer() && v->get<long long>() >= 1) c.as_dim = v->get<std::size_t>();
    else throw ConfigError("config key 'active_subspace.dim' must be a positive integer or \"gap\"");
  }

  r.rank("pod.rank", c.pod_rank);
  std::string pod_scheme = podi::scheme_name(c.pod_scheme);
  r.text("pod.scheme", pod_scheme);
  c.pod_scheme = podi::parse_scheme(pod_scheme);

  r.count("dmd.snapshots", c.dmd_snapshots);
  r.number("dmd.dt", c.dmd_dt);
  r.rank("dmd.rank", c.dmd_rank);
  r.number("dmd.horizon", c.dmd_horizon);
  r.count("dmd.window", c.dmd_window);
  std::string modes = c.dmd_exact_modes ? "exact" : "projected";
  r.text("dmd.modes", modes);
  require(modes == "exact" || modes == "projected", "config key 'dmd.modes' must be exact or projected");
  c.dmd_exact_modes = modes == "exact";
  require(c.dmd_snapshots >= 3, "config key 'dmd.snapshots' must be at least 3");
  require(c.dmd_dt > 0.0, "config key 'dmd.dt' must be positive");
  require(c.dmd_window >= 1, "config key 'dmd.window' must be at least 1");
  require(c.dmd_horizon > static_cast<double>(c.dmd_snapshots - 1) * c.dmd_dt,
          "config key 'dmd.horizon' must lie past the last snapshot");

  r.flag("optimizer.enabled", c.optimizer_enabled);
  r.count("optimizer.budget", c.optimizer_budget);
  require(c.optimizer_budget >= 10, "config key 'optimizer.budget' must be at least 10");

  r.count("execution.workers", c.workers);
  r.number("execution.min_success_fraction", c.min_success_fraction);
  r.count("execution.max_new_evaluations", c.max_new_evaluations);
  require(c.workers >= 1, "config key 'execution.workers' must be at least 1");
  require(c.min_success_fraction > 0.0 && c.min_success_fraction <= 1.0,
          "config key 'execution.min_success_fraction' must lie in (0, 1]");
  return c;
}

json config_to_json(const CampaignConfig& c) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir.string();
  doc["oracle"] = {{"name", c.oracle},
                   {"leakage", c.oracle_options.leakage},
                   {"dim", c.oracle_options.dim},
                   {"constant", c.oracle_options.constant}};
  doc["sampling"] = {{"n_pod", c.n_pod}, {"n_pod_as", c.n_pod_as}};
  doc["gradients"] = {{"scheme", as::scheme_name(c.gradients.scheme)},
                      {"step", c.gradients.step},
                      {"neighbors", c.gradients.neighbors}};
  doc["active_subspace"] = {{"dim", c.as_dim == 0 ? json("gap") : json(c.as_dim)}};
  doc["pod"] = {{"rank", rank_to_json(c.pod_rank)}, {"scheme", podi::scheme_name(c.pod_scheme)}};
  doc["dmd"] = {{"snapshots", c.dmd_snapshots}, {"dt", c.dmd_dt},         {"rank", rank_to_json(c.dmd_rank)},
                {"horizon", c.dmd_horizon},     {"window", c.dmd_window}, {"modes", c.dmd_exact_modes ? "exact" : "projected"}};
  doc["optimizer"] = {{"enabled", c.optimizer_enabled}, {"budget", c.optimizer_budget}};
  doc["execution"] = {{"workers", c.workers},
                      {"min_success_fraction", c.min_success_fraction},
                      {"max_new_evaluations", c.max_new_evaluations}};
  return doc;
}

json config_schema() {
  const json defaults = config_to_json(CampaignConfig{});
  json keys = json::array();
  for (const auto& k : key_table()) {
    const json::json_pointer ptr("/" + [&] {
      std::string p = k.path;
      std::replace(p.begin(), p.end(), '.', '/');
      return p;
    }());
    keys.push_back({{"key", k.path}, {"type", k.type}, {"default", defaults.at(ptr)}, {"description", k.help}});
  }
  return {{"schema_version", kSchemaVersion}, {"keys", keys}};
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// sampling and audit

std::vector<Vector> sample_full(const ParameterBox& box, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_full: need at least one sample");
  std::vector<Vector> out;
  for (const Vector& u : halton_unit(n, box.dim(), halton_offset(seed)))
    out.push_back(box.lower().array() + u.array() * (box.upper() - box.lower()).array());
  return out;
}

AuditResult audit(const ParametricOracle& oracle, const Vector& mu, double surrogate_value) {
  if (!oracle.box().contains(mu, 1e-12)) throw DomainError("audit: point " + io::format_vector(mu) + " is outside the box");
  AuditResult a;
  a.mu = mu;
  a.surrogate = surrogate_value;
  a.truth = oracle.value(mu);
  a.gap = std::abs(a.surrogate - a.truth) / (1e-12 + std::abs(a.truth));
  return a;
}

// ---------------------------------------------------------------------------
// ledgers

namespace {

using Row = std::vector<std::string>;

std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of the settings that determine ledger contents.
std::string config_hash(const CampaignConfig& c) {
  json doc = config_to_json(c);
  doc.erase("output_dir");
  doc.erase("execution");
  doc["optimizer"].erase("enabled");
  return fnv_hex(doc.dump());
}

std::string clean_note(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ch == ',' ? ';' : ' ';
  return s;
}

std::string join(const Row& row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += row[i];
  }
  return line;
}

/// Append-only CSV keyed by sample index. Rows are written a batch at a time
/// in index order; a torn last line from a crash is dropped on reopen.
class Ledger {
 public:
  Ledger(fs::path path, Row header, const std::string& hash) : path_(std::move(path)), header_(std::move(header)) {
    if (fs::exists(path_)) {
      std::string text = io::read_text(path_);
      const auto last = text.rfind('\n');
      if (last + 1 != text.size()) {
        text.erase(last == std::string::npos ? 0 : last + 1);
        io::write_text(path_, text);
      }
      const io::CsvTable table = io::read_csv(path_, true);
      std::string stored;
      for (const auto& [k, v] : table.metadata)
        if (k == "config_hash") stored = v;
      if (stored != hash)
        throw ConfigError(path_.string() + " was written by a different configuration; use a fresh output_dir");
      if (table.header != header_) throw IoError(path_.string() + ": unexpected ledger header");
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Row& row = table.rows[r];
        const std::string where = path_.string() + ":" + std::to_string(table.line_numbers[r]);
        if (row.size() != header_.size()) throw IoError(where + ": expected " + std::to_string(header_.size()) + " fields");
        if (row[1] != "ok" && row[1] != "skip") throw IoError(where + ": status must be ok or skip");
        std::size_t index = 0;
        try {
          index = std::stoull(row[0]);
        } catch (const std::exception&) {
          throw IoError(where + ": bad sample index '" + row[0] + "'");
        }
        rows_[index] = row;
      }
    } else {
      io::write_text(path_, "# schema_version=" + std::to_string(kSchemaVersion) + "\n# config_hash=" + hash + "\n" +
                                join(header_) + "\n");
    }
  }

  const std::map<std::size_t, Row>& rows() const { return rows_; }
  bool has(std::size_t i) const { return rows_.count(i) > 0; }

  void append(const std::vector<std::pair<std::size_t, Row>>& batch) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + path_.string());
    for (const auto& [i, row] : batch) {
      out << join(row) << '\n';
      rows_[i] = row;
    }
    out.flush();
    if (!out) throw IoError("write failed on " + path_.string());
  }

 private:
  fs::path path_;
  Row header_;
  std::map<std::size_t, Row> rows_;
};

struct Budget {
  std::size_t cap = 0;
  std::size_t used = 0;
};

/// Evaluates every index missing from the ledger, `workers` at a time.
/// compute(i) returns the complete row for sample i.
template <class Compute>
std::size_t fill_ledger(const std::string& stage, Ledger& ledger, std::size_t n, const CampaignConfig& config,
                        Budget& budget, const RunControl& control, Compute&& compute) {
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i)
    if (!ledger.has(i)) pending.push_back(i);
  std::size_t done = 0;
  while (done < pending.size()) {
    if (control.stop && control.stop->load())
      throw Interrupted("campaign interrupted during stage '" + stage + "'; rerun with the same config to resume");
    std::size_t batch = std::min(config.workers, pending.size() - done);
    if (budget.cap > 0) {
      if (budget.used >= budget.cap)
        throw Interrupted("evaluation cap of " + std::to_string(budget.cap) + " reached during stage '" + stage +
                          "'; rerun to resume");
      batch = std::min(batch, budget.cap - budget.used);
    }
    std::vector<std::pair<std::size_t, Row>> rows(batch);
    parallel_for(batch, config.workers, [&](std::size_t k) {
      const std::size_t i = pending[done + k];
      rows[k] = {i, compute(i)};
    });
    ledger.append(rows);
    done += batch;
    budget.used += batch;
  }
  return pending.size();
}

std::string sample_file(std::size_t i) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "fields/sample_%04zu.csv", i);
  return buf;
}

void write_field(const fs::path& path, const Vector& field) {
  std::string text;
  text.reserve(static_cast<std::size_t>(field.size()) * 24);
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    text += io::format_double(field[i]);
    text += '\n';
  }
  io::write_text(path, text);
}

Vector read_field(const fs::path& path) {
  const Matrix m = io::read_matrix_csv(path);
  if (m.cols() != 1) throw IoError(path.string() + ": expected one value per line");
  return m.col(0);
}

struct FieldResult {
  Vector field;
  std::string note;
};

/// Steady field of the oracle, through the DMD regime forecast when the
/// oracle is time resolved.
FieldResult obtain_field(const ParametricOracle& oracle, const Vector& mu, const CampaignConfig& c) {
  if (!oracle.time_resolved()) return {oracle.field(mu), ""};
  const dmd::SnapshotSeries series = oracle.time_series(mu, c.dmd_snapshots, c.dmd_dt);
  const dmd::Model model =
      dmd::fit(series, parse_rank(c.dmd_rank), c.dmd_exact_modes ? dmd::ModeKind::Exact : dmd::ModeKind::Projected);
  const dmd::RegimeEstimate regime = dmd::regime_value(model, series.t0 + c.dmd_horizon, c.dmd_window);
  if (regime.divergent) throw NumericError("DMD forecast has a growing mode; no regime value");
  char note[96];
  std::snprintf(note, sizeof note, "dmd_rank=%zu spread=%.3e", model.rank, regime.max_spread);
  return {regime.value, note};
}

Row vector_cells(const Vector& v) {
  Row out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(io::format_double(v[i]));
  return out;
}

Row numbered(const std::string& stem, Eigen::Index n) {
  Row out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

Row concat(std::initializer_list<Row> parts) {
  Row out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Vector parse_cells(const Row& row, std::size_t first, Eigen::Index n, const std::string& where) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = io::parse_double(row[first + static_cast<std::size_t>(i)], where);
  return v;
}

struct FieldSample {
  std::size_t index = 0;
  Vector mu;      ///< physical
  Vector extra;   ///< active coordinates for the active stage
  double value = 0.0;
  Vector field;
};

template <class Compute>
Row guarded_row(std::size_t i, const Row& prefix, std::size_t blank, Compute&& compute) {
  try {
    return compute();
  } catch (const IoError&) {
    throw;
  } catch (const Interrupted&) {
    throw;
  } catch (const std::exception& e) {
    spdlog::warn("sample {} skipped: {}", i, e.what());
    Row row = concat({{std::to_string(i), "skip"}, prefix});
    for (std::size_t k = 0; k < blank; ++k) row.push_back("");
    row.push_back(clean_note(e.what()));
    return row;
  }
}

void check_success(const std::string& stage, const StageSummary& s, const CampaignConfig& c) {
  if (static_cast<double>(s.succeeded) < c.min_success_fraction * static_cast<double>(s.requested))
    throw NumericError("stage '" + stage + "': only " + std::to_string(s.succeeded) + " of " +
                       std::to_string(s.requested) + " samples succeeded");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

}  // namespace

// ---------------------------------------------------------------------------
// campaign

CampaignReport run_campaign(const ParametricOracle& oracle, const CampaignConfig& config, const RunControl& control) {
  if (!oracle.has_field()) throw ConfigError("oracle '" + oracle.name() + "' provides no field snapshots");
  const ParameterBox& box = oracle.box();
  const Eigen::Index p = box.dim();
  const fs::path out = config.output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());

  const std::string hash = config_hash(config);
  {
    json resolved = config_to_json(config);
    resolved.erase("output_dir");
    io::write_text(out / "config.json", resolved.dump(2) + "\n");
  }

  CampaignReport report;
  report.oracle = oracle.name();
  Budget budget{config.max_new_evaluations, 0};
  const RankSpec pod_rank = parse_rank(config.pod_rank);

  // stage 1: full-space samples
  auto t = Clock::now();
  const std::vector<Vector> full_points = sample_full(box, config.n_pod, derive_seed(config.seed, "sample_full"));
  const fs::path full_dir = out / "full";
  Ledger full_ledger(full_dir / "ledger.csv", concat({{"index", "status"}, numbered("mu_", p), {"f", "field", "note"}}),
                     hash);
  StageSummary& full_stage = report.stages["full"];
  full_stage.requested = config.n_pod;
  full_stage.computed = fill_ledger("full", full_ledger, config.n_pod, config, budget, control, [&](std::size_t i) {
    const Vector& mu = full_points[i];
    return guarded_row(i, vector_cells(mu), 2, [&] {
      FieldResult r = obtain_field(oracle, mu, config);
      const double f = oracle.value(mu);
      if (!std::isfinite(f) || !r.field.allFinite()) throw NumericError("non-finite oracle output");
      write_field(full_dir / sample_file(i), r.field);
      return concat({{std::to_string(i), "ok"}, vector_cells(mu), {io::format_double(f), sample_file(i), r.note}});
    });
  });

  std::vector<FieldSample> full;
  for (const auto& [i, row] : full_ledger.rows()) {
    const std::string where = (full_dir / "ledger.csv").string() + " row " + std::to_string(i);
    if (i >= config.n_pod) continue;
    const Vector mu = parse_cells(row, 2, p, where);
    if (mu != full_points[i]) throw ConfigError(where + " does not match the sampling plan; use a fresh output_dir");
    if (row[1] != "ok") {
      ++full_stage.skipped;
      continue;
    }
    FieldSample s;
    s.index = i;
    s.mu = mu;
    s.value = io::parse_double(row[static_cast<std::size_t>(2 + p)], where);
    s.field = read_field(full_dir / row[static_cast<std::size_t>(3 + p)]);
    full.push_back(std::move(s));
  }
  full_stage.succeeded = full.size();
  check_success("full", full_stage, config);
  report.timings["full"] = seconds_since(t);

  // stage 2: gradients of the scalar objective in normalized coordinates
  t = Clock::now();
  StageSummary& grad_stage = report.stages["gradients"];
  grad_stage.requested = full.size();
  std::vector<as::GradientSample> gradients;
  const fs::path grad_dir = out / "gradients";
  if (config.gradients.scheme == as::GradientScheme::LocalLinear) {
    std::vector<Vector> mus;
    std::vector<double> values;
    for (const auto& s : full) {
      mus.push_back(box.to_normalized(s.mu));
      values.push_back(s.value);
    }
    gradients = as::local_linear_gradients(mus, values, config.gradients.neighbors);
    as::write_gradient_ledger(grad_dir / "ledger.csv", gradients);
    grad_stage.succeeded = gradients.size();
  } else {
    if (config.gradients.scheme == as::GradientScheme::Analytic && !oracle.has_gradient())
      throw ConfigError("oracle '" + oracle.name() + "' has no analytic gradient; choose central-fd or local-linear");
    as::Objective objective;
    objective.value = [&](const Vector& m) { return oracle.value(box.to_physical(m)); };
    if (oracle.has_gradient())
      objective.gradient = [&](const Vector& m) {
        return Vector(oracle.gradient(box.to_physical(m)).cwiseProduct(box.half_widths()));
      };
    as::GradientOptions options = config.gradients;
    options.workers = 1;
    Ledger grad_ledger(grad_dir / "ledger.csv",
                       concat({{"index", "status"}, numbered("mu_", p), {"f"}, numbered("grad_", p), {"note"}}), hash);
    grad_stage.computed = fill_ledger("gradients", grad_ledger, full.size(), config, budget, control, [&](std::size_t k) {
      const Vector m = box.to_normalized(full[k].mu);
      return guarded_row(k, vector_cells(m), static_cast<std::size_t>(p + 1), [&] {
        const as::GradientSample g = as::estimate_gradients(objective, {m}, options).front();
        return concat({{std::to_string(k), "ok"}, vector_cells(m), {io::format_double(g.value)}, vector_cells(g.grad), {""}});
      });
    });
    for (const auto& [k, row] : grad_ledger.rows()) {
      if (k >= full.size()) continue;
      if (row[1] != "ok") {
        ++grad_stage.skipped;
        continue;
      }
      const std::string where = (grad_dir / "ledger.csv").string() + " row " + std::to_string(k);
      as::GradientSample g;
      g.mu = parse_cells(row, 2, p, where);
      g.value = io::parse_double(row[static_cast<std::size_t>(2 + p)], where);
      g.grad = parse_cells(row, static_cast<std::size_t>(3 + p), p, where);
      gradients.push_back(std::move(g));
    }
    grad_stage.succeeded = gradients.size();
  }
  check_success("gradients", grad_stage, config);

  report.subspace = as::fit_subspace(as::estimate_covariance(gradients),
                                     config.as_dim == 0 ? as::DimSpec::spectral_gap() : as::DimSpec::fixed(config.as_dim));
  const as::ActiveSubspace& subspace = report.subspace;
  const auto m = static_cast<Eigen::Index>(subspace.active_dim);
  as::write_spectrum_csv(out / "as_spectrum.csv", subspace);
  as::write_w1_csv(out / "w1.csv", subspace);
  report.timings["gradients"] = seconds_since(t);

  // stage 3: samples along the active subspace
  t = Clock::now();
  const as::ActiveSamples plan =
      as::sample_active(subspace, box, config.n_pod_as, derive_seed(config.seed, "sample_active"));
  report.active_lower = plan.range_lower;
  report.active_upper = plan.range_upper;
  const fs::path active_dir = out / "active";
  Ledger active_ledger(
      active_dir / "ledger.csv",
      concat({{"index", "status"}, numbered("mu_", p), numbered("y_", m), {"fallback", "f", "field", "note"}}), hash);
  StageSummary& active_stage = report.stages["active"];
  active_stage.requested = config.n_pod_as;
  active_stage.computed =
      fill_ledger("active", active_ledger, config.n_pod_as, config, budget, control, [&](std::size_t i) {
        const Vector& mu = plan.physical[i];
        const Row head = concat({vector_cells(mu), vector_cells(plan.active[i]), {plan.fallback[i] ? "1" : "0"}});
        return guarded_row(i, head, 2, [&] {
          FieldResult r = obtain_field(oracle, mu, config);
          const double f = oracle.value(mu);
          if (!std::isfinite(f) || !r.field.allFinite()) throw NumericError("non-finite oracle output");
          write_field(active_dir / sample_file(i), r.field);
          return concat({{std::to_string(i), "ok"}, head, {io::format_double(f), sample_file(i), r.note}});
        });
      });
  std::vector<FieldSample> active;
  for (const auto& [i, row] : active_ledger.rows()) {
    if (i >= config.n_pod_as) continue;
    const std::string where = (active_dir / "ledger.csv").string() + " row " + std::to_string(i);
    const Vector mu = parse_cells(row, 2, p, where);
    if (mu != plan.physical[i]) throw ConfigError(where + " does not match the sampling plan; use a fresh output_dir");
    if (row[static_cast<std::size_t>(2 + p + m)] == "1") ++report.active_fallbacks;
    if (row[1] != "ok") {
      ++active_stage.skipped;
      continue;
    }
    FieldSample s;
    s.index = i;
    s.mu = mu;
    s.extra = parse_cells(row, static_cast<std::size_t>(2 + p), m, where);
    s.value = io::parse_double(row[static_cast<std::size_t>(3 + p + m)], where);
    s.field = read_field(active_dir / row[static_cast<std::size_t>(4 + p + m)]);
    active.push_back(std::move(s));
  }
  active_stage.succeeded = active.size();
  check_success("active", active_stage, config);
  report.timings["active"] = seconds_since(t);

  // stage 4: both surrogates and their singular value decay
  t = Clock::now();
  auto snapshot_set = [](const std::vector<FieldSample>& samples, auto&& parameter) {
    podi::ParametricSnapshotSet set;
    set.snapshots.resize(samples.front().field.size(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (samples[k].field.size() != set.snapshots.rows()) throw NumericError("field snapshots differ in length");
      set.parameters.push_back(parameter(samples[k]));
      set.snapshots.col(static_cast<Eigen::Index>(k)) = samples[k].field;
    }
    return set;
  };
  const podi::Model full_model =
      podi::build(snapshot_set(full, [&](const FieldSample& s) { return box.to_normalized(s.mu); }), pod_rank,
                  config.pod_scheme);
  const podi::Model as_model =
      podi::build(snapshot_set(active, [](const FieldSample& s) { return s.extra; }), pod_rank, config.pod_scheme);
  report.decay_full = podi::decay_report(full_model);
  report.decay_as = podi::decay_report(as_model);
  report.pod_rank_full = full_model.rank();
  report.pod_rank_as = as_model.rank();
  podi::write_decay_csv(out / "decay_full.csv", report.decay_full);
  podi::write_decay_csv(out / "decay_as.csv", report.decay_as);
  report.timings["pod"] = seconds_since(t);

  // stage 5: optimize the reduced surrogate over the sampled active range, then audit
  if (config.optimizer_enabled) {
    t = Clock::now();
    const ParameterBox active_box(as_model.param_lower, as_model.param_upper);
    auto surrogate = [&](const Vector& y) { return oracle.functional(podi::evaluate(as_model, y)); };
    report.optimum = optimize(surrogate, active_box, config.optimizer_budget, derive_seed(config.seed, "optimize"));
    report.optimum_mu = box.clamp(box.to_physical(as::lift(subspace, report.optimum.argmin)));
    report.audit = audit(oracle, report.optimum_mu, report.optimum.value);
    report.optimized = true;
    report.timings["optimize"] = seconds_since(t);
  }

  io::write_text(out / "report.json", report_to_json(report).dump(2) + "\n");
  json timings(report.timings);
  timings["schema_version"] = kSchemaVersion;
  io::write_text(out / "timings.json", timings.dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// report

namespace {

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json decay_json(const std::vector<podi::DecayEntry>& d) {
  json arr = json::array();
  for (const auto& e : d) arr.push_back({{"index", e.index}, {"sigma", e.sigma}, {"normalized", e.normalized}});
  return arr;
}

}  // namespace

json report_to_json(const CampaignReport& r) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["oracle"] = r.oracle;
  for (const auto& [name, s] : r.stages)
    doc["stages"][name] = {{"requested", s.requested}, {"succeeded", s.succeeded}, {"skipped", s.skipped}};
  doc["pod_full"] = {{"rank", r.pod_rank_full}, {"decay", decay_json(r.decay_full)}};
  doc["pod_as"] = {{"rank", r.pod_rank_as}, {"decay", decay_json(r.decay_as)}};
  json w1 = json::array();
  for (Eigen::Index j = 0; j < r.subspace.w1.cols(); ++j) w1.push_back(vec_json(r.subspace.w1.col(j)));
  doc["active_subspace"] = {{"dim", r.subspace.active_dim},
                            {"eigenvalues", vec_json(r.subspace.eigenvalues)},
                            {"w1", w1},
                            {"range_lower", vec_json(r.active_lower)},
                            {"range_upper", vec_json(r.active_upper)},
                            {"fallbacks", r.active_fallbacks}};
  if (r.optimized) {
    json trace = json::array();
    for (const auto& e : r.optimum.trace)
      trace.push_back({{"evaluation", e.evaluation}, {"point", vec_json(e.point)}, {"value", e.value}, {"best", e.best}});
    doc["optimizer"] = {{"evaluations", r.optimum.evaluations},
                        {"argmin_active", vec_json(r.optimum.argmin)},
                        {"argmin", vec_json(r.optimum_mu)},
                        {"surrogate_value", r.optimum.value},
                        {"trace", trace}};
    doc["audit"] = {{"mu", vec_json(r.audit.mu)},
                    {"surrogate", r.audit.surrogate},
                    {"true", r.audit.truth},
                    {"gap", r.audit.gap}};
  }
  return doc;
}

std::string render_report(const json& report, const fs::path& dir) {
  if (!report.is_object() || report.value("schema_version", 0) != kSchemaVersion)
    throw IoError("report: missing or unsupported schema_version");
  auto decay_of = [&](const char* key) {
    std::vector<podi::DecayEntry> d;
    for (const auto& e : report.at(key).at("decay"))
      d.push_back({e.at("index").get<std::size_t>(), e.at("sigma").get<double>(), e.at("normalized").get<double>()});
    return d;
  };
  std::vector<podi::DecayEntry> full, reduced;
  try {
    full = decay_of("pod_full");
    reduced = decay_of("pod_as");
  } catch (const json::exception& e) {
    throw IoError(std::string("report: malformed decay section: ") + e.what());
  }
  podi::write_decay_csv(dir / "decay_full.csv", full);
  podi::write_decay_csv(dir / "decay_as.csv", reduced);

  const json& as_doc = report.at("active_subspace");
  std::ostringstream spectrum;
  spectrum << "# schema_version=1\nindex,eigenvalue,normalized\n";
  const auto eig = as_doc.at("eigenvalues").get<std::vector<double>>();
  for (std::size_t i = 0; i < eig.size(); ++i)
    spectrum << i + 1 << ',' << io::format_double(eig[i]) << ','
             << io::format_double(eig.front() > 0.0 ? eig[i] / eig.front() : 0.0) << '\n';
  io::write_text(dir / "as_spectrum.csv", spectrum.str());

  std::ostringstream trace;
  trace << "# schema_version=1\n";
  if (report.contains("optimizer")) {
    const json& opt = report.at("optimizer");
    const std::size_t d = opt.at("argmin_active").size();
    trace << "evaluation";
    for (std::size_t i = 0; i < d; ++i) trace << ",y_" << i;
    trace << ",value,best\n";
    for (const auto& e : opt.at("trace")) {
      trace << e.at("evaluation").get<std::size_t>();
      for (double y : e.at("point").get<std::vector<double>>()) trace << ',' << io::format_double(y);
      trace << ',' << io::format_double(e.at("value").get<double>()) << ',' << io::format_double(e.at("best").get<double>())
            << '\n';
    }
  } else {
    trace << "evaluation,value,best\n";
  }
  io::write_text(dir / "optimizer_trace.csv", trace.str());

  std::ostringstream table;
  char line[160];
  table << "campaign report: oracle " << report.value("oracle", std::string("?")) << "\n\n";
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s\n", "stage", "requested", "succeeded", "skipped");
  table << line;
  for (const auto& [name, s] : report.at("stages").items()) {
    std::snprintf(line, sizeof line, "%-10s %10zu %10zu %10zu\n", name.c_str(), s.at("requested").get<std::size_t>(),
                  s.at("succeeded").get<std::size_t>(), s.at("skipped").get<std::size_t>());
    table << line;
  }
  table << '\n';
  std::snprintf(line, sizeof line, "%-6s %14s %14s %10s\n", "mode", "decay_full", "decay_as", "ratio");
  table << line;
  for (std::size_t i = 0; i < std::min<std::size_t>(10, std::max(full.size(), reduced.size())); ++i) {
    const double a = i < full.size() ? full[i].normalized : NAN;
    const double b = i < reduced.size() ? reduced[i].normalized : NAN;
    std::snprintf(line, sizeof line, "%-6zu %14.6e %14.6e %10.4f\n", i + 1, a, b, a > 0.0 ? b / a : NAN);
    table << line;
  }
  table << "\nactive dimension " << as_doc.at("dim").get<std::size_t>() << ", eigenvalues";
  for (double e : eig) {
    std::snprintf(line, sizeof line, " %.4e", e);
    table << line;
  }
  table << '\n';
  if (report.contains("audit")) {
    const json& a = report.at("audit");
    std::snprintf(line, sizeof line, "optimum: surrogate %.8g, true %.8g, relative gap %.3e\n",
                  a.at("surrogate").get<double>(), a.at("true").get<double>(), a.at("gap").get<double>());
    table << line;
  }
  return table.str();
}

}  // namespace nirom::pipeline
