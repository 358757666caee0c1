#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nirom/active_subspaces.hpp"
#include "nirom/box.hpp"
#include "nirom/optimize.hpp"
#include "nirom/oracle.hpp"
#include "nirom/podi.hpp"

namespace nirom::pipeline {

inline constexpr int kSchemaVersion = 1;

struct CampaignConfig {
  std::uint64_t seed = 2024;
  std::filesystem::path output_dir = "campaign_out";
  std::string oracle = "ridge-drag";
  OracleOptions oracle_options;
  std::size_t n_pod = 100;
  std::size_t n_pod_as = 80;
  as::GradientOptions gradients;
  std::size_t as_dim = 1;  ///< 0 selects the spectral-gap rule
  std::string pod_rank = "energy:0.99999";
  podi::Scheme pod_scheme = podi::Scheme::Auto;
  std::size_t dmd_snapshots = 12;
  double dmd_dt = 0.1;
  std::string dmd_rank = "energy:1";
  double dmd_horizon = 20.0;
  std::size_t dmd_window = 16;
  bool dmd_exact_modes = true;
  bool optimizer_enabled = true;
  std::size_t optimizer_budget = 200;
  std::size_t workers = 1;
  double min_success_fraction = 0.8;
  std::size_t max_new_evaluations = 0;  ///< 0 means unlimited; a run that hits the cap stops as interrupted
};

/// Parses a config document. Missing keys take their defaults; unknown keys,
/// wrong types and out-of-range values raise ConfigError naming the key.
CampaignConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const CampaignConfig& config);

/// Every config key with its type, default and meaning.
nlohmann::json config_schema();

/// Applies "a.b.c=value" to a config document; the value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// "energy:<eps>" or a positive integer.
RankSpec parse_rank(const std::string& text);

/// Halton points over the box; the seed selects the sequence offset.
std::vector<Vector> sample_full(const ParameterBox& box, std::size_t n, std::uint64_t seed);

struct StageSummary {
  std::size_t requested = 0;
  std::size_t succeeded = 0;
  std::size_t skipped = 0;
  std::size_t computed = 0;  ///< evaluated in this run rather than read from the ledger
};

struct AuditResult {
  Vector mu;
  double surrogate = 0.0;
  double truth = 0.0;
  double gap = 0.0;
};

/// One full-oracle evaluation at mu compared with a surrogate value.
AuditResult audit(const ParametricOracle& oracle, const Vector& mu, double surrogate_value);

struct CampaignReport {
  std::string oracle;
  std::map<std::string, StageSummary> stages;
  std::vector<podi::DecayEntry> decay_full;
  std::vector<podi::DecayEntry> decay_as;
  std::size_t pod_rank_full = 0;
  std::size_t pod_rank_as = 0;
  as::ActiveSubspace subspace;
  Vector active_lower;
  Vector active_upper;
  std::size_t active_fallbacks = 0;
  bool optimized = false;
  OptimizeResult optimum;
  Vector optimum_mu;  ///< physical parameters of the lifted optimum
  AuditResult audit;
  std::map<std::string, double> timings;  ///< seconds per phase, kept out of report.json
};

/// Deterministic JSON form of everything but the timings.
nlohmann::json report_to_json(const CampaignReport& report);

struct RunControl {
  const std::atomic<bool>* stop = nullptr;  ///< checked between evaluation batches
};

/// Runs the whole comparison, writing ledgers and reports below
/// config.output_dir. Completed ledger rows are reused, so a rerun after an
/// interruption only evaluates what is missing. Throws Interrupted when the
/// stop flag or the evaluation cap ends the run early.
CampaignReport run_campaign(const ParametricOracle& oracle, const CampaignConfig& config, const RunControl& control = {});

/// Writes decay_full.csv, decay_as.csv, as_spectrum.csv and optimizer_trace.csv
/// from a report document into `dir` and returns a fixed-width summary table.
std::string render_report(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace nirom::pipeline
