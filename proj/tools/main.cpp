#include <atomic>
#include <csignal>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.hpp"
#include "nirom/errors.hpp"
#include "nirom/pipeline.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInterrupted = 130;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  bool schema = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON config file");
  sub->add_option("-s,--set", c.overrides, "override a config key, e.g. --set sampling.n_pod=40 (repeatable)");
  sub->add_flag("--schema", c.schema, "print every config key with its type and default, then exit");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace nirom;
  namespace fs = std::filesystem;

  CLI::App app{"nirom: shape-parameter reduction, reduced-order surrogates and regime forecasting"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more log output on stderr (-v info, -vv debug)");

  Common ffd_opts, dmd_opts, as_opts, podi_opts, campaign_opts;
  auto* ffd = app.add_subcommand("ffd", "deform a mesh with a free-form deformation lattice");
  add_common(ffd, ffd_opts);
  auto* dmd = app.add_subcommand("dmd", "fit DMD to a snapshot CSV; write eigenvalues, predictions and regime value");
  add_common(dmd, dmd_opts);
  std::vector<double> predict_times;
  double horizon = 0.0;
  dmd->add_option("--predict", predict_times, "times at which to write the predicted state (repeatable)");
  auto* horizon_opt = dmd->add_option("--horizon", horizon, "read the regime value at this time");
  auto* as = app.add_subcommand("as", "estimate an active subspace of a shipped oracle or a gradient ledger");
  add_common(as, as_opts);
  auto* podi = app.add_subcommand("podi", "build a POD-interpolation model from a snapshot-set directory");
  add_common(podi, podi_opts);
  auto* campaign = app.add_subcommand("campaign", "run the full-space versus active-subspace surrogate campaign");
  add_common(campaign, campaign_opts);
  auto* report = app.add_subcommand("report", "render report.json into decay, spectrum and trace CSVs plus a table");
  std::string report_path, report_out;
  report->add_option("report", report_path, "path to report.json")->required();
  report->add_option("-o,--output-dir", report_out, "directory for the CSVs (default: the report's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("nirom");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbosity >= 2 ? spdlog::level::debug : verbosity == 1 ? spdlog::level::info : spdlog::level::warn);

  try {
    auto with_doc = [](const Common& c, const std::vector<cli::KeySpec>* keys, auto&& run) {
      if (c.schema) {
        std::cout << (keys ? cli::Settings::schema(*keys) : pipeline::config_schema()).dump(2) << "\n";
        return;
      }
      run(cli::load_document(c.config, c.overrides));
    };
    if (ffd->parsed()) {
      with_doc(ffd_opts, &cli::ffd_keys(), cli::run_ffd);
    } else if (dmd->parsed()) {
      with_doc(dmd_opts, &cli::dmd_keys(), [&](nlohmann::json doc) {
        if (!predict_times.empty()) doc["predict"] = predict_times;
        if (horizon_opt->count() > 0) doc["horizon"] = horizon;
        cli::run_dmd(doc);
      });
    } else if (as->parsed()) {
      with_doc(as_opts, &cli::as_keys(), cli::run_as);
    } else if (podi->parsed()) {
      with_doc(podi_opts, &cli::podi_keys(), cli::run_podi);
    } else if (campaign->parsed()) {
      std::signal(SIGINT, on_sigint);
      with_doc(campaign_opts, nullptr, [](const nlohmann::json& doc) { cli::run_campaign(doc, g_stop); });
    } else if (report->parsed()) {
      const fs::path path = report_path;
      cli::run_report(path, report_out.empty() ? path.parent_path() : fs::path(report_out));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Config: return kExitConfig;
      case ErrorKind::Io: return kExitIo;
      case ErrorKind::Interrupted: return kExitInterrupted;
      default: return kExitNumeric;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
