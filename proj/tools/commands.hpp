#pragma once

#include <atomic>
#include <filesystem>
#include <vector>

#include "settings.hpp"

namespace nirom::cli {

const std::vector<KeySpec>& ffd_keys();
const std::vector<KeySpec>& dmd_keys();
const std::vector<KeySpec>& as_keys();
const std::vector<KeySpec>& podi_keys();

void run_ffd(const json& doc);
void run_dmd(const json& doc);
void run_as(const json& doc);
void run_podi(const json& doc);
void run_campaign(const json& doc, const std::atomic<bool>& stop);

/// Renders report.json into plot-ready CSVs under `out` and prints the table.
void run_report(const std::filesystem::path& report, const std::filesystem::path& out);

}  // namespace nirom::cli
