#pragma once

// Key-table config documents for the single-stage subcommands.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nirom/numerics.hpp"

namespace nirom::cli {

using nlohmann::json;

struct KeySpec {
  std::string path;  ///< dotted
  std::string type;
  json fallback;     ///< null with required = false means "unset"
  std::string help;
  bool required = false;
};

/// Reads a JSON config file (or starts from {} when `path` is empty) and
/// applies "a.b=value" overrides. Parse failures are ConfigErrors that carry
/// the parser's line and column.
json load_document(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// A config document checked against a key table: unknown keys are rejected,
/// missing keys take their defaults, and typed getters name the key on error.
class Settings {
 public:
  Settings(std::vector<KeySpec> keys, const json& doc);

  bool has(const std::string& path) const;
  const json& raw(const std::string& path) const;
  std::string text(const std::string& path) const;
  double number(const std::string& path) const;
  std::size_t count(const std::string& path) const;
  bool flag(const std::string& path) const;
  std::vector<double> numbers(const std::string& path) const;
  Vector vector(const std::string& path) const;

  /// {"schema_version", "keys": [{key, type, default, required, description}]}
  static json schema(const std::vector<KeySpec>& keys);

 private:
  std::vector<KeySpec> keys_;
  std::map<std::string, json> values_;
};

}  // namespace nirom::cli
