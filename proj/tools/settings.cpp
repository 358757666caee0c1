#include "settings.hpp"

#include <algorithm>

#include "nirom/csv.hpp"
#include "nirom/errors.hpp"
#include "nirom/pipeline.hpp"

namespace nirom::cli {

namespace {

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object() && !node.empty()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (!prefix.empty()) {
    out[prefix] = node;
  }
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config key '" + path + "' must be " + what);
}

}  // namespace

json load_document(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::string text;
    try {
      text = io::read_text(path);
    } catch (const IoError& e) {
      throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  }
  for (const auto& o : overrides) pipeline::apply_override(doc, o);
  return doc;
}

Settings::Settings(std::vector<KeySpec> keys, const json& doc) : keys_(std::move(keys)) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::map<std::string, json> given;
  flatten(doc, "", given);
  for (const auto& [path, value] : given) {
    const bool known = std::any_of(keys_.begin(), keys_.end(), [&](const KeySpec& k) { return k.path == path; });
    if (!known) throw ConfigError("unknown config key '" + path + "'");
  }
  for (const auto& k : keys_) {
    const auto it = given.find(k.path);
    if (it != given.end() && !it->second.is_null()) values_[k.path] = it->second;
    else if (k.required) throw ConfigError("missing required config key '" + k.path + "' (" + k.help + ")");
    else if (!k.fallback.is_null()) values_[k.path] = k.fallback;
  }
  if (has("schema_version") && raw("schema_version") != json(1)) throw ConfigError("config schema_version must be 1");
}

bool Settings::has(const std::string& path) const { return values_.count(path) > 0; }

const json& Settings::raw(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw ConfigError("config key '" + path + "' is not set");
  return it->second;
}

std::string Settings::text(const std::string& path) const {
  const json& v = raw(path);
  if (!v.is_string()) bad(path, "a string");
  return v.get<std::string>();
}

double Settings::number(const std::string& path) const {
  const json& v = raw(path);
  if (!v.is_number()) bad(path, "a number");
  return v.get<double>();
}

std::size_t Settings::count(const std::string& path) const {
  const json& v = raw(path);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(path, "a non-negative integer");
  return v.get<std::size_t>();
}

bool Settings::flag(const std::string& path) const {
  const json& v = raw(path);
  if (!v.is_boolean()) bad(path, "true or false");
  return v.get<bool>();
}

std::vector<double> Settings::numbers(const std::string& path) const {
  const json& v = raw(path);
  if (!v.is_array()) bad(path, "an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(path, "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Vector Settings::vector(const std::string& path) const {
  const auto v = numbers(path);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json Settings::schema(const std::vector<KeySpec>& keys) {
  json out = json::array();
  for (const auto& k : keys)
    out.push_back(
        {{"key", k.path}, {"type", k.type}, {"default", k.fallback}, {"required", k.required}, {"description", k.help}});
  return {{"schema_version", 1}, {"keys", out}};
}

}  // namespace nirom::cli
