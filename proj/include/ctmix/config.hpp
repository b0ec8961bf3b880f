#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctmix/errors.hpp"

namespace ctmix {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

// Flat `key = value` lines; '#' starts a comment; blank lines ignored.
inline KeyValues parse_key_values(const std::string& content) {
  KeyValues kv;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    kv[key] = value;
  }
  return kv;
}

inline KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

// `key=value` command-line overrides win over file entries.
inline void apply_override(KeyValues& kv, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be key=value: '" + spec + "'");
  kv[detail::trim(spec.substr(0, eq))] = detail::trim(spec.substr(eq + 1));
}

enum class FieldType { U64, F64, String, F64List };

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::F64;
  bool required = false;
  std::string default_value;  // ignored when required
};

// Per-command schema: unknown keys are rejected, required keys must be
// present, and every value must parse as its declared type.
class ConfigSchema {
public:
  explicit ConfigSchema(std::vector<FieldSpec> fields) : fields_(std::move(fields)) {}

  KeyValues validate(const KeyValues& input) const {
    for (const auto& [k, v] : input) {
      if (!find(k)) throw ConfigError("unknown config key '" + k + "'");
    }
    KeyValues out;
    for (const auto& f : fields_) {
      const auto it = input.find(f.name);
      if (it == input.end()) {
        if (f.required) throw ConfigError("missing required config field '" + f.name + "'");
        out[f.name] = f.default_value;
      } else {
        check_type(f, it->second);
        out[f.name] = it->second;
      }
    }
    return out;
  }

private:
  const FieldSpec* find(const std::string& name) const {
    for (const auto& f : fields_)
      if (f.name == name) return &f;
    return nullptr;
  }

  static void check_type(const FieldSpec& f, const std::string& value) {
    switch (f.type) {
      case FieldType::U64:
        parse_u64(f.name, value);
        break;
      case FieldType::F64:
        parse_f64(f.name, value);
        break;
      case FieldType::F64List:
        parse_f64_list(f.name, value);
        break;
      case FieldType::String:
        break;
    }
  }

public:
  static std::uint64_t parse_u64(const std::string& name, const std::string& value) {
    try {
      std::size_t used = 0;
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      const unsigned long long v = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("field '" + name + "': expected unsigned integer, got '" + value +
                        "'");
    }
  }

  static double parse_f64(const std::string& name, const std::string& value) {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("field '" + name + "': expected number, got '" + value + "'");
    }
  }

  static std::vector<double> parse_f64_list(const std::string& name,
                                            const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(parse_f64(name, detail::trim(item)));
    if (out.empty()) throw ConfigError("field '" + name + "': empty list");
    return out;
  }

private:
  std::vector<FieldSpec> fields_;
};

// Worker pool size: the CTMIX_THREADS environment variable overrides the
// configured value (the only environment the CLI reads).
inline unsigned resolve_threads(unsigned configured) {
  if (const char* env = std::getenv("CTMIX_THREADS")) {
    try {
      const unsigned long v = std::stoul(env);
      if (v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to configured value
    }
  }
  return configured == 0 ? 1 : configured;
}

}  // namespace ctmix
