#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trajlab/contract.hpp"

namespace trajlab::cfg {

// Flat key-value config with [section] headers, '#' / ';' comments, and
// "key = value" lines. Lookups are by "section.key"; CLI flags override by
// writing into the same map.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  static ConfigFile parse(const std::string& text, const std::string& origin = "<string>") {
    ConfigFile cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') {
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
        }
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      }
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad number '" + it->second + "'");
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad integer '" + it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("config key '" + key + "': bad boolean '" + v + "'");
  }

  // Comma-separated integers (e.g. "seeds = 0,1,2").
  std::vector<std::uint64_t> get_seed_list(const std::string& key,
                                           std::vector<std::uint64_t> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::uint64_t> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      try {
        out.push_back(std::stoull(t));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad seed '" + t + "'");
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty seed list");
    return out;
  }

  // All keys under "section." with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& name) const {
    std::map<std::string, std::string> out;
    const std::string prefix = name + ".";
    for (const auto& [k, v] : values_) {
      if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
    }
    return out;
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }

  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace trajlab::cfg
