#include "enkf/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "enkf/errors.hpp"

namespace enkf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return from_stream(in, path);
}

Config Config::from_stream(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string origin = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(origin + ": invalid key '" + key + "'");
    if (cfg.has(key)) {
      throw ConfigError(origin + ": duplicate key '" + key + "' (first set at " +
                        cfg.entries_.at(key).origin + ")");
    }
    cfg.set(key, value, origin);
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  entries_[key] = Entry{value, origin};
}

void Config::apply_overrides(const std::vector<std::string>& args) {
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0 || a.find('=') == std::string::npos) {
      throw ConfigError("unexpected argument '" + a + "' (overrides take the form --key=value)");
    }
    const auto eq = a.find('=');
    std::string key = a.substr(2, eq - 2);
    for (char& c : key) {
      if (c == '-') c = '_';
    }
    if (!valid_key(key)) throw ConfigError("invalid override key in '" + a + "'");
    set(key, a.substr(eq + 1), "--" + key);
  }
}

void Config::fail(const std::string& key, const std::string& what) const {
  const auto& e = entries_.at(key);
  throw ConfigError(e.origin + ": key '" + key + "': " + what + ", got '" + e.value + "'");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail(key, "expected a number");
  return out;
}

long Config::get_long(const std::string& key, long fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail(key, "expected an integer");
  return out;
}

int Config::get_int(const std::string& key, int fallback) const {
  const long v = get_long(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX) fail(key, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(key, "expected a non-negative integer");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(key, "expected a boolean");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double x = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      fail(key, "expected a comma-separated list of numbers");
    }
    out.push_back(x);
  }
  if (out.empty()) fail(key, "expected a non-empty list");
  return out;
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, e] : entries_) {
    if (known.count(key) == 0) throw ConfigError(e.origin + ": unknown key '" + key + "'");
  }
}

std::string Config::echo(const std::string& prefix) const {
  std::string out;
  for (const auto& [key, e] : entries_) out += prefix + key + " = " + e.value + "\n";
  return out;
}

}  // namespace enkf
