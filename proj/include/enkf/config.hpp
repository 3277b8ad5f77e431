#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace enkf {

/// Plain `key = value` configuration with `#` comments. Every entry
/// remembers where it came from so errors can cite a line number.
class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "path:line" or "--key"
  };

  static Config from_file(const std::string& path);
  static Config from_stream(std::istream& in, const std::string& source);

  void set(const std::string& key, const std::string& value, const std::string& origin);
  /// Applies `--key=value` arguments; anything else is a ConfigError.
  void apply_overrides(const std::vector<std::string>& args);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  /// ConfigError naming the first entry whose key is not in `known`.
  void require_known(const std::set<std::string>& known) const;

  /// `key = value` lines in key order.
  std::string echo(const std::string& prefix = "") const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace enkf
