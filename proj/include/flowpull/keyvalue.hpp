#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace flowpull {

// Flat `key = value` text files; `#` starts a comment. Used for scene specs
// and benchmark suites.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& name = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated values, whitespace trimmed.
  std::vector<std::string> get_list(const std::string& key) const;

  // Throws if any key outside `known` is present.
  void require_known(std::initializer_list<std::string_view> known) const;

  const std::string& name() const { return name_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::string name_;
  std::map<std::string, std::string> entries_;
};

}  // namespace flowpull
