#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wide {

// Plain-text configuration:
//
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := ('#' | ';') text
//   section := '[' name ']'
//   entry   := key '=' value        (inside a section)
//
// Names and keys are [A-Za-z0-9_]+; values are trimmed; a repeated key or
// section is an error. Lists are comma separated.
class Config {
public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  // Throws std::invalid_argument naming the first section or key that is not allowed.
  void require_known(const std::map<std::string, std::set<std::string>>& allowed) const;

  // Writes the same grammar back, sections and keys in sorted order.
  std::string serialize() const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  const std::string& origin() const { return origin_; }

private:
  std::string where(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::map<std::string, std::map<std::string, int>> lines_;
};

}  // namespace wide
