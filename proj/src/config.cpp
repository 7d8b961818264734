#include "wide/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wide {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

double to_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(where + ": expected a number, got '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) fail("bad section name '" + section + "'");
      if (c.data_.count(section)) fail("repeated section [" + section + "]");
      c.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("entry outside a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) fail("bad key '" + key + "'");
    if (c.data_[section].count(key)) fail("repeated key '" + key + "' in [" + section + "]");
    c.data_[section][key] = value;
    c.lines_[section][key] = line_no;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::where(const std::string& section, const std::string& key) const {
  auto s = lines_.find(section);
  if (s != lines_.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) return origin_ + ":" + std::to_string(k->second) + ": [" + section + "] " + key;
  }
  return origin_ + ": [" + section + "] " + key;
}

bool Config::has_section(const std::string& section) const { return data_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  return v ? to_double(*v, where(section, key)) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  int out = 0;
  const char* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(where(section, key) + ": expected an integer");
  return out;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw std::invalid_argument(where(section, key) + ": expected true/false");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(trim(item), where(section, key)));
  if (out.empty()) throw std::invalid_argument(where(section, key) + ": empty list");
  return out;
}

void Config::require_known(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [section, entries] : data_) {
    auto a = allowed.find(section);
    if (a == allowed.end()) throw std::invalid_argument(origin_ + ": unknown section [" + section + "]");
    for (const auto& kv : entries)
      if (!a->second.count(kv.first)) throw std::invalid_argument(where(section, kv.first) + ": unknown key");
  }
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!valid_name(section) || !valid_name(key)) throw std::invalid_argument("Config::set: bad name");
  data_[section][key] = value;
}

std::string Config::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : data_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace wide
