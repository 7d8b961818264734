#pragma once

#include <string>
#include <vector>

namespace wide {

// One named pass/fail check with a signed margin (>= 0 means satisfied).
struct Check {
  std::string name;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
};

struct Report {
  std::vector<Check> checks;

  void add(std::string name, bool pass, double margin, std::string detail = {}) {
    checks.push_back({std::move(name), pass, margin, std::move(detail)});
  }
  // Records margin >= -slack as a pass.
  void add_margin(std::string name, double margin, double slack = 0.0, std::string detail = {}) {
    add(std::move(name), margin >= -slack, margin, std::move(detail));
  }
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  void append(const Report& other, const std::string& prefix = {}) {
    for (const auto& c : other.checks) checks.push_back({prefix + c.name, c.pass, c.margin, c.detail});
  }
};

}  // namespace wide
