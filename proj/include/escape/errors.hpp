#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace escape {

// Invalid physical input (epsilon out of range, wrong flux class, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure did not reach its tolerance. The diagnostics list
// carries the last estimates so the caller can judge how far off it was.
class ConvergenceError : public std::runtime_error {
 public:
  using Diagnostics = std::vector<std::pair<std::string, double>>;

  ConvergenceError(const std::string& what, Diagnostics diag)
      : std::runtime_error(what + format(diag)), diag_(std::move(diag)) {}
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}

  const Diagnostics& diagnostics() const noexcept { return diag_; }

 private:
  static std::string format(const Diagnostics& d) {
    std::string s;
    for (const auto& [k, v] : d) s += " " + k + "=" + std::to_string(v);
    return s.empty() ? s : " [" + s.substr(1) + "]";
  }
  Diagnostics diag_;
};

}  // namespace escape
