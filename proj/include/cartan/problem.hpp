#pragma once

// Line-oriented problem files (docs/problem-format.md) and report serialization.

#include <stdexcept>
#include <string>

#include "cartan/engine.hpp"

namespace cartan {

class ProblemError : public std::runtime_error {
 public:
  ProblemError(const std::string& source, std::size_t line, const std::string& msg)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                           msg),
        line_(line) {}
  /// 1-based line of the offending entry, 0 for whole-file checks.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ProblemFile {
  std::string title;
  GStructureProblem problem;
  Policy policy;
};

/// Parses and validates; `source` only names the input in diagnostics.
ProblemFile parse_problem(const std::string& text, const std::string& source = "<input>");
ProblemFile load_problem(const std::string& path);

/// Deterministic JSON rendering (two-space indent, fixed key order, no timings).
std::string report_json(const EquivalenceReport& r);
std::string report_text(const EquivalenceReport& r);

}  // namespace cartan
