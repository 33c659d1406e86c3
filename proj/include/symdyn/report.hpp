#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symdyn {

struct Check {
  std::string name;
  std::string status;  // pass, fail or skipped
  double residual = 0.0;
  double bound = 0.0;
};

struct RunReport {
  std::string command;
  std::string inputs_digest;
  nlohmann::json results = nlohmann::json::object();
  std::vector<Check> checks;
  double timing = 0.0;

  // Keys come out sorted. Without timing the output is a pure function of
  // the inputs.
  nlohmann::json to_json(bool include_timing = true) const;
  bool passed() const;
  // True when every number in results and checks is finite.
  bool all_finite() const;
};

struct CommandOptions {
  std::string command;
  std::string spec_path;
  std::string spec_text;
  std::optional<std::string> potential_path;
  std::optional<std::string> potential_text;
  std::string anchor_policy = "lex";  // "lex" or "explicit"
  std::optional<std::string> anchors_path;
  std::optional<std::string> anchors_text;
  std::size_t depth = 12;
  std::size_t nmax = 20;
  unsigned threads = 1;
  std::optional<std::string> stem;
  double t = 1.0;
};

std::string sha256_hex(std::string_view data);

// Runs one subcommand: pressure, classify, reduce, spectral, leaf,
// equilibrium, ledrappier, verify or catmap-demo. Library errors propagate.
RunReport run_command(const CommandOptions& options);

}  // namespace symdyn
