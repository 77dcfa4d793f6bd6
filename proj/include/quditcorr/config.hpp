#pragma once

// JSON run configuration.
//
//   {
//     "N": 4,                     chain length
//     "jz_over_jxy": 0.5,
//     "sites": [1, 2],            1-based (i, j) of C_ij(0, t)
//     "t_max": 5.0,               in units of 1/J_xy
//     "steps": 50,                grid is steps + 1 points on [0, t_max]
//     "protocols": ["hadamard", "lr_hermitian", "lr_non_hermitian"],
//     "budgets": {"hadamard_plus": 250, "hadamard_minus": 2000,
//                 "lr_plus": 750, "lr_minus": 6000},
//     "lambdas": [0.2],
//     "pulse_area": 0.001,        J_xy * dt
//     "sampled": true,
//     "seed": 0,
//     "workers": 0,               0 = all cores
//     "output": "out"
//   }
//
// Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "quditcorr/benchmark.hpp"

namespace quditcorr {

struct RunConfig {
  int n_sites = 4;
  double jz_over_jxy = 0.5;
  int site_i = 1;
  int site_j = 2;
  double t_max = 5.0;
  int steps = 50;
  std::vector<Protocol> protocols{Protocol::hadamard, Protocol::lr_hermitian, Protocol::lr_non_hermitian};
  ShotBudgets budgets;
  std::vector<double> lambdas{0.2};
  double pulse_area = 1e-3;
  bool sampled = true;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string output = "out";

  /// Checks every field; throws ValidationError naming the field.
  void validate() const;

  QuenchScenario scenario() const;
  StudyOptions study_options() const;

  bool operator==(const RunConfig&) const = default;
};

struct ParsedConfig {
  RunConfig config;
  /// Keys that were absent and took their default value, in schema order.
  std::vector<std::string> defaults_applied;
};

/// Parses and validates a JSON document. Syntax errors carry line and column.
ParsedConfig parse_config_text(std::string_view text);
ParsedConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON form, every key present; parse_config_text inverts it.
std::string emit_config(const RunConfig& config);

}  // namespace quditcorr
