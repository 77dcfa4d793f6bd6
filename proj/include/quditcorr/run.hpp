#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "quditcorr/benchmark.hpp"
#include "quditcorr/config.hpp"

namespace quditcorr {

inline constexpr const char* kVersion = "0.1.0";

/// Header plus one LF-terminated row per record.
std::string format_results_csv(const std::vector<ResultRecord>& records);

/// Figures of merit, runtime, versions, echoed config and applied defaults.
std::string format_summary_json(const StudyResult& result, const ParsedConfig& parsed, double runtime_seconds);

struct RunOutcome {
  StudyResult result;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Runs the study and writes results.csv and summary.json into config.output.
/// When `cancel` fires, whatever finished is written and the summary is
/// marked incomplete.
RunOutcome run(const ParsedConfig& parsed, const std::atomic<bool>* cancel = nullptr);

}  // namespace quditcorr
