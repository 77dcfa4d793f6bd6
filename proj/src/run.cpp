#include "quditcorr/run.hpp"

#include <charconv>
#include <chrono>
#include <fstream>

#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>

#include "quditcorr/error.hpp"

namespace quditcorr {

using nlohmann::json;

namespace {

// Shortest representation that round-trips; independent of locale.
void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

json merit_json(const FigureOfMerit& f) {
  auto field = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"r_plus", field(f.r_plus)},
          {"r_minus", field(f.r_minus)},
          {"dc_plus", field(f.dc_plus)},
          {"dc_minus", field(f.dc_minus)}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("write to {} failed", path.string()));
}

}  // namespace

std::string format_results_csv(const std::vector<ResultRecord>& records) {
  std::string out = "protocol,kind,t,lambda,exact,sampled,std_error,shots,seed\n";
  for (const ResultRecord& r : records) {
    out += to_string(r.protocol);
    out += ',';
    out += r.kind;
    out += ',';
    append_double(out, r.t);
    out += ',';
    if (r.lambda) append_double(out, *r.lambda);
    out += ',';
    append_double(out, r.exact);
    out += ',';
    if (r.sampled) append_double(out, *r.sampled);
    out += ',';
    append_double(out, r.std_error);
    out += ',';
    out += std::to_string(r.shots);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::string format_summary_json(const StudyResult& result, const ParsedConfig& parsed, double runtime_seconds) {
  json merits = json::array();
  for (const ProtocolSummary& s : result.summaries) {
    merits.push_back({{"protocol", std::string(to_string(s.protocol))},
                      {"lambda", s.lambda ? json(*s.lambda) : json(nullptr)},
                      {"exact", merit_json(s.exact)},
                      {"sampled", s.sampled ? merit_json(*s.sampled) : json(nullptr)}});
  }
  json j = json::object();
  j["figures_of_merit"] = merits;
  j["incomplete"] = result.incomplete;
  j["records"] = result.records.size();
  j["runtime_seconds"] = runtime_seconds;
  j["versions"] = {{"quditcorr", kVersion},
                   {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                   {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
                   {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                                 NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__}};
  j["config"] = json::parse(emit_config(parsed.config));
  j["defaults_applied"] = parsed.defaults_applied;
  return j.dump(2) + "\n";
}

RunOutcome run(const ParsedConfig& parsed, const std::atomic<bool>* cancel) {
  parsed.config.validate();
  const auto start = std::chrono::steady_clock::now();
  StudyOptions options = parsed.config.study_options();
  options.cancel = cancel;
  RunOutcome out;
  out.result = run_quench_study(parsed.config.scenario(), options);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(parsed.config.output);
  std::filesystem::create_directories(dir);
  out.csv_path = dir / "results.csv";
  out.summary_path = dir / "summary.json";
  write_file(out.csv_path, format_results_csv(out.result.records));
  write_file(out.summary_path, format_summary_json(out.result, parsed, elapsed));
  return out;
}

}  // namespace quditcorr
