#include "quditcorr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "quditcorr/error.hpp"

namespace quditcorr {

using nlohmann::json;

void RunConfig::validate() const {
  if (n_sites < 2) throw ValidationError(fmt::format("N: need at least 2 sites (got {})", n_sites));
  if (!std::isfinite(jz_over_jxy)) throw ValidationError("jz_over_jxy: must be finite");
  if (site_i < 1 || site_i > n_sites || site_j < 1 || site_j > n_sites) {
    throw ValidationError(fmt::format("sites: ({}, {}) outside 1..{}", site_i, site_j, n_sites));
  }
  if (steps < 0) throw ValidationError(fmt::format("steps: must be nonnegative (got {})", steps));
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError(fmt::format("t_max: must be positive (got {})", t_max));
  if (protocols.empty()) throw ValidationError("protocols: select at least one protocol");
  auto sorted = protocols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("protocols: repeated entry");
  }
  if (lambdas.empty()) throw ValidationError("lambdas: need at least one value");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError(fmt::format("lambdas: must be positive (got {})", l));
  }
  if (!(pulse_area > 0.0) || !std::isfinite(pulse_area)) {
    throw ValidationError(fmt::format("pulse_area: must be positive (got {})", pulse_area));
  }
  if (sampled) {
    const std::pair<const char*, std::uint64_t> checks[] = {{"hadamard_plus", budgets.hadamard_plus},
                                                            {"hadamard_minus", budgets.hadamard_minus},
                                                            {"lr_plus", budgets.lr_plus},
                                                            {"lr_minus", budgets.lr_minus}};
    for (const auto& [name, shots] : checks) {
      if (shots == 0) throw ValidationError(fmt::format("budgets.{}: sampled runs need at least one shot", name));
    }
  }
  if (workers < 0) throw ValidationError(fmt::format("workers: must be nonnegative (got {})", workers));
  if (output.empty()) throw ValidationError("output: empty path");
}

QuenchScenario RunConfig::scenario() const {
  QuenchScenario s;
  s.n_sites = n_sites;
  s.jz_over_jxy = jz_over_jxy;
  s.site_i = site_i;
  s.site_j = site_j;
  s.times = QuenchScenario::uniform_grid(t_max, steps);
  s.seed = seed;
  return s;
}

StudyOptions RunConfig::study_options() const {
  StudyOptions o;
  o.protocols = protocols;
  o.budgets = budgets;
  o.lambdas = lambdas;
  o.pulse_area = pulse_area;
  o.sampled = sampled;
  o.workers = workers;
  return o;
}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <class T>
T get_field(const json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}: wrong type ({})", name, j.type_name()));
  }
}

int get_int(const json& j, const std::string& name) {
  if (!j.is_number_integer()) throw ValidationError(fmt::format("{}: expected an integer", name));
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ValidationError(fmt::format("{}: out of range", name));
  }
  return static_cast<int>(v);
}

std::uint64_t get_count(const json& j, const std::string& name) {
  if (!j.is_number_unsigned()) throw ValidationError(fmt::format("{}: expected a nonnegative integer", name));
  return j.get<std::uint64_t>();
}

double get_real(const json& j, const std::string& name) {
  if (!j.is_number()) throw ValidationError(fmt::format("{}: expected a number", name));
  return j.get<double>();
}

}  // namespace

ParsedConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ValidationError(fmt::format("config parse error at line {}, column {}: {}", line, column, e.what()));
  }
  if (!doc.is_object()) throw ValidationError("config: top level must be a JSON object");

  static const std::vector<std::string> schema = {"N",         "jz_over_jxy", "sites",      "t_max",
                                                  "steps",     "protocols",   "budgets",    "lambdas",
                                                  "pulse_area", "sampled",    "seed",       "workers",
                                                  "output"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(schema.begin(), schema.end(), key) == schema.end()) {
      throw ValidationError(fmt::format("config: unknown key \"{}\"", key));
    }
  }

  ParsedConfig out;
  RunConfig& c = out.config;
  for (const std::string& key : schema) {
    if (!doc.contains(key)) {
      out.defaults_applied.push_back(key);
      continue;
    }
    const json& v = doc.at(key);
    if (key == "N") {
      c.n_sites = get_int(v, key);
    } else if (key == "jz_over_jxy") {
      c.jz_over_jxy = get_real(v, key);
    } else if (key == "sites") {
      if (!v.is_array() || v.size() != 2) throw ValidationError("sites: expected [i, j]");
      c.site_i = get_int(v[0], "sites[0]");
      c.site_j = get_int(v[1], "sites[1]");
    } else if (key == "t_max") {
      c.t_max = get_real(v, key);
    } else if (key == "steps") {
      c.steps = get_int(v, key);
    } else if (key == "protocols") {
      if (!v.is_array()) throw ValidationError("protocols: expected a list of names");
      c.protocols.clear();
      for (const json& name : v) {
        const auto s = get_field<std::string>(name, "protocols[]");
        const auto p = parse_protocol(s);
        if (!p) throw ValidationError(fmt::format("protocols: unknown protocol \"{}\"", s));
        c.protocols.push_back(*p);
      }
    } else if (key == "budgets") {
      if (!v.is_object()) throw ValidationError("budgets: expected an object");
      for (const auto& [name, shots] : v.items()) {
        const std::string field = "budgets." + name;
        if (name == "hadamard_plus") {
          c.budgets.hadamard_plus = get_count(shots, field);
        } else if (name == "hadamard_minus") {
          c.budgets.hadamard_minus = get_count(shots, field);
        } else if (name == "lr_plus") {
          c.budgets.lr_plus = get_count(shots, field);
        } else if (name == "lr_minus") {
          c.budgets.lr_minus = get_count(shots, field);
        } else {
          throw ValidationError(fmt::format("config: unknown key \"{}\"", field));
        }
      }
    } else if (key == "lambdas") {
      if (!v.is_array()) throw ValidationError("lambdas: expected a list of numbers");
      c.lambdas.clear();
      for (const json& l : v) c.lambdas.push_back(get_real(l, "lambdas[]"));
    } else if (key == "pulse_area") {
      c.pulse_area = get_real(v, key);
    } else if (key == "sampled") {
      if (!v.is_boolean()) throw ValidationError("sampled: expected true or false");
      c.sampled = v.get<bool>();
    } else if (key == "seed") {
      c.seed = get_count(v, key);
    } else if (key == "workers") {
      c.workers = get_int(v, key);
    } else if (key == "output") {
      c.output = get_field<std::string>(v, key);
    }
  }
  c.validate();
  return out;
}

ParsedConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string emit_config(const RunConfig& c) {
  json protocols = json::array();
  for (Protocol p : c.protocols) protocols.push_back(std::string(to_string(p)));
  json j = json::object();
  j["N"] = c.n_sites;
  j["jz_over_jxy"] = c.jz_over_jxy;
  j["sites"] = {c.site_i, c.site_j};
  j["t_max"] = c.t_max;
  j["steps"] = c.steps;
  j["protocols"] = protocols;
  j["budgets"] = {{"hadamard_plus", c.budgets.hadamard_plus},
                  {"hadamard_minus", c.budgets.hadamard_minus},
                  {"lr_plus", c.budgets.lr_plus},
                  {"lr_minus", c.budgets.lr_minus}};
  j["lambdas"] = c.lambdas;
  j["pulse_area"] = c.pulse_area;
  j["sampled"] = c.sampled;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output"] = c.output;
  return j.dump(2);
}

}  // namespace quditcorr
