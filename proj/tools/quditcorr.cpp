#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dense_oracle.hpp"
#include "quditcorr/benchmark.hpp"
#include "quditcorr/config.hpp"
#include "quditcorr/error.hpp"
#include "quditcorr/run.hpp"

namespace qc = quditcorr;

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_interrupt(int) { g_cancel.store(true); }

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("quditcorr");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("QUDITCORR_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

void mark_set(qc::ParsedConfig& parsed, const std::string& key) {
  std::erase(parsed.defaults_applied, key);
}

qc::LocalOperator named_observable(const std::string& name, double spin, int site) {
  if (name == "sx") return qc::spin_matrix(spin, qc::SpinAxis::x, site);
  if (name == "sy") return qc::spin_matrix(spin, qc::SpinAxis::y, site);
  if (name == "sz") return qc::spin_matrix(spin, qc::SpinAxis::z, site);
  throw qc::ValidationError(fmt::format("unknown observable \"{}\" (expected sx, sy or sz)", name));
}

std::string format_matrix(const qc::Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += fmt::format("  {:+.6f}{:+.6f}i", m(i, j).real(), m(i, j).imag());
    }
    out += '\n';
  }
  return out;
}

// Exact Hadamard-test correlators against the dense Heisenberg-picture
// computation for N = 2..4 at random times.
int validate_against_oracle(std::uint64_t seed, int points) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 5.0);
  double worst = 0.0;
  for (int n = 2; n <= 4; ++n) {
    const auto h = std::make_shared<const qc::SparseHamiltonian>(qc::build_xxz(n, 1.0, 0.5));
    const auto prop = qc::Propagator::automatic(h);
    const qc::QuditState psi0 = qc::neel_superposition(n);
    const qc::HermitianObservable a(qc::spin_matrix(1.0, qc::SpinAxis::z, 0));
    const qc::HermitianObservable b(qc::spin_matrix(1.0, qc::SpinAxis::z, 1));
    const oracle::Mat hd = oracle::xxz_hamiltonian(n, 1.0, 0.5);
    const oracle::Mat ad = oracle::embed(oracle::spin1_z(), 0, n);
    const oracle::Mat bd = oracle::embed(oracle::spin1_z(), 1, n);
    const oracle::Vec psi = oracle::neel_superposition(n);
    double max_err = 0.0;
    for (int k = 0; k < points; ++k) {
      const double t2 = 5.0 - uniform(rng);  // (0, 5]
      const auto est = qc::measure_dynamical_correlator(a, b, 0.0, t2, psi0, prop, qc::Budget::exact());
      const auto ref = oracle::two_time(ad, bd, hd, 0.0, t2, psi);
      max_err = std::max({max_err, std::abs(est.plus.value - ref.plus), std::abs(est.minus.value - ref.minus)});
    }
    fmt::print("N={}  max |C - oracle| = {:.3e}\n", n, max_err);
    worst = std::max(worst, max_err);
  }
  const bool ok = worst <= 1e-8;
  fmt::print("{}: worst error {:.3e} (tolerance 1e-8)\n", ok ? "PASS" : "FAIL", worst);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Two-time correlators of qudit chains via Hadamard tests and linear response"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qc::kVersion);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir;
  double lambda = 0.0;
  std::uint64_t shots = 0;
  int n_sites = 0;
  double t_max = 0.0;
  int steps = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the quench study and write results.csv and summary.json");
  run_cmd->add_option("--config", config_path, "JSON config file");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Base seed");
  auto* workers_opt = run_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory");
  auto* lambda_opt = run_cmd->add_option("--lambda", lambda, "Single perturbation strength");
  auto* shots_opt = run_cmd->add_option("--shots", shots, "Shots per expectation value for every protocol");
  auto* n_opt = run_cmd->add_option("--n-sites", n_sites, "Chain length");
  auto* tmax_opt = run_cmd->add_option("--t-max", t_max, "Last time point, in 1/J_xy");
  auto* steps_opt = run_cmd->add_option("--steps", steps, "Number of time steps");

  double t1 = 0.0;
  double t2 = 1.0;
  std::vector<int> sites{1, 2};
  int corr_n = 4;
  std::uint64_t corr_shots = 0;
  std::uint64_t corr_seed = 0;
  auto* corr_cmd = app.add_subcommand("correlator", "C+ and C- of Sz_i(t1), Sz_j(t2) on the Neel superposition");
  corr_cmd->add_option("--t1", t1, "First time")->check(CLI::NonNegativeNumber);
  corr_cmd->add_option("--t2", t2, "Second time")->check(CLI::NonNegativeNumber);
  corr_cmd->add_option("--sites", sites, "1-based sites i j")->expected(2);
  corr_cmd->add_option("--n-sites", corr_n, "Chain length");
  corr_cmd->add_option("--shots", corr_shots, "Shots per circuit (0 = exact)");
  corr_cmd->add_option("--seed", corr_seed, "Seed for sampling");

  std::string observable = "sz";
  double spin = 1.0;
  auto* dec_cmd = app.add_subcommand("decompose", "Print the unitary W with X = |X| (W + W^dag) / 2");
  dec_cmd->add_option("--observable", observable, "sx, sy or sz");
  dec_cmd->add_option("--spin", spin, "Spin (1/2 to 2)");

  int points = 20;
  std::uint64_t validate_seed = 1;
  auto* val_cmd = app.add_subcommand("validate", "Compare exact Hadamard correlators with the dense oracle, N = 2..4");
  val_cmd->add_option("--points", points, "Random times per chain length");
  val_cmd->add_option("--seed", validate_seed, "Seed for the random times");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      qc::ParsedConfig parsed = config_path.empty() ? qc::parse_config_text("{}") : qc::parse_config(config_path);
      auto& c = parsed.config;
      if (*seed_opt) c.seed = seed, mark_set(parsed, "seed");
      if (*workers_opt) c.workers = workers, mark_set(parsed, "workers");
      if (*out_opt) c.output = out_dir, mark_set(parsed, "output");
      if (*lambda_opt) c.lambdas = {lambda}, mark_set(parsed, "lambdas");
      if (*shots_opt) c.budgets = {shots, shots, shots, shots}, mark_set(parsed, "budgets");
      if (*n_opt) c.n_sites = n_sites, mark_set(parsed, "N");
      if (*tmax_opt) c.t_max = t_max, mark_set(parsed, "t_max");
      if (*steps_opt) c.steps = steps, mark_set(parsed, "steps");
      c.validate();
      for (const auto& key : parsed.defaults_applied) spdlog::debug("default applied: {}", key);
      spdlog::info("N={} steps={} t_max={} seed={} workers={}", c.n_sites, c.steps, c.t_max, c.seed, c.workers);
      std::signal(SIGINT, on_interrupt);
      const auto outcome = qc::run(parsed, &g_cancel);
      spdlog::info("wrote {} and {}", outcome.csv_path.string(), outcome.summary_path.string());
      if (outcome.result.incomplete) {
        spdlog::warn("interrupted: partial results written");
        return 130;
      }
      return 0;
    }
    if (*corr_cmd) {
      if (t2 < t1) throw qc::ValidationError("t2 must not precede t1");
      qc::QuenchScenario s;
      s.n_sites = corr_n;
      s.site_i = sites[0];
      s.site_j = sites[1];
      s.validate();
      const auto h = std::make_shared<const qc::SparseHamiltonian>(qc::build_xxz(corr_n, 1.0, s.jz_over_jxy));
      const auto prop = qc::Propagator::automatic(h);
      const qc::HermitianObservable a(qc::spin_matrix(1.0, qc::SpinAxis::z, sites[0] - 1));
      const qc::HermitianObservable b(qc::spin_matrix(1.0, qc::SpinAxis::z, sites[1] - 1));
      const auto budget = corr_shots == 0 ? qc::Budget::exact() : qc::Budget::sampled(corr_shots, {corr_seed, 0});
      const auto pair = qc::measure_dynamical_correlator(a, b, t1, t2, qc::neel_superposition(corr_n), prop, budget);
      fmt::print("C+ = {:.12g}  (std error {:.3g})\n", pair.plus.value, pair.plus.std_error);
      fmt::print("C- = {:.12g}  (std error {:.3g})\n", pair.minus.value, pair.minus.std_error);
      return 0;
    }
    if (*dec_cmd) {
      const qc::HermitianObservable obs(named_observable(observable, spin, 0));
      const auto d = qc::decompose(obs);
      fmt::print("|X| = {:.12g}\nW =\n{}", d.norm, format_matrix(d.w.matrix()));
      const qc::Matrix recon = 0.5 * d.norm * (d.w.matrix() + d.w_dagger.matrix());
      fmt::print("max |X - |X|(W + W^dag)/2| = {:.3e}\n", (recon - obs.op().matrix()).cwiseAbs().maxCoeff());
      return 0;
    }
    if (*val_cmd) return validate_against_oracle(validate_seed, points);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
