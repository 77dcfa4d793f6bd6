#include "quditcorr/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "quditcorr/error.hpp"
#include "quditcorr/parallel.hpp"

namespace quditcorr {

void QuenchScenario::validate() const {
  if (n_sites < 2) throw ValidationError("scenario needs at least two sites");
  if (site_i < 1 || site_i > n_sites || site_j < 1 || site_j > n_sites) {
    throw ValidationError(fmt::format("sites ({}, {}) outside the 1-based chain of {}", site_i, site_j, n_sites));
  }
  if (times.empty() || times.front() != 0.0) throw ValidationError("time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw ValidationError("time grid must be strictly increasing");
  }
}

std::vector<double> QuenchScenario::uniform_grid(double t_max, int steps) {
  if (steps < 0) throw ValidationError("steps must be nonnegative");
  if (steps > 0 && !(t_max > 0.0)) throw ValidationError("t_max must be positive");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) grid[k] = steps == 0 ? 0.0 : t_max * k / steps;
  return grid;
}

QuditState neel_superposition(int n_sites) {
  if (n_sites < 2) throw ValidationError("Neel state needs at least two sites");
  // Level 0 is m = +1, level 2 is m = -1.
  std::vector<int> up_first(n_sites);
  std::vector<int> down_first(n_sites);
  for (int k = 0; k < n_sites; ++k) {
    up_first[k] = k % 2 == 0 ? 0 : 2;
    down_first[k] = 2 - up_first[k];
  }
  const RegisterShape shape(std::vector<int>(static_cast<std::size_t>(n_sites), 3));
  const Vector amps = (QuditState::basis(shape, up_first).amplitudes() +
                       QuditState::basis(shape, down_first).amplitudes()) /
                      std::numbers::sqrt2;
  return QuditState(shape, amps);
}

CorrelatorEstimate connected_anticommutator(const CorrelatorEstimate& raw, const CorrelatorEstimate& exp_a,
                                            const CorrelatorEstimate& exp_b) {
  CorrelatorEstimate out = raw;
  out.value = raw.value - 2.0 * exp_a.value * exp_b.value;
  const double da = 2.0 * exp_b.value * exp_a.std_error;
  const double db = 2.0 * exp_a.value * exp_b.std_error;
  out.std_error = std::sqrt(raw.std_error * raw.std_error + da * da + db * db);
  out.shots = raw.shots + exp_a.shots + exp_b.shots;
  if (exp_a.mode == EstimateMode::sampled || exp_b.mode == EstimateMode::sampled) out.mode = EstimateMode::sampled;
  return out;
}

namespace {

double trapezoid(std::span<const double> y, std::span<const double> t) {
  double sum = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) sum += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
  return sum;
}

}  // namespace

double relative_error(std::span<const double> estimate, std::span<const double> reference,
                      std::span<const double> times) {
  if (estimate.size() != times.size() || reference.size() != times.size()) {
    throw DimensionError("traces and time grid differ in length");
  }
  if (times.size() < 2) throw ValidationError("relative error needs at least two grid points");
  std::vector<double> num(times.size());
  std::vector<double> den(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    num[k] = (estimate[k] - reference[k]) * (estimate[k] - reference[k]);
    den[k] = reference[k] * reference[k];
  }
  const double d = trapezoid(den, times);
  if (!(d > 0.0)) throw ValidationError("reference trace vanishes; relative error undefined");
  return trapezoid(num, times) / d;
}

double time_averaged_std(std::span<const double> std_trace, std::span<const double> times) {
  if (std_trace.size() != times.size()) throw DimensionError("trace and time grid differ in length");
  if (times.size() < 2) throw ValidationError("time average needs at least two grid points");
  return trapezoid(std_trace, times) / (times.back() - times.front());
}

std::vector<double> ReferenceTrace::connected_plus() const {
  std::vector<double> out(c_plus.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = c_plus[k] - 2.0 * exp_a * exp_b[k];
  return out;
}

ReferenceTrace reference_trace(const HermitianObservable& a, const HermitianObservable& b, double t1,
                               std::span<const double> times, const QuditState& psi0, const Propagator& prop) {
  ReferenceTrace out;
  out.times.assign(times.begin(), times.end());
  QuditState psi = prop.evolve(psi0, t1);
  const OutcomeDistribution da = measurement_distribution(psi, a);
  out.exp_a = da.mean();
  out.var_a = da.variance();
  QuditState phi = apply_local(psi, a.op());
  double now = t1;
  for (double t2 : times) {
    if (t2 < now) throw ValidationError("reference times must be nondecreasing and no earlier than t1");
    prop.evolve_inplace(psi, t2 - now);
    prop.evolve_inplace(phi, t2 - now);
    now = t2;
    const Complex c = inner(phi, apply_local(psi, b.op()));
    out.c_plus.push_back(2.0 * c.real());
    out.c_minus.push_back(-2.0 * c.imag());
    const OutcomeDistribution db = measurement_distribution(psi, b);
    out.exp_b.push_back(db.mean());
    out.var_b.push_back(db.variance());
  }
  return out;
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::hadamard:
      return "hadamard";
    case Protocol::lr_hermitian:
      return "lr_hermitian";
    case Protocol::lr_non_hermitian:
      return "lr_non_hermitian";
  }
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::hadamard, Protocol::lr_hermitian, Protocol::lr_non_hermitian}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

StreamKey point_key(std::uint64_t seed, Protocol p, std::size_t lambda_index, char kind, std::size_t time_index) {
  StreamKey key{seed, static_cast<std::uint64_t>(p)};
  key = substream(key, lambda_index);
  key = substream(key, static_cast<std::uint64_t>(kind));
  return substream(key, time_index);
}

std::optional<double> safe_relative_error(std::span<const double> est, std::span<const double> ref,
                                          std::span<const double> times) {
  if (times.size() < 2) return std::nullopt;
  std::vector<double> sq(ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) sq[k] = ref[k] * ref[k];
  if (!(trapezoid(sq, times) > 0.0)) return std::nullopt;
  return relative_error(est, ref, times);
}

std::optional<double> safe_time_average(std::span<const double> trace, std::span<const double> times) {
  if (times.size() < 2) return std::nullopt;
  return time_averaged_std(trace, times);
}

struct KindTraces {
  std::vector<double> exact, sampled, std_exact, std_sampled;
};

void merit_into(FigureOfMerit& exact, std::optional<FigureOfMerit>& sampled, char kind, const KindTraces& tr,
                std::span<const double> ref, std::span<const double> times, bool has_samples) {
  auto& r_exact = kind == '+' ? exact.r_plus : exact.r_minus;
  auto& dc_exact = kind == '+' ? exact.dc_plus : exact.dc_minus;
  r_exact = safe_relative_error(tr.exact, ref, times);
  dc_exact = safe_time_average(tr.std_exact, times);
  if (has_samples) {
    if (!sampled) sampled.emplace();
    (kind == '+' ? sampled->r_plus : sampled->r_minus) = safe_relative_error(tr.sampled, ref, times);
    (kind == '+' ? sampled->dc_plus : sampled->dc_minus) = safe_time_average(tr.std_sampled, times);
  }
}

}  // namespace

StudyResult run_quench_study(const QuenchScenario& scenario, const StudyOptions& options) {
  scenario.validate();
  for (double lambda : options.lambdas) {
    if (!(lambda > 0.0)) throw ValidationError(fmt::format("lambda must be positive (got {})", lambda));
  }
  if (!(options.pulse_area > 0.0)) throw ValidationError("pulse_area must be positive");

  const auto h0 = std::make_shared<const SparseHamiltonian>(build_xxz(scenario.n_sites, 1.0, scenario.jz_over_jxy));
  const PropagatorFactory factory = default_propagator_factory(options.propagator);
  const Propagator prop0 = factory(h0);
  const QuditState psi0 = neel_superposition(scenario.n_sites);
  const HermitianObservable obs_a(spin_matrix(1.0, SpinAxis::z, scenario.site_i - 1));
  const HermitianObservable obs_b(spin_matrix(1.0, SpinAxis::z, scenario.site_j - 1));
  const std::vector<double>& times = scenario.times;
  constexpr double t1 = 0.0;

  auto has = [&](Protocol p) {
    return std::find(options.protocols.begin(), options.protocols.end(), p) != options.protocols.end();
  };

  // Points where the pulse has ended; linear response is defined only there.
  const double dt = options.pulse_area / h0->couplings().j_xy;
  std::vector<double> lr_times;
  std::size_t lr_offset = times.size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t1 + dt - 1e-12) {
      if (lr_times.empty()) lr_offset = k;
      lr_times.push_back(times[k]);
    }
  }

  // Trace computations fan out as independent tasks.
  struct LrTask {
    std::size_t lambda_index;
    PerturbationKind kind;
  };
  ReferenceTrace reference;
  std::array<std::vector<std::array<double, 4>>, 2> hadamard_probs;
  std::vector<LrTask> lr_tasks;
  for (std::size_t li = 0; li < options.lambdas.size(); ++li) {
    if (has(Protocol::lr_hermitian)) lr_tasks.push_back({li, PerturbationKind::hermitian});
    if (has(Protocol::lr_non_hermitian)) lr_tasks.push_back({li, PerturbationKind::non_hermitian});
  }
  std::vector<std::vector<LrPoint>> lr_points(lr_tasks.size());

  auto lr_config = [&](const LrTask& task) {
    return LinearResponseConfig{options.lambdas[task.lambda_index], options.pulse_area, scenario.site_i - 1,
                                scenario.site_j - 1, task.kind};
  };

  const std::size_t n_tasks = 3 + lr_tasks.size();
  const auto done = parallel_for(
      n_tasks, options.workers,
      [&](std::size_t i) {
        if (i == 0) {
          reference = reference_trace(obs_a, obs_b, t1, times, psi0, prop0);
        } else if (i <= 2) {
          if (!has(Protocol::hadamard)) return;
          const auto phase = i == 1 ? AncillaPhase::real : AncillaPhase::imaginary;
          hadamard_probs[i - 1] = hadamard_trace(obs_a, obs_b, t1, times, psi0, prop0, phase);
        } else {
          if (lr_times.empty()) return;
          const LrTask& task = lr_tasks[i - 3];
          lr_points[i - 3] = lr_trace(lr_config(task), t1, lr_times, psi0, h0, factory);
        }
      },
      options.cancel);

  StudyResult result;
  result.incomplete = std::find(done.begin(), done.end(), 0) != done.end();
  if (!done[0]) return result;

  const bool sampled = options.sampled;
  const std::uint64_t seed = scenario.seed;

  if (has(Protocol::hadamard) && done[1] && done[2]) {
    ProtocolSummary summary{Protocol::hadamard, std::nullopt, {}, std::nullopt};
    const auto connected_ref = reference.connected_plus();
    for (char kind : {'+', '-'}) {
      const bool plus = kind == '+';
      const auto& probs = hadamard_probs[plus ? 0 : 1];
      const std::uint64_t b = plus ? options.budgets.hadamard_plus : options.budgets.hadamard_minus;
      KindTraces tr;
      for (std::size_t k = 0; k < times.size(); ++k) {
        const StreamKey key = point_key(seed, Protocol::hadamard, 0, kind, k);
        CorrelatorEstimate exact = estimate_from_probabilities(probs[k], obs_a.spectral_norm(), obs_b.spectral_norm(),
                                                               Budget::exact(b));
        std::optional<CorrelatorEstimate> sample;
        if (sampled) {
          sample = estimate_from_probabilities(probs[k], obs_a.spectral_norm(), obs_b.spectral_norm(),
                                               Budget::sampled(b, substream(key, 0)));
        }
        if (plus) {
          // Disconnected part from separate projective measurements, b shots each.
          const double bd = static_cast<double>(b);
          const CorrelatorEstimate ea{reference.exp_a, std::sqrt(reference.var_a / bd), b, EstimateMode::exact};
          const CorrelatorEstimate eb{reference.exp_b[k], std::sqrt(reference.var_b[k] / bd), b, EstimateMode::exact};
          exact = connected_anticommutator(exact, ea, eb);
          if (sample) {
            Rng rng = make_rng(substream(key, 1));
            auto sample_mean = [&](double mean, double var) {
              // Spin-1 outcome distribution from its first two moments.
              const double second = var + mean * mean;
              const OutcomeDistribution d{{1.0, 0.0, -1.0},
                                          {std::max(0.0, 0.5 * (second + mean)), std::max(0.0, 1.0 - second),
                                           std::max(0.0, 0.5 * (second - mean))}};
              const OutcomeDistribution s = sample_distribution(d, b, rng);
              return CorrelatorEstimate{s.mean(), std::sqrt(s.variance() / bd), b, EstimateMode::sampled};
            };
            const CorrelatorEstimate sa = sample_mean(reference.exp_a, reference.var_a);
            const CorrelatorEstimate sb = sample_mean(reference.exp_b[k], reference.var_b[k]);
            sample = connected_anticommutator(*sample, sa, sb);
          }
        }
        tr.exact.push_back(exact.value);
        tr.std_exact.push_back(exact.std_error);
        if (sample) {
          tr.sampled.push_back(sample->value);
          tr.std_sampled.push_back(sample->std_error);
        }
        result.records.push_back(ResultRecord{Protocol::hadamard, kind, times[k], std::nullopt, exact.value,
                                              sample ? std::optional(sample->value) : std::nullopt,
                                              sample ? sample->std_error : exact.std_error, exact.shots, seed});
      }
      merit_into(summary.exact, summary.sampled, kind, tr, plus ? connected_ref : reference.c_minus, times, sampled);
    }
    result.summaries.push_back(summary);
  }

  // Linear response: hermitian -> C^-, non-hermitian -> connected C^+.
  for (Protocol protocol : {Protocol::lr_hermitian, Protocol::lr_non_hermitian}) {
    if (!has(protocol)) continue;
    const bool herm = protocol == Protocol::lr_hermitian;
    const char kind = herm ? '-' : '+';
    const std::uint64_t b = herm ? options.budgets.lr_minus : options.budgets.lr_plus;
    std::vector<double> ref;
    if (!lr_times.empty()) {
      const auto full = herm ? reference.c_minus : reference.connected_plus();
      ref.assign(full.begin() + static_cast<long>(lr_offset), full.end());
    }
    for (std::size_t ti = 0; ti < lr_tasks.size(); ++ti) {
      const LrTask& task = lr_tasks[ti];
      if ((task.kind == PerturbationKind::hermitian) != herm || !done[3 + ti]) continue;
      const LinearResponseConfig config = lr_config(task);
      ProtocolSummary summary{protocol, config.lambda, {}, std::nullopt};
      KindTraces tr;
      for (std::size_t k = 0; k < lr_points[ti].size(); ++k) {
        const LrPoint& point = lr_points[ti][k];
        const CorrelatorEstimate exact = lr_estimate(config, point, LrBudget::exact(2 * b));
        std::optional<CorrelatorEstimate> sample;
        if (sampled) {
          const StreamKey key = point_key(seed, protocol, task.lambda_index, kind, lr_offset + k);
          sample = lr_estimate(config, point, LrBudget::sampled(2 * b, key));
          tr.sampled.push_back(sample->value);
          tr.std_sampled.push_back(sample->std_error);
        }
        tr.exact.push_back(exact.value);
        tr.std_exact.push_back(exact.std_error);
        result.records.push_back(ResultRecord{protocol, kind, point.t2, config.lambda, exact.value,
                                              sample ? std::optional(sample->value) : std::nullopt,
                                              sample ? sample->std_error : exact.std_error,
                                              sample ? sample->shots : exact.shots, seed});
      }
      if (!lr_times.empty()) merit_into(summary.exact, summary.sampled, kind, tr, ref, lr_times, sampled);
      result.summaries.push_back(summary);
    }
  }
  return result;
}

}  // namespace quditcorr
