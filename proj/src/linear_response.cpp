#include "quditcorr/linear_response.hpp"

#include <cmath>

#include <fmt/format.h>

#include "quditcorr/error.hpp"

namespace quditcorr {

void LinearResponseConfig::validate() const {
  if (!(lambda > 0.0)) throw ValidationError(fmt::format("lambda must be positive (got {})", lambda));
  if (!(pulse_area > 0.0)) throw ValidationError(fmt::format("pulse_area must be positive (got {})", pulse_area));
  if (probe_site < 0 || readout_site < 0) throw ValidationError("sites must be nonnegative");
}

double normalized_expectation(const QuditState& state, const HermitianObservable& obs) {
  if (!(state.squared_norm() > 0.0)) throw ValidationError("expectation value of a vanishing state");
  return matrix_element(state, obs.op(), state).real() / state.squared_norm();
}

std::uint64_t effective_shots(std::uint64_t nominal, double squared_norm) {
  if (!(squared_norm > 0.0) || squared_norm > 1.0 + 1e-9) {
    throw ValidationError(fmt::format("squared norm {} outside (0, 1]", squared_norm));
  }
  const auto scaled = static_cast<std::uint64_t>(std::llround(static_cast<double>(nominal) * squared_norm));
  return std::max<std::uint64_t>(scaled, 1);
}

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Level k of a spin-s site carries m = s - k.
Moments sz_moments(std::span<const double> p) {
  const double spin = (static_cast<double>(p.size()) - 1.0) / 2.0;
  Moments out;
  double second = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = spin - static_cast<double>(k);
    out.mean += p[k] * m;
    second += p[k] * m * m;
  }
  out.variance = std::max(0.0, second - out.mean * out.mean);
  return out;
}

Moments sampled_moments(std::span<const double> p, std::uint64_t shots, StreamKey key) {
  Rng rng = make_rng(key);
  const auto counts = sample_multinomial(p, shots, rng);
  std::vector<double> freq(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) freq[k] = static_cast<double>(counts[k]) / static_cast<double>(shots);
  return sz_moments(freq);
}

}  // namespace

std::vector<LrPoint> lr_trace(const LinearResponseConfig& config, double t1, std::span<const double> times,
                              const QuditState& psi0, std::shared_ptr<const SparseHamiltonian> h0,
                              const PropagatorFactory& factory) {
  config.validate();
  if (!h0) throw ValidationError("linear response needs a Hamiltonian");
  const int n = h0->num_sites();
  if (config.probe_site >= n || config.readout_site >= n) throw DimensionError("site outside the chain");
  if (!(t1 >= 0.0)) throw ValidationError("t1 must be nonnegative");
  const double dt = config.pulse_duration(h0->couplings().j_xy);
  constexpr double slack = 1e-12;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t1 + dt - slack) {
      throw ValidationError(fmt::format("t2 = {} precedes the end of the pulse at {}", times[k], t1 + dt));
    }
    if (k > 0 && times[k] < times[k - 1]) throw ValidationError("trace times must be nondecreasing");
  }

  const Propagator prop0 = factory(h0);
  const Propagator prop_pulse =
      factory(std::make_shared<const SparseHamiltonian>(build_perturbed(*h0, config.probe_site, config.lambda, config.kind)));

  QuditState reference = psi0;
  QuditState perturbed = prop0.evolve(psi0, t1);
  prop_pulse.evolve_inplace(perturbed, dt);
  double now_ref = 0.0;
  double now_pert = t1 + dt;

  std::vector<LrPoint> out;
  out.reserve(times.size());
  for (double t2 : times) {
    prop0.evolve_inplace(reference, t2 - now_ref);
    prop0.evolve_inplace(perturbed, std::max(0.0, t2 - now_pert));
    now_ref = t2;
    now_pert = std::max(now_pert, t2);
    if (perturbed.squared_norm() < kNormCollapse) {
      throw ValidationError(fmt::format("perturbed branch collapsed (squared norm {:.3e}) at t2 = {}",
                                        perturbed.squared_norm(), t2));
    }
    out.push_back(LrPoint{t2, site_probabilities(perturbed, config.readout_site),
                          site_probabilities(reference, config.readout_site), perturbed.squared_norm()});
  }
  return out;
}

CorrelatorEstimate lr_estimate(const LinearResponseConfig& config, const LrPoint& point, const LrBudget& budget) {
  config.validate();
  const double eps = config.lambda * config.pulse_area;
  const std::uint64_t half = budget.shots_per_point / 2;
  const std::uint64_t n_ref = budget.shots_per_point - half;
  std::uint64_t n_pert = half;
  if (config.kind == PerturbationKind::non_hermitian && half > 0) {
    n_pert = effective_shots(half, std::min(1.0, point.perturbed_squared_norm));
  }

  CorrelatorEstimate out;
  out.mode = budget.mode;
  out.shots = budget.shots_per_point > 0 ? n_pert + n_ref : 0;
  Moments pert;
  Moments ref;
  if (budget.mode == EstimateMode::sampled) {
    if (half == 0 || n_ref == 0) throw ValidationError("sampled linear response needs at least two shots per point");
    pert = sampled_moments(point.perturbed_probabilities, n_pert, substream(budget.key, 0));
    ref = sampled_moments(point.reference_probabilities, n_ref, substream(budget.key, 1));
  } else {
    pert = sz_moments(point.perturbed_probabilities);
    ref = sz_moments(point.reference_probabilities);
  }
  out.value = -(pert.mean - ref.mean) / eps;
  if (budget.shots_per_point > 0 && n_pert > 0 && n_ref > 0) {
    out.std_error = std::sqrt(pert.variance / static_cast<double>(n_pert) + ref.variance / static_cast<double>(n_ref)) / eps;
  }
  return out;
}

CorrelatorEstimate measure_lr(const LinearResponseConfig& config, double t1, double t2, const QuditState& psi0,
                              std::shared_ptr<const SparseHamiltonian> h0, const PropagatorFactory& factory,
                              const LrBudget& budget) {
  const std::array<double, 1> times{t2};
  const auto points = lr_trace(config, t1, times, psi0, std::move(h0), factory);
  return lr_estimate(config, points.front(), budget);
}

}  // namespace quditcorr
