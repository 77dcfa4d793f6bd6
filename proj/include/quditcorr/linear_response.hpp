#pragma once

// Linear-response baseline: a short rectangular pulse of -lambda J_xy Sz_j
// (or -i lambda J_xy Sz_j) at t1 and a readout of Sz_i at t2.
//
// The pulse is counted inside [t1, t2]: the perturbed branch evolves H0 for
// t1, H_lambda for dt, and H0 for t2 - t1 - dt; the reference branch evolves
// H0 for t2. To first order in the pulse area eps = lambda J_xy dt,
//   hermitian:      <Sz_i>_lambda - <Sz_i> = -eps C^-(Sz_j at t1, Sz_i at t2)
//   non_hermitian:  <Sz_i>_+ / <1>_+ - <Sz_i> = -eps C^+_connected(...)
// so the estimate returned is -(difference)/eps, which targets the
// correlator of the probe at t1 and the readout at t2.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "quditcorr/dynamics.hpp"
#include "quditcorr/hadamard.hpp"
#include "quditcorr/observables.hpp"
#include "quditcorr/tensor_core.hpp"

namespace quditcorr {

struct LinearResponseConfig {
  double lambda = 0.2;
  /// J_xy * dt.
  double pulse_area = 1e-3;
  int probe_site = 0;
  int readout_site = 1;
  PerturbationKind kind = PerturbationKind::hermitian;

  void validate() const;
  double pulse_duration(double j_xy) const { return pulse_area / j_xy; }
};

/// Squared norm below which the non-Hermitian branch is considered collapsed.
inline constexpr double kNormCollapse = 1e-6;

struct LrBudget {
  EstimateMode mode = EstimateMode::exact;
  /// Shots per time point, split evenly between the two branches.
  std::uint64_t shots_per_point = 0;
  StreamKey key{};

  static LrBudget exact(std::uint64_t nominal_shots_per_point = 0) {
    return {EstimateMode::exact, nominal_shots_per_point, {}};
  }
  static LrBudget sampled(std::uint64_t shots_per_point, StreamKey key) {
    return {EstimateMode::sampled, shots_per_point, key};
  }
};

/// Readout distributions of both branches at one t2.
struct LrPoint {
  double t2 = 0.0;
  std::vector<double> perturbed_probabilities;
  std::vector<double> reference_probabilities;
  double perturbed_squared_norm = 1.0;
};

/// <psi|O|psi> / <psi|psi>.
double normalized_expectation(const QuditState& state, const HermitianObservable& obs);

/// round(nominal * squared_norm), at least 1.
std::uint64_t effective_shots(std::uint64_t nominal, double squared_norm);

/// Propagates both branches to every t2 in `times` (nondecreasing, each >= t1 + dt).
std::vector<LrPoint> lr_trace(const LinearResponseConfig& config, double t1, std::span<const double> times,
                              const QuditState& psi0, std::shared_ptr<const SparseHamiltonian> h0,
                              const PropagatorFactory& factory);

/// Estimate of the correlator from one point's distributions.
CorrelatorEstimate lr_estimate(const LinearResponseConfig& config, const LrPoint& point, const LrBudget& budget);

CorrelatorEstimate measure_lr(const LinearResponseConfig& config, double t1, double t2, const QuditState& psi0,
                              std::shared_ptr<const SparseHamiltonian> h0, const PropagatorFactory& factory,
                              const LrBudget& budget);

}  // namespace quditcorr
