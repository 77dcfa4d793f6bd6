#pragma once

// Hadamard-test measurement of two-time (anti-)commutators.
//
// Each observable X is split as X = (|X|/2)(W_X + W_X^dagger). One circuit
// realization fixes (V_A, V_B) in {W, W^dagger}^2 and an ancilla phase
// alpha in {0, pi/2}; the ancilla-|0> probability P of that circuit gives the
// unitary correlator 4P - 2, and
//   C^{+/-}_AB = (|A||B|/4) * sum over the four (V_A, V_B) of (4P - 2)
// with alpha = 0 for C^+ and alpha = pi/2 for C^-.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "quditcorr/dynamics.hpp"
#include "quditcorr/observables.hpp"
#include "quditcorr/rng.hpp"
#include "quditcorr/tensor_core.hpp"

namespace quditcorr {

enum class UnitaryChoice { w, w_dagger };

/// Ancilla preparation (|0> + e^{i alpha}|1>)/sqrt(2).
enum class AncillaPhase {
  real,       ///< alpha = 0, anti-commutator C^+
  imaginary,  ///< alpha = pi/2, commutator C^-
};

double phase_angle(AncillaPhase phase);

struct HadamardTask {
  double t1 = 0.0;
  double t2 = 0.0;
  UnitaryChoice va = UnitaryChoice::w;
  UnitaryChoice vb = UnitaryChoice::w;
  AncillaPhase alpha = AncillaPhase::real;
  /// Supports index system sites; the ancilla is prepended internally.
  HermitianObservable observable_a;
  HermitianObservable observable_b;

  void validate() const;
};

enum class EstimateMode { exact, sampled };

struct CorrelatorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t shots = 0;
  EstimateMode mode = EstimateMode::exact;
};

/// Probability of ancilla |0> after the full circuit:
/// prep(alpha), X, U(t1), C-V_A, X, U(t2 - t1), C-V_B, H, measure.
/// When t2 < t1 the controlled gates run in time order instead:
/// prep(alpha), U(t2), C-V_B, X, U(t1 - t2), C-V_A, X, H, measure.
/// `psi0` is the system-only initial state.
double run_hadamard_circuit(const HadamardTask& task, const QuditState& psi0, const Propagator& prop);

/// 4p - 2.
double probability_to_correlator(double p);

/// Index of a (V_A, V_B) combination in the four-part arrays: 2 * va + vb.
constexpr std::size_t part_index(UnitaryChoice va, UnitaryChoice vb) {
  return 2 * static_cast<std::size_t>(va) + static_cast<std::size_t>(vb);
}

struct CircuitPart {
  UnitaryChoice va;
  UnitaryChoice vb;
  CorrelatorEstimate estimate;
};

/// (norm_a norm_b / 4) * sum of the four unitary correlators; errors add in quadrature.
CorrelatorEstimate assemble_correlator(std::span<const CircuitPart> parts, double norm_a, double norm_b);

/// Binomial(shots, p) / shots.
double sample_probability(double p_exact, std::uint64_t shots, Rng& rng);
double sample_probability(double p_exact, std::uint64_t shots, StreamKey key);

/// 4 |A|^2 |B|^2 sum_k P_k (1 - P_k).
///
/// This is the variance of the assembled correlator per shot of a total
/// budget spread evenly over the four circuits: with n shots on each
/// circuit the estimator variance is variance_model / (4 n).
double variance_model(const std::array<double, 4>& p_values, double norm_a, double norm_b);

struct Budget {
  EstimateMode mode = EstimateMode::exact;
  /// Shots on each of the four circuits. In exact mode a nonzero value only
  /// sizes the reported standard error.
  std::uint64_t shots_per_circuit = 0;
  StreamKey key{};

  static Budget exact(std::uint64_t nominal_shots_per_circuit = 0) {
    return {EstimateMode::exact, nominal_shots_per_circuit, {}};
  }
  static Budget sampled(std::uint64_t shots_per_circuit, StreamKey key) {
    return {EstimateMode::sampled, shots_per_circuit, key};
  }
  void validate() const;
};

/// Turns the four exact probabilities of one phase into an estimate.
CorrelatorEstimate estimate_from_probabilities(const std::array<double, 4>& p_exact, double norm_a,
                                               double norm_b, const Budget& budget);

struct CorrelatorPair {
  CorrelatorEstimate plus;
  CorrelatorEstimate minus;

  /// <A(t1) B(t2)> = C^+/2 - i C^-/2.
  Complex correlator() const { return {plus.value / 2.0, -minus.value / 2.0}; }
};

/// Runs all eight circuits and assembles both C^+ and C^-.
CorrelatorPair measure_dynamical_correlator(const HermitianObservable& a, const HermitianObservable& b,
                                            double t1, double t2, const QuditState& psi0,
                                            const Propagator& prop, const Budget& budget);

/// Exact probabilities of the four circuits of one phase at every t2 in
/// `times` (nondecreasing, all >= t1). The register is propagated from one
/// grid point to the next, which executes the same gate sequence as
/// `run_hadamard_circuit` at each point.
std::vector<std::array<double, 4>> hadamard_trace(const HermitianObservable& a, const HermitianObservable& b,
                                                  double t1, std::span<const double> times,
                                                  const QuditState& psi0, const Propagator& prop,
                                                  AncillaPhase phase);

}  // namespace quditcorr
