#include "quditcorr/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "quditcorr/error.hpp"

namespace quditcorr {

// Sign and dagger bookkeeping, checked against the dense Heisenberg-picture
// oracle in tests/test_hadamard.cpp:
//
//   circuit (V_A, V_B, alpha)      4P - 2
//   -------------------------      ----------------------------------------------
//   any                            2 Re[ e^{-i alpha} <V_B^dag(t2) V_A(t1)> ]
//
// Summed over all four (V_A, V_B) the daggers drop out, because {W, W^dag}
// is closed under adjoint:
//   sum = 2 Re[ e^{-i alpha} (4 / |A||B|) <A(t1) B(t2)>^* ]
//   alpha = 0     ->  (|A||B|/4) sum = 2 Re<A(t1)B(t2)>  = C^+
//   alpha = pi/2  ->  (|A||B|/4) sum = -2 Im<A(t1)B(t2)> = C^-
// so both components use the same positive prefactor.

namespace {

constexpr int kAncilla = 0;

const LocalOperator& pauli_x() {
  static const LocalOperator x = [] {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return LocalOperator(m, {kAncilla});
  }();
  return x;
}

const LocalOperator& hadamard_gate() {
  static const LocalOperator h = [] {
    Matrix m(2, 2);
    m << 1.0, 1.0, 1.0, -1.0;
    return LocalOperator(m / std::numbers::sqrt2, {kAncilla});
  }();
  return h;
}

QuditState prepared_ancilla(AncillaPhase phase) {
  Vector a(2);
  a << 1.0, std::polar(1.0, phase_angle(phase));
  return QuditState(RegisterShape({2}), a / std::numbers::sqrt2);
}

const LocalOperator& choose(const UnitaryDecomposition& d, UnitaryChoice c) {
  return c == UnitaryChoice::w ? d.w : d.w_dagger;
}

void check_supports(const HermitianObservable& obs, const QuditState& psi0) {
  for (int s : obs.op().support()) {
    if (s >= psi0.shape().num_sites()) {
      throw DimensionError(fmt::format("observable site {} outside the {}-site system", s,
                                       psi0.shape().num_sites()));
    }
  }
  if (psi0.shape().subspace_dim(obs.op().support()) != static_cast<std::size_t>(obs.op().dim())) {
    throw DimensionError("observable dimension does not match its system sites");
  }
}

// Everything up to and including the second ancilla flip, at time t1.
QuditState prepare_first_half(const UnitaryDecomposition& da, UnitaryChoice va, double t1,
                              const QuditState& psi0, const Propagator& prop, AncillaPhase phase) {
  QuditState joint = prepared_ancilla(phase).tensor(psi0);
  apply_local_inplace(joint, pauli_x());
  prop.evolve_inplace(joint, t1);
  apply_controlled_inplace(joint, kAncilla, 1, choose(da, va).shifted(1));
  apply_local_inplace(joint, pauli_x());
  return joint;
}

double finish(QuditState joint, const UnitaryDecomposition& db, UnitaryChoice vb) {
  apply_controlled_inplace(joint, kAncilla, 1, choose(db, vb).shifted(1));
  apply_local_inplace(joint, hadamard_gate());
  return std::clamp(ancilla_zero_probability(joint), 0.0, 1.0);
}

}  // namespace

double phase_angle(AncillaPhase phase) {
  return phase == AncillaPhase::real ? 0.0 : std::numbers::pi / 2.0;
}

void HadamardTask::validate() const {
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) {
    throw ValidationError(fmt::format("Hadamard task needs nonnegative times (got t1={}, t2={})", t1, t2));
  }
}

double run_hadamard_circuit(const HadamardTask& task, const QuditState& psi0, const Propagator& prop) {
  task.validate();
  check_supports(task.observable_a, psi0);
  check_supports(task.observable_b, psi0);
  const UnitaryDecomposition da = decompose(task.observable_a);
  const UnitaryDecomposition db = decompose(task.observable_b);
  if (task.t2 >= task.t1) {
    QuditState joint = prepare_first_half(da, task.va, task.t1, psi0, prop, task.alpha);
    prop.evolve_inplace(joint, task.t2 - task.t1);
    return finish(std::move(joint), db, task.vb);
  }
  // B comes first in time. Each controlled gate still acts on the same
  // ancilla branch as above, so the overlap is the same <V_A^dag(t1) V_B(t2)>.
  QuditState joint = prepared_ancilla(task.alpha).tensor(psi0);
  prop.evolve_inplace(joint, task.t2);
  apply_controlled_inplace(joint, kAncilla, 1, choose(db, task.vb).shifted(1));
  apply_local_inplace(joint, pauli_x());
  prop.evolve_inplace(joint, task.t1 - task.t2);
  apply_controlled_inplace(joint, kAncilla, 1, choose(da, task.va).shifted(1));
  apply_local_inplace(joint, pauli_x());
  apply_local_inplace(joint, hadamard_gate());
  return std::clamp(ancilla_zero_probability(joint), 0.0, 1.0);
}

double probability_to_correlator(double p) {
  constexpr double slack = 1e-12;
  if (!(p >= -slack && p <= 1.0 + slack)) {
    throw ValidationError(fmt::format("probability {} outside [0, 1]", p));
  }
  return 4.0 * std::clamp(p, 0.0, 1.0) - 2.0;
}

CorrelatorEstimate assemble_correlator(std::span<const CircuitPart> parts, double norm_a, double norm_b) {
  std::array<const CircuitPart*, 4> slot{};
  for (const CircuitPart& part : parts) {
    const std::size_t i = part_index(part.va, part.vb);
    if (slot[i] != nullptr) throw ValidationError("duplicate (V_A, V_B) combination");
    slot[i] = &part;
  }
  if (std::any_of(slot.begin(), slot.end(), [](const CircuitPart* p) { return p == nullptr; })) {
    throw ValidationError("assembly needs one part for each (V_A, V_B) in {W, W^dagger}^2");
  }
  const double prefactor = norm_a * norm_b / 4.0;
  CorrelatorEstimate out;
  double var = 0.0;
  out.mode = EstimateMode::exact;
  for (const CircuitPart* part : slot) {
    out.value += part->estimate.value;
    var += part->estimate.std_error * part->estimate.std_error;
    out.shots += part->estimate.shots;
    if (part->estimate.mode == EstimateMode::sampled) out.mode = EstimateMode::sampled;
  }
  out.value *= prefactor;
  out.std_error = prefactor * std::sqrt(var);
  return out;
}

double sample_probability(double p_exact, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw ValidationError("sampling needs at least one shot");
  const double p = std::clamp(p_exact, 0.0, 1.0);
  std::binomial_distribution<std::uint64_t> draw(shots, p);
  return static_cast<double>(draw(rng)) / static_cast<double>(shots);
}

double sample_probability(double p_exact, std::uint64_t shots, StreamKey key) {
  Rng rng = make_rng(key);
  return sample_probability(p_exact, shots, rng);
}

double variance_model(const std::array<double, 4>& p_values, double norm_a, double norm_b) {
  double sum = 0.0;
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("probability {} outside [0, 1]", p));
    sum += p * (1.0 - p);
  }
  return 4.0 * norm_a * norm_a * norm_b * norm_b * sum;
}

void Budget::validate() const {
  if (mode == EstimateMode::sampled && shots_per_circuit == 0) {
    throw ValidationError("sampled budget needs at least one shot per circuit");
  }
}

CorrelatorEstimate estimate_from_probabilities(const std::array<double, 4>& p_exact, double norm_a,
                                               double norm_b, const Budget& budget) {
  budget.validate();
  std::array<CircuitPart, 4> parts{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = std::clamp(p_exact[k], 0.0, 1.0);
    CorrelatorEstimate e;
    e.shots = budget.shots_per_circuit;
    const auto n = static_cast<double>(budget.shots_per_circuit);
    if (budget.mode == EstimateMode::sampled) {
      const double p_hat = sample_probability(p, budget.shots_per_circuit, substream(budget.key, k));
      e.value = probability_to_correlator(p_hat);
      e.std_error = 4.0 * std::sqrt(p_hat * (1.0 - p_hat) / n);
      e.mode = EstimateMode::sampled;
    } else {
      e.value = probability_to_correlator(p);
      e.std_error = n > 0 ? 4.0 * std::sqrt(p * (1.0 - p) / n) : 0.0;
    }
    parts[k] = {static_cast<UnitaryChoice>(k / 2), static_cast<UnitaryChoice>(k % 2), e};
  }
  return assemble_correlator(parts, norm_a, norm_b);
}

CorrelatorPair measure_dynamical_correlator(const HermitianObservable& a, const HermitianObservable& b,
                                            double t1, double t2, const QuditState& psi0,
                                            const Propagator& prop, const Budget& budget) {
  budget.validate();
  CorrelatorPair out;
  for (AncillaPhase phase : {AncillaPhase::real, AncillaPhase::imaginary}) {
    std::array<double, 4> p{};
    for (std::size_t k = 0; k < 4; ++k) {
      const HadamardTask task{t1, t2, static_cast<UnitaryChoice>(k / 2), static_cast<UnitaryChoice>(k % 2),
                              phase, a, b};
      p[k] = run_hadamard_circuit(task, psi0, prop);
    }
    Budget b_phase = budget;
    b_phase.key = substream(budget.key, static_cast<std::uint64_t>(phase));
    const CorrelatorEstimate e = estimate_from_probabilities(p, a.spectral_norm(), b.spectral_norm(), b_phase);
    (phase == AncillaPhase::real ? out.plus : out.minus) = e;
  }
  return out;
}

std::vector<std::array<double, 4>> hadamard_trace(const HermitianObservable& a, const HermitianObservable& b,
                                                  double t1, std::span<const double> times,
                                                  const QuditState& psi0, const Propagator& prop,
                                                  AncillaPhase phase) {
  check_supports(a, psi0);
  check_supports(b, psi0);
  if (!(t1 >= 0.0)) throw ValidationError("t1 must be nonnegative");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t1 || (k > 0 && times[k] < times[k - 1])) {
      throw ValidationError("trace times must be nondecreasing and no earlier than t1");
    }
  }
  const UnitaryDecomposition da = decompose(a);
  const UnitaryDecomposition db = decompose(b);
  std::vector<std::array<double, 4>> out(times.size());
  for (UnitaryChoice va : {UnitaryChoice::w, UnitaryChoice::w_dagger}) {
    QuditState joint = prepare_first_half(da, va, t1, psi0, prop, phase);
    double now = t1;
    for (std::size_t k = 0; k < times.size(); ++k) {
      prop.evolve_inplace(joint, times[k] - now);
      now = times[k];
      for (UnitaryChoice vb : {UnitaryChoice::w, UnitaryChoice::w_dagger}) {
        out[k][part_index(va, vb)] = finish(joint, db, vb);
      }
    }
  }
  return out;
}

}  // namespace quditcorr
