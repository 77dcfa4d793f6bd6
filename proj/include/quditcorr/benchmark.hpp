#pragma once

// Quench benchmark: Neel-superposition initial state, XXZ evolution, and the
// figures of merit used to compare the Hadamard-test and linear-response
// protocols (relative error R and time-averaged standard deviation dC).

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quditcorr/dynamics.hpp"
#include "quditcorr/hadamard.hpp"
#include "quditcorr/linear_response.hpp"

namespace quditcorr {

struct QuenchScenario {
  int n_sites = 4;
  double jz_over_jxy = 0.5;
  /// 1-based chain sites of C_ij(0, t); A = Sz_i at time 0, B = Sz_j at time t.
  int site_i = 1;
  int site_j = 2;
  /// Strictly increasing, starting at 0, in units of 1/J_xy.
  std::vector<double> times{0.0};
  std::uint64_t seed = 0;

  void validate() const;

  /// steps + 1 equally spaced points on [0, t_max].
  static std::vector<double> uniform_grid(double t_max, int steps);
};

/// (|+1,-1,+1,...> + |-1,+1,-1,...>)/sqrt(2) in the Sz product basis.
QuditState neel_superposition(int n_sites);

/// raw - 2 <A><B>, with first-order error propagation.
CorrelatorEstimate connected_anticommutator(const CorrelatorEstimate& raw, const CorrelatorEstimate& exp_a,
                                            const CorrelatorEstimate& exp_b);

/// int |est - ref|^2 dt / int |ref|^2 dt, trapezoidal on `times`.
double relative_error(std::span<const double> estimate, std::span<const double> reference,
                      std::span<const double> times);

/// (1 / T) int std(t) dt over the grid span T, trapezoidal.
double time_averaged_std(std::span<const double> std_trace, std::span<const double> times);

/// Correlators evaluated directly from Schroedinger-picture states, with no
/// ancilla and no unitary decomposition:
///   <A(t1) B(t2)> = < U(t2-t1) A U(t1) psi | B U(t2) psi >.
struct ReferenceTrace {
  std::vector<double> times;
  std::vector<double> c_plus;
  std::vector<double> c_minus;
  double exp_a = 0.0;  ///< <A(t1)>
  double var_a = 0.0;
  std::vector<double> exp_b;  ///< <B(t2)>
  std::vector<double> var_b;

  std::vector<double> connected_plus() const;
};

ReferenceTrace reference_trace(const HermitianObservable& a, const HermitianObservable& b, double t1,
                               std::span<const double> times, const QuditState& psi0, const Propagator& prop);

enum class Protocol { hadamard, lr_hermitian, lr_non_hermitian };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

/// Shots per expectation value. Hadamard: 4 circuits (+2 disconnected
/// expectations for C^+) per point; linear response: 2 branches per point.
struct ShotBudgets {
  std::uint64_t hadamard_plus = 250;
  std::uint64_t hadamard_minus = 2000;
  std::uint64_t lr_plus = 750;
  std::uint64_t lr_minus = 6000;

  bool operator==(const ShotBudgets&) const = default;
};

struct StudyOptions {
  std::vector<Protocol> protocols{Protocol::hadamard, Protocol::lr_hermitian, Protocol::lr_non_hermitian};
  ShotBudgets budgets;
  std::vector<double> lambdas{0.2};
  double pulse_area = 1e-3;
  bool sampled = true;
  int workers = 1;
  PropagatorOptions propagator;
  const std::atomic<bool>* cancel = nullptr;
};

struct ResultRecord {
  Protocol protocol;
  char kind;  ///< '+' or '-'
  double t;
  std::optional<double> lambda;
  double exact;
  std::optional<double> sampled;
  /// Empirical when sampled, otherwise computed from the exact distributions.
  double std_error;
  std::uint64_t shots;
  std::uint64_t seed;
};

/// Relative errors (against the reference trace) and time-averaged standard
/// deviations. A linear-response protocol measures only one kind, so the
/// other kind's fields stay empty.
struct FigureOfMerit {
  std::optional<double> r_plus;
  std::optional<double> r_minus;
  std::optional<double> dc_plus;
  std::optional<double> dc_minus;
};

struct ProtocolSummary {
  Protocol protocol;
  std::optional<double> lambda;
  /// Exact traces; dC from standard errors computed from the exact distributions.
  FigureOfMerit exact;
  /// Sampled traces with empirical standard errors, when the study samples.
  std::optional<FigureOfMerit> sampled;
};

struct StudyResult {
  std::vector<ResultRecord> records;
  std::vector<ProtocolSummary> summaries;
  bool incomplete = false;
};

StudyResult run_quench_study(const QuenchScenario& scenario, const StudyOptions& options);

}  // namespace quditcorr
