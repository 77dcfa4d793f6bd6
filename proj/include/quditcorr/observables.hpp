#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "quditcorr/tensor_core.hpp"

namespace quditcorr {

enum class SpinAxis { x, y, z };

/// Spin-s matrix in the S^z eigenbasis, ordered m = s, s-1, ..., -s.
/// Supported spins: 1/2, 1, 3/2, 2.
LocalOperator spin_matrix(double spin, SpinAxis axis, int site = 0);

/// Largest eigenvalue magnitude of a Hermitian operator.
double spectral_norm(const LocalOperator& op);

/// Hermitian operator with its cached spectral norm. Zero operators are rejected.
class HermitianObservable {
 public:
  explicit HermitianObservable(LocalOperator op);

  const LocalOperator& op() const { return op_; }
  double spectral_norm() const { return norm_; }

 private:
  LocalOperator op_;
  double norm_;
};

/// X = (norm / 2) (W + W^dagger) with W unitary.
struct UnitaryDecomposition {
  double norm;
  LocalOperator w;
  LocalOperator w_dagger;
};

/// W = X/|X| + i sqrt(1 - X^2/|X|^2), evaluated eigenvalue by eigenvalue.
///
/// Each normalized eigenvalue x in [-1, 1] maps to x + i sqrt(1 - x^2) =
/// exp(i arccos x), the principal root, so W has eigenphases in [0, pi].
UnitaryDecomposition decompose(const HermitianObservable& obs);

/// Product of single-site observables on distinct sites.
class OperatorString {
 public:
  struct Factor {
    int site;
    HermitianObservable obs;
  };

  explicit OperatorString(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  /// Dense matrix of the string on its sites, first factor slowest.
  LocalOperator dense() const;

 private:
  std::vector<Factor> factors_;
};

/// Expansion of an operator string into tensor products of single-site unitaries.
///
/// With norm = prod_k |S_k| the string satisfies
///   X = (norm / 2) * sum_terms coefficient * (V_1 x ... x V_n),
/// where each V_k is W_k or W_k^dagger and coefficient = 2^(1-n). All 2^n
/// choices are listed; a term and the term with every choice flipped are
/// adjoints of each other (see `paired_terms`).
struct StringDecomposition {
  struct Term {
    double coefficient;
    /// Bit k set means factor k uses W_k^dagger.
    std::size_t choice;
    std::vector<LocalOperator> factors;
  };

  double norm;
  std::vector<Term> terms;

  /// Representatives of the adjoint pairs: the 2^(n-1) terms whose first factor is W.
  std::vector<const Term*> paired_terms() const;

  /// Dense sum_terms coefficient * (V_1 x ... x V_n).
  Matrix dense_sum() const;
};

StringDecomposition decompose_string(const OperatorString& s);

/// Outcome statistics of a projective measurement of an observable.
struct OutcomeDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;

  double mean() const;
  double variance() const;
};

/// Distribution of eigenvalue outcomes of `obs` on `state`, relative to its squared norm.
OutcomeDistribution measurement_distribution(const QuditState& state, const HermitianObservable& obs);

/// Mean and variance of `shots` draws from `dist`, as a new empirical distribution.
OutcomeDistribution sample_distribution(const OutcomeDistribution& dist, std::uint64_t shots, Rng& rng);

/// Kronecker product of operators in the given order, first factor slowest.
Matrix kron(const std::vector<Matrix>& factors);

}  // namespace quditcorr
