#pragma once

// Spin-1 XXZ Hamiltonians and exact-in-time propagation.
//
// Units: hbar = 1, times are measured in 1/J_xy.

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "quditcorr/tensor_core.hpp"

namespace quditcorr {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct Couplings {
  double j_xy = 1.0;
  double j_z = 0.5;
};

class SparseHamiltonian {
 public:
  SparseHamiltonian(SparseMatrix matrix, std::vector<int> site_dims, Couplings couplings);

  const SparseMatrix& matrix() const { return matrix_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const std::vector<int>& site_dims() const { return site_dims_; }
  int num_sites() const { return static_cast<int>(site_dims_.size()); }
  const Couplings& couplings() const { return couplings_; }
  bool hermitian() const { return hermitian_; }

  Matrix dense() const { return Matrix(matrix_); }

 private:
  SparseMatrix matrix_;
  std::vector<int> site_dims_;
  Couplings couplings_;
  bool hermitian_;
};

/// Budget on stored nonzeros for `build_xxz`.
inline constexpr std::size_t kMaxHamiltonianNonzeros = std::size_t{1} << 27;

/// Open-boundary nearest-neighbour spin-1 XXZ chain
///   H = sum_i J_xy (Sx_i Sx_{i+1} + Sy_i Sy_{i+1}) + J_z Sz_i Sz_{i+1}.
SparseHamiltonian build_xxz(int n_sites, double j_xy, double j_z);

enum class PerturbationKind { hermitian, non_hermitian };

/// H0 - lambda J_xy Sz_site (hermitian) or H0 - i lambda J_xy Sz_site (non_hermitian).
SparseHamiltonian build_perturbed(const SparseHamiltonian& h0, int site, double lambda,
                                  PerturbationKind kind);

enum class PropagatorStrategy { dense_eig, krylov };

struct PropagatorOptions {
  /// Dense diagonalization below this dimension when the strategy is chosen automatically.
  std::size_t auto_dense_limit = 256;
  double tolerance = 1e-9;
  int max_krylov_dim = 30;
};

/// exp(-i H t) acting on states whose trailing sites match the Hamiltonian.
///
/// Leading register sites (the ancilla) are spectators: each of their basis
/// blocks is propagated independently, so a joint ancilla-system state never
/// needs an enlarged Hamiltonian. Immutable after construction.
class Propagator {
 public:
  static constexpr std::size_t kMaxDenseDimension = 4096;

  Propagator(std::shared_ptr<const SparseHamiltonian> h, PropagatorStrategy strategy,
             PropagatorOptions options = {});

  /// Dense below `options.auto_dense_limit`, Krylov above.
  static Propagator automatic(std::shared_ptr<const SparseHamiltonian> h, PropagatorOptions options = {});

  PropagatorStrategy strategy() const { return strategy_; }
  const SparseHamiltonian& hamiltonian() const { return *h_; }
  const PropagatorOptions& options() const { return options_; }

  QuditState evolve(const QuditState& state, double duration) const;
  void evolve_inplace(QuditState& state, double duration) const;

  /// exp(-i H t) v for a vector of the Hamiltonian's dimension.
  Vector apply(const Vector& v, double duration) const;

 private:
  Vector apply_dense(const Vector& v, double duration) const;
  Vector apply_krylov(const Vector& v, double duration) const;

  std::shared_ptr<const SparseHamiltonian> h_;
  PropagatorStrategy strategy_;
  PropagatorOptions options_;
  // Hermitian dense strategy: H = V diag(E) V^dagger.
  Eigen::VectorXd energies_;
  Matrix eigenvectors_;
  Matrix dense_;
};

/// Propagator for a Hamiltonian, with the given options and automatic strategy.
using PropagatorFactory = std::function<Propagator(std::shared_ptr<const SparseHamiltonian>)>;

PropagatorFactory default_propagator_factory(PropagatorOptions options = {});

}  // namespace quditcorr
