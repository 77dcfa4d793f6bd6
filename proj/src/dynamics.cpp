#include "quditcorr/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "quditcorr/error.hpp"
#include "quditcorr/observables.hpp"

namespace quditcorr {

namespace {

bool sparse_is_hermitian(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  SparseMatrix adj = m.adjoint();
  SparseMatrix diff = m - adj;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst <= kNormTolerance;
}

}  // namespace

SparseHamiltonian::SparseHamiltonian(SparseMatrix matrix, std::vector<int> site_dims, Couplings couplings)
    : matrix_(std::move(matrix)), site_dims_(std::move(site_dims)), couplings_(couplings) {
  const RegisterShape shape(site_dims_);
  if (matrix_.rows() != matrix_.cols() || static_cast<std::size_t>(matrix_.rows()) != shape.size()) {
    throw DimensionError("Hamiltonian dimension does not match its register");
  }
  matrix_.makeCompressed();
  hermitian_ = sparse_is_hermitian(matrix_);
}

SparseHamiltonian build_xxz(int n_sites, double j_xy, double j_z) {
  if (n_sites < 2) throw ValidationError("XXZ chain needs at least two sites");
  const std::vector<int> dims(static_cast<std::size_t>(n_sites), 3);
  std::size_t dim = 1;
  for (int i = 0; i < n_sites; ++i) {
    if (dim > kMaxHamiltonianNonzeros / 3) {
      throw ValidationError(fmt::format("{} spin-1 sites exceed the memory budget", n_sites));
    }
    dim *= 3;
  }
  // Worst case per row: one diagonal entry plus two flip-flop moves per bond.
  if (dim * static_cast<std::size_t>(2 * n_sites - 1) > kMaxHamiltonianNonzeros) {
    throw ValidationError(fmt::format("{} spin-1 sites exceed the memory budget", n_sites));
  }
  const RegisterShape shape(dims);

  const Matrix sx = spin_matrix(1.0, SpinAxis::x).matrix();
  const Matrix sy = spin_matrix(1.0, SpinAxis::y).matrix();
  const Matrix sz = spin_matrix(1.0, SpinAxis::z).matrix();
  const Matrix bond = j_xy * (kron({sx, sx}) + kron({sy, sy})) + j_z * kron({sz, sz});

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(dim * static_cast<std::size_t>(2 * n_sites - 1));
  std::vector<int> digits(static_cast<std::size_t>(n_sites), 0);
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t rem = col;
    for (int s = n_sites - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    for (int i = 0; i + 1 < n_sites; ++i) {
      const int local_col = digits[i] * 3 + digits[i + 1];
      for (int local_row = 0; local_row < 9; ++local_row) {
        const Complex h = bond(local_row, local_col);
        if (std::abs(h) < 1e-15) continue;
        const auto a = static_cast<long long>(local_row / 3 - digits[i]);
        const auto b = static_cast<long long>(local_row % 3 - digits[i + 1]);
        const auto row = static_cast<long long>(col) + a * static_cast<long long>(shape.stride(i)) +
                         b * static_cast<long long>(shape.stride(i + 1));
        triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), h);
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(Complex(0.0), 1e-15);
  return SparseHamiltonian(std::move(m), dims, Couplings{j_xy, j_z});
}

SparseHamiltonian build_perturbed(const SparseHamiltonian& h0, int site, double lambda,
                                  PerturbationKind kind) {
  if (!(lambda > 0.0)) throw ValidationError("perturbation strength must be positive");
  const RegisterShape shape(h0.site_dims());
  const int d = shape.dim(site);
  const Matrix sz = spin_matrix((d - 1) / 2.0, SpinAxis::z).matrix();
  const Complex scale = kind == PerturbationKind::hermitian
                            ? Complex(-lambda * h0.couplings().j_xy, 0.0)
                            : Complex(0.0, -lambda * h0.couplings().j_xy);
  const std::size_t stride = shape.stride(site);
  SparseMatrix diag(h0.matrix().rows(), h0.matrix().cols());
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const auto level = static_cast<Eigen::Index>((i / stride) % static_cast<std::size_t>(d));
    const Complex v = scale * sz(level, level);
    if (v != Complex(0.0)) triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), v);
  }
  diag.setFromTriplets(triplets.begin(), triplets.end());
  SparseMatrix m = h0.matrix() + diag;
  return SparseHamiltonian(std::move(m), h0.site_dims(), h0.couplings());
}

// ---------------------------------------------------------------------------

Propagator::Propagator(std::shared_ptr<const SparseHamiltonian> h, PropagatorStrategy strategy,
                       PropagatorOptions options)
    : h_(std::move(h)), strategy_(strategy), options_(options) {
  if (!h_) throw ValidationError("propagator needs a Hamiltonian");
  if (options_.max_krylov_dim < 2) throw ValidationError("Krylov dimension must be at least 2");
  if (strategy_ == PropagatorStrategy::dense_eig) {
    if (h_->dimension() > kMaxDenseDimension) {
      throw ValidationError(fmt::format("dense propagation limited to dimension {}", kMaxDenseDimension));
    }
    dense_ = h_->dense();
    if (h_->hermitian()) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(dense_);
      if (eig.info() != Eigen::Success) throw ConvergenceError("Hamiltonian diagonalization failed", std::nan(""));
      energies_ = eig.eigenvalues();
      eigenvectors_ = eig.eigenvectors();
    }
  }
}

Propagator Propagator::automatic(std::shared_ptr<const SparseHamiltonian> h, PropagatorOptions options) {
  const auto strategy = h->dimension() <= options.auto_dense_limit ? PropagatorStrategy::dense_eig
                                                                   : PropagatorStrategy::krylov;
  return Propagator(std::move(h), strategy, options);
}

Vector Propagator::apply(const Vector& v, double duration) const {
  if (duration < 0.0) throw ValidationError("evolution duration must be nonnegative");
  if (static_cast<std::size_t>(v.size()) != h_->dimension()) {
    throw DimensionError("vector does not match the Hamiltonian dimension");
  }
  if (duration == 0.0) return v;
  return strategy_ == PropagatorStrategy::dense_eig ? apply_dense(v, duration) : apply_krylov(v, duration);
}

Vector Propagator::apply_dense(const Vector& v, double duration) const {
  if (h_->hermitian()) {
    Vector coeffs = eigenvectors_.adjoint() * v;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::exp(Complex(0.0, -energies_[k] * duration));
    return eigenvectors_ * coeffs;
  }
  const Matrix generator = Complex(0.0, -duration) * dense_;
  const Matrix u = generator.exp();
  return u * v;
}

// Krylov propagation with adaptive sub-stepping.
//
// Each substep builds a Krylov space from the current vector (Lanczos when H
// is Hermitian, Arnoldi otherwise). Every few iterations the a-posteriori
// error  beta * h_{m+1,m} * |[exp(-i tau H_m)]_{m,1}|  is checked against
// tolerance * tau / duration, and the build stops as soon as it passes. At
// the maximum dimension the step is halved until it passes; the basis does
// not depend on tau, so that only repeats the small exponential.
Vector Propagator::apply_krylov(const Vector& v, double duration) const {
  const SparseMatrix& h = h_->matrix();
  const Eigen::Index n = v.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options_.max_krylov_dim, n));
  const bool lanczos = h_->hermitian();
  constexpr int kCheckEvery = 4;

  Vector w = v;
  double done = 0.0;
  double tau = duration;
  Matrix basis(n, m_max + 1);
  Matrix hess = Matrix::Zero(m_max + 1, m_max);

  // First column of exp(-i tau H_m).
  auto small_exp = [&](int m, double t) -> Vector {
    const Matrix hm = hess.topLeftCorner(m, m);
    if (lanczos) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(hm);
      Vector c = eig.eigenvectors().adjoint().col(0);
      for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(Complex(0.0, -eig.eigenvalues()[k] * t));
      return eig.eigenvectors() * c;
    }
    return (Complex(0.0, -t) * hm).exp().col(0);
  };

  while (done < duration) {
    const double beta = w.norm();
    if (beta == 0.0) return w;
    basis.col(0) = w / beta;
    hess.setZero();
    tau = std::min(tau, duration - done);
    int m = m_max;
    double h_next = 0.0;
    Vector f;
    double err = 0.0;
    bool accepted = false;
    for (int j = 0; j < m_max; ++j) {
      Vector next = h * basis.col(j);
      if (lanczos) {
        // Three-term recurrence plus one full reorthogonalization pass.
        if (j > 0) next -= hess(j - 1, j) * basis.col(j - 1);
        const Complex alpha = basis.col(j).dot(next);
        hess(j, j) = Complex(alpha.real(), 0.0);
        next -= hess(j, j) * basis.col(j);
        for (int i = 0; i <= j; ++i) next -= basis.col(i).dot(next) * basis.col(i);
      } else {
        for (int i = 0; i <= j; ++i) {
          hess(i, j) = basis.col(i).dot(next);
          next -= hess(i, j) * basis.col(i);
        }
      }
      const double norm = next.norm();
      hess(j + 1, j) = norm;
      if (lanczos && j + 1 < m_max) hess(j, j + 1) = norm;
      if (norm <= 1e-13 * std::max(1.0, hess.block(0, 0, j + 1, j + 1).cwiseAbs().maxCoeff())) {
        // Invariant subspace: the projection is exact for any step.
        m = j + 1;
        h_next = 0.0;
        tau = duration - done;
        f = small_exp(m, tau);
        err = 0.0;
        accepted = true;
        break;
      }
      basis.col(j + 1) = next / norm;
      if ((j + 1) % kCheckEvery == 0 && j + 1 < m_max) {
        const Vector trial = small_exp(j + 1, tau);
        const double trial_err = beta * norm * std::abs(trial[j]);
        if (trial_err <= options_.tolerance * tau / duration) {
          m = j + 1;
          h_next = norm;
          f = trial;
          err = trial_err;
          accepted = true;
          break;
        }
      }
    }

    if (!accepted) {
      h_next = std::abs(hess(m, m - 1));
      for (;;) {
        f = small_exp(m, tau);
        err = beta * h_next * std::abs(f[m - 1]);
        if (err <= options_.tolerance * tau / duration) break;
        tau *= 0.5;
        if (tau < duration * 1e-12) {
          throw ConvergenceError(
              fmt::format("Krylov propagation did not converge (residual {:.3e}, dimension {})", err, m), err);
        }
      }
    }
    w = beta * (basis.leftCols(m) * f);
    done += tau;
    if (err < 0.1 * options_.tolerance * tau / duration) tau *= 2.0;
  }
  return w;
}

void Propagator::evolve_inplace(QuditState& state, double duration) const {
  if (duration < 0.0) throw ValidationError("evolution duration must be nonnegative");
  const auto& sys = h_->site_dims();
  const auto dims = state.shape().dims();
  if (dims.size() < sys.size() || !std::equal(sys.begin(), sys.end(), dims.end() - static_cast<long>(sys.size()))) {
    throw DimensionError("state's trailing sites do not match the Hamiltonian's register");
  }
  if (duration == 0.0) return;
  const auto block = static_cast<Eigen::Index>(h_->dimension());
  state.update(
      [&](Vector& amps) {
        for (Eigen::Index start = 0; start < amps.size(); start += block) {
          auto seg = amps.segment(start, block);
          if (seg.squaredNorm() == 0.0) continue;
          seg = apply(Vector(seg), duration);
        }
      },
      false);
}

QuditState Propagator::evolve(const QuditState& state, double duration) const {
  QuditState out = state;
  evolve_inplace(out, duration);
  return out;
}

PropagatorFactory default_propagator_factory(PropagatorOptions options) {
  return [options](std::shared_ptr<const SparseHamiltonian> h) { return Propagator::automatic(std::move(h), options); };
}

}  // namespace quditcorr
