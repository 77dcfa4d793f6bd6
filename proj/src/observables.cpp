#include "quditcorr/observables.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "quditcorr/error.hpp"

namespace quditcorr {

LocalOperator spin_matrix(double spin, SpinAxis axis, int site) {
  const double two_s = 2.0 * spin;
  const int n = static_cast<int>(std::lround(two_s));
  if (std::abs(two_s - n) > 1e-12 || n < 1 || n > 4) {
    throw ValidationError(fmt::format("unsupported spin {}", spin));
  }
  const int d = n + 1;
  Matrix raise = Matrix::Zero(d, d);
  for (int k = 1; k < d; ++k) {
    const double m = spin - k;
    raise(k - 1, k) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
  }
  Matrix out(d, d);
  switch (axis) {
    case SpinAxis::x:
      out = 0.5 * (raise + raise.adjoint());
      break;
    case SpinAxis::y:
      out = Complex(0.0, -0.5) * (raise - raise.adjoint());
      break;
    case SpinAxis::z:
      out = Matrix::Zero(d, d);
      for (int k = 0; k < d; ++k) out(k, k) = spin - k;
      break;
  }
  return LocalOperator(std::move(out), {site});
}

namespace {

constexpr double kEdgeSnap = 1e-13;

Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigensolver did not converge", std::nan(""));
  }
  return eig;
}

}  // namespace

double spectral_norm(const LocalOperator& op) {
  if (!op.hermitian()) throw ValidationError("spectral norm requires a Hermitian operator");
  const auto eig = hermitian_eig(op.matrix());
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

HermitianObservable::HermitianObservable(LocalOperator op)
    : op_(std::move(op)), norm_(quditcorr::spectral_norm(op_)) {
  if (norm_ <= 1e-14) throw ValidationError("zero observable has no unitary decomposition");
}

UnitaryDecomposition decompose(const HermitianObservable& obs) {
  const auto eig = hermitian_eig(obs.op().matrix());
  const double norm = obs.spectral_norm();
  Eigen::VectorXcd phases(eig.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    double x = std::clamp(eig.eigenvalues()[k] / norm, -1.0, 1.0);
    // Eigenvalues within rounding of +-|X| would otherwise pick up an
    // imaginary part of order sqrt(eps).
    if (1.0 - std::abs(x) < kEdgeSnap) x = std::copysign(1.0, x);
    phases[k] = Complex(x, std::sqrt((1.0 - x) * (1.0 + x)));
  }
  const Matrix& vecs = eig.eigenvectors();
  Matrix w = vecs * phases.asDiagonal() * vecs.adjoint();
  std::vector<int> support(obs.op().support().begin(), obs.op().support().end());
  LocalOperator w_op(w, support);
  if (!w_op.unitary()) {
    throw ConvergenceError("decomposition lost unitarity",
                           (w.adjoint() * w - Matrix::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff());
  }
  return UnitaryDecomposition{norm, w_op, w_op.adjoint()};
}

// ---------------------------------------------------------------------------

OperatorString::OperatorString(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw ValidationError("operator string must have at least one factor");
  std::vector<int> sites;
  for (const auto& f : factors_) {
    if (f.obs.op().support().size() != 1) {
      throw ValidationError("operator string factors must act on a single site");
    }
    sites.push_back(f.site);
  }
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw ValidationError("operator string has repeated sites");
  }
}

double OutcomeDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) m += probabilities[k] * values[k];
  return m;
}

double OutcomeDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) v += probabilities[k] * (values[k] - m) * (values[k] - m);
  return v;
}

OutcomeDistribution measurement_distribution(const QuditState& state, const HermitianObservable& obs) {
  if (!(state.squared_norm() > 0.0)) throw ValidationError("measurement of a vanishing state");
  const auto eig = hermitian_eig(obs.op().matrix());
  std::vector<int> support(obs.op().support().begin(), obs.op().support().end());
  OutcomeDistribution out;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const Vector v = eig.eigenvectors().col(k);
    const LocalOperator projector(v * v.adjoint(), support);
    out.values.push_back(eig.eigenvalues()[k]);
    out.probabilities.push_back(std::max(0.0, matrix_element(state, projector, state).real() / state.squared_norm()));
  }
  return out;
}

OutcomeDistribution sample_distribution(const OutcomeDistribution& dist, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw ValidationError("sampling needs at least one shot");
  const auto counts = sample_multinomial(dist.probabilities, shots, rng);
  OutcomeDistribution out{dist.values, {}};
  for (std::uint64_t c : counts) out.probabilities.push_back(static_cast<double>(c) / static_cast<double>(shots));
  return out;
}

Matrix kron(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& f : factors) {
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
      }
    }
    out = std::move(next);
  }
  return out;
}

LocalOperator OperatorString::dense() const {
  std::vector<Matrix> mats;
  std::vector<int> sites;
  for (const auto& f : factors_) {
    mats.push_back(f.obs.op().matrix());
    sites.push_back(f.site);
  }
  return LocalOperator(kron(mats), std::move(sites));
}

StringDecomposition decompose_string(const OperatorString& s) {
  const std::size_t n = s.size();
  std::vector<UnitaryDecomposition> parts;
  parts.reserve(n);
  double norm = 1.0;
  for (const auto& f : s.factors()) {
    parts.push_back(decompose(f.obs));
    norm *= parts.back().norm;
  }
  // prod_k (|S_k|/2)(W_k + W_k^dag) = (norm/2) * 2^(1-n) * sum over 2^n choices.
  const double coefficient = std::ldexp(1.0, 1 - static_cast<int>(n));
  StringDecomposition out{norm, {}};
  out.terms.reserve(std::size_t{1} << n);
  for (std::size_t choice = 0; choice < (std::size_t{1} << n); ++choice) {
    StringDecomposition::Term term{coefficient, choice, {}};
    for (std::size_t k = 0; k < n; ++k) {
      const bool dagger = (choice >> k) & 1U;
      const LocalOperator& v = dagger ? parts[k].w_dagger : parts[k].w;
      term.factors.push_back(v.on_sites({s.factors()[k].site}));
    }
    out.terms.push_back(std::move(term));
  }
  return out;
}

std::vector<const StringDecomposition::Term*> StringDecomposition::paired_terms() const {
  std::vector<const Term*> reps;
  for (const Term& t : terms) {
    if ((t.choice & 1U) == 0) reps.push_back(&t);
  }
  return reps;
}

Matrix StringDecomposition::dense_sum() const {
  Matrix sum;
  for (const Term& t : terms) {
    std::vector<Matrix> mats;
    for (const LocalOperator& f : t.factors) mats.push_back(f.matrix());
    Matrix product = t.coefficient * kron(mats);
    if (sum.size() == 0) {
      sum = std::move(product);
    } else {
      sum += product;
    }
  }
  return sum;
}

}  // namespace quditcorr
