#pragma once

// Mixed-radix state vectors and the local linear operations on them.
//
// Amplitude layout is row-major over the register: site 0 is the slowest
// varying digit. A register of an ancilla qubit followed by N spin-1 sites is
// therefore two contiguous blocks of 3^N amplitudes, one per ancilla level.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quditcorr/rng.hpp"

namespace quditcorr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-12;

class RegisterShape {
 public:
  /// Largest register the builder accepts, in amplitudes.
  static constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 27;

  explicit RegisterShape(std::vector<int> dims);

  std::span<const int> dims() const { return dims_; }
  int num_sites() const { return static_cast<int>(dims_.size()); }
  int dim(int site) const;
  std::size_t size() const { return size_; }
  std::size_t stride(int site) const;

  /// Dimension of the sub-register formed by `sites`, in the given order.
  std::size_t subspace_dim(std::span<const int> sites) const;

  /// The same register with one extra site of dimension `d` in front.
  RegisterShape with_leading_site(int d) const;

  bool operator==(const RegisterShape& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

enum class Normalization { normalized, unnormalized };

/// Pure state on a mixed-radix register.
///
/// Non-unitary operations never renormalize; the squared norm is kept
/// alongside the amplitudes so callers can account for lost probability.
class QuditState {
 public:
  QuditState(RegisterShape shape, Vector amplitudes);

  static QuditState basis(RegisterShape shape, std::span<const int> levels);

  const RegisterShape& shape() const { return shape_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }

  double squared_norm() const { return squared_norm_; }
  Normalization normalization() const { return normalization_; }
  bool is_normalized() const { return normalization_ == Normalization::normalized; }

  /// Kronecker product; `*this` occupies the leading (slower) sites.
  QuditState tensor(const QuditState& other) const;

  QuditState normalized() const;

  /// Mutate amplitudes in place. `norm_preserving` skips the norm refresh.
  template <class F>
  void update(F&& mutate, bool norm_preserving) {
    mutate(amplitudes_);
    if (!norm_preserving) refresh_norm();
  }

 private:
  void refresh_norm();

  RegisterShape shape_;
  Vector amplitudes_;
  double squared_norm_ = 0.0;
  Normalization normalization_ = Normalization::normalized;
};

/// Dense operator on an ordered list of sites.
///
/// The first support site is the slowest digit of the operator's row index.
/// Hermitian and unitary flags are detected on construction at 1e-12.
class LocalOperator {
 public:
  LocalOperator(Matrix matrix, std::vector<int> support);

  const Matrix& matrix() const { return matrix_; }
  std::span<const int> support() const { return support_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  bool hermitian() const { return hermitian_; }
  bool unitary() const { return unitary_; }

  LocalOperator adjoint() const;
  LocalOperator on_sites(std::vector<int> support) const;
  /// Same operator with every support index moved by `offset`.
  LocalOperator shifted(int offset) const;

 private:
  Matrix matrix_;
  std::vector<int> support_;
  bool hermitian_ = false;
  bool unitary_ = false;
};

bool is_hermitian(const Matrix& m, double tol = kNormTolerance);
bool is_unitary(const Matrix& m, double tol = kNormTolerance);

void apply_local_inplace(QuditState& state, const LocalOperator& op);
QuditState apply_local(const QuditState& state, const LocalOperator& op);

/// Applies `op` only on the subspace where `control_site` is at `control_value`.
void apply_controlled_inplace(QuditState& state, int control_site, int control_value,
                              const LocalOperator& op);
QuditState apply_controlled(const QuditState& state, int control_site, int control_value,
                            const LocalOperator& op);

/// Probability of finding site 0 (a qubit) in |0>, relative to the squared norm.
double ancilla_zero_probability(const QuditState& state);

/// Marginal distribution of one site, relative to the squared norm.
std::vector<double> site_probabilities(const QuditState& state, int site);

/// <bra| op |ket> without normalization.
Complex matrix_element(const QuditState& bra, const LocalOperator& op, const QuditState& ket);

/// Inner product <a|b>.
Complex inner(const QuditState& a, const QuditState& b);

/// Multinomial draw of `shots` measurements of `site`. Counts are indexed by level.
std::vector<std::uint64_t> sample_outcomes(const QuditState& state, int site, std::uint64_t shots,
                                           StreamKey key);
std::vector<std::uint64_t> sample_outcomes(const QuditState& state, int site, std::uint64_t shots,
                                           Rng& rng);

/// Multinomial draw from an explicit distribution.
std::vector<std::uint64_t> sample_multinomial(std::span<const double> probabilities,
                                              std::uint64_t shots, Rng& rng);

}  // namespace quditcorr
