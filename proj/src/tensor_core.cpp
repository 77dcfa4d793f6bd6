#include "quditcorr/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "quditcorr/error.hpp"

namespace quditcorr {

RegisterShape::RegisterShape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("register must have at least one site");
  for (int d : dims_) {
    if (d < 2) throw DimensionError(fmt::format("local dimension {} < 2", d));
    if (size_ > kMaxAmplitudes / static_cast<std::size_t>(d)) {
      throw DimensionError(fmt::format("register exceeds {} amplitudes", kMaxAmplitudes));
    }
    size_ *= static_cast<std::size_t>(d);
  }
  strides_.assign(dims_.size(), 1);
  for (int s = num_sites() - 2; s >= 0; --s) {
    strides_[s] = strides_[s + 1] * static_cast<std::size_t>(dims_[s + 1]);
  }
}

int RegisterShape::dim(int site) const {
  if (site < 0 || site >= num_sites()) {
    throw DimensionError(fmt::format("site {} out of range [0, {})", site, num_sites()));
  }
  return dims_[site];
}

std::size_t RegisterShape::stride(int site) const {
  dim(site);
  return strides_[site];
}

std::size_t RegisterShape::subspace_dim(std::span<const int> sites) const {
  std::size_t d = 1;
  for (int s : sites) d *= static_cast<std::size_t>(dim(s));
  return d;
}

RegisterShape RegisterShape::with_leading_site(int d) const {
  std::vector<int> dims{d};
  dims.insert(dims.end(), dims_.begin(), dims_.end());
  return RegisterShape(std::move(dims));
}

// ---------------------------------------------------------------------------

QuditState::QuditState(RegisterShape shape, Vector amplitudes)
    : shape_(std::move(shape)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != shape_.size()) {
    throw DimensionError(fmt::format("amplitude vector has length {}, register needs {}",
                                     amplitudes_.size(), shape_.size()));
  }
  refresh_norm();
}

QuditState QuditState::basis(RegisterShape shape, std::span<const int> levels) {
  if (static_cast<int>(levels.size()) != shape.num_sites()) {
    throw DimensionError("basis state needs one level per site");
  }
  std::size_t index = 0;
  for (int s = 0; s < shape.num_sites(); ++s) {
    if (levels[s] < 0 || levels[s] >= shape.dim(s)) {
      throw DimensionError(fmt::format("level {} invalid on site {}", levels[s], s));
    }
    index += static_cast<std::size_t>(levels[s]) * shape.stride(s);
  }
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(shape.size()));
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return QuditState(std::move(shape), std::move(amps));
}

QuditState QuditState::tensor(const QuditState& other) const {
  std::vector<int> dims(shape_.dims().begin(), shape_.dims().end());
  dims.insert(dims.end(), other.shape_.dims().begin(), other.shape_.dims().end());
  RegisterShape joint(std::move(dims));
  Vector amps(static_cast<Eigen::Index>(joint.size()));
  const Eigen::Index n = other.amplitudes_.size();
  for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
    amps.segment(i * n, n) = amplitudes_[i] * other.amplitudes_;
  }
  return QuditState(std::move(joint), std::move(amps));
}

QuditState QuditState::normalized() const {
  if (squared_norm_ <= 0.0) throw ValidationError("cannot normalize a zero state");
  return QuditState(shape_, amplitudes_ / std::sqrt(squared_norm_));
}

void QuditState::refresh_norm() {
  squared_norm_ = amplitudes_.squaredNorm();
  normalization_ = std::abs(std::sqrt(squared_norm_) - 1.0) <= kNormTolerance
                       ? Normalization::normalized
                       : Normalization::unnormalized;
}

// ---------------------------------------------------------------------------

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const Matrix gram = m.adjoint() * m;
  return (gram - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

LocalOperator::LocalOperator(Matrix matrix, std::vector<int> support)
    : matrix_(std::move(matrix)), support_(std::move(support)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw DimensionError("local operator must be a non-empty square matrix");
  }
  if (support_.empty()) throw DimensionError("local operator needs a support");
  std::vector<int> sorted = support_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DimensionError("local operator support has repeated sites");
  }
  if (sorted.front() < 0) throw DimensionError("negative site index in support");
  hermitian_ = is_hermitian(matrix_);
  unitary_ = is_unitary(matrix_);
}

LocalOperator LocalOperator::adjoint() const { return LocalOperator(matrix_.adjoint(), support_); }

LocalOperator LocalOperator::on_sites(std::vector<int> support) const {
  if (support.size() != support_.size()) {
    throw DimensionError("retargeted support must have the same number of sites");
  }
  return LocalOperator(matrix_, std::move(support));
}

LocalOperator LocalOperator::shifted(int offset) const {
  std::vector<int> support = support_;
  for (int& s : support) s += offset;
  return LocalOperator(matrix_, std::move(support));
}

// ---------------------------------------------------------------------------

namespace {

// Index bookkeeping for a gather/scatter over one operator's support.
// `offsets` enumerates the operator's local basis; `bases` enumerates every
// register index whose support digits are zero (and whose control digit, if
// any, equals the control value).
struct Embedding {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> bases;
};

Embedding embed(const RegisterShape& shape, std::span<const int> support,
                std::optional<std::pair<int, int>> control) {
  for (int s : support) shape.dim(s);
  const std::size_t local_dim = shape.subspace_dim(support);

  Embedding e;
  e.offsets.resize(local_dim);
  for (std::size_t k = 0; k < local_dim; ++k) {
    std::size_t rem = k;
    std::size_t off = 0;
    for (int i = static_cast<int>(support.size()) - 1; i >= 0; --i) {
      const auto d = static_cast<std::size_t>(shape.dim(support[i]));
      off += (rem % d) * shape.stride(support[i]);
      rem /= d;
    }
    e.offsets[k] = off;
  }

  std::vector<int> free_sites;
  for (int s = 0; s < shape.num_sites(); ++s) {
    const bool in_support = std::find(support.begin(), support.end(), s) != support.end();
    const bool is_control = control && control->first == s;
    if (!in_support && !is_control) free_sites.push_back(s);
  }
  const std::size_t start = control ? static_cast<std::size_t>(control->second) *
                                          shape.stride(control->first)
                                    : 0;
  const std::size_t count = shape.subspace_dim(free_sites);
  e.bases.reserve(count);
  std::vector<int> digits(free_sites.size(), 0);
  std::size_t base = start;
  for (std::size_t n = 0; n < count; ++n) {
    e.bases.push_back(base);
    for (int i = static_cast<int>(free_sites.size()) - 1; i >= 0; --i) {
      const int s = free_sites[i];
      if (++digits[i] < shape.dim(s)) {
        base += shape.stride(s);
        break;
      }
      base -= static_cast<std::size_t>(digits[i] - 1) * shape.stride(s);
      digits[i] = 0;
    }
  }
  return e;
}

void check_operator_fits(const RegisterShape& shape, const LocalOperator& op) {
  for (int s : op.support()) {
    if (s >= shape.num_sites()) {
      throw DimensionError(fmt::format("support site {} outside register of {} sites", s,
                                       shape.num_sites()));
    }
  }
  if (shape.subspace_dim(op.support()) != static_cast<std::size_t>(op.dim())) {
    throw DimensionError(fmt::format("operator dimension {} does not match support dimension {}",
                                     op.dim(), shape.subspace_dim(op.support())));
  }
}

void apply_embedded(Vector& amps, const Embedding& e, const Matrix& m) {
  const auto d = static_cast<Eigen::Index>(e.offsets.size());
  Vector in(d);
  Vector out(d);
  for (std::size_t base : e.bases) {
    for (Eigen::Index k = 0; k < d; ++k) in[k] = amps[static_cast<Eigen::Index>(base + e.offsets[k])];
    out.noalias() = m * in;
    for (Eigen::Index k = 0; k < d; ++k) amps[static_cast<Eigen::Index>(base + e.offsets[k])] = out[k];
  }
}

}  // namespace

void apply_local_inplace(QuditState& state, const LocalOperator& op) {
  check_operator_fits(state.shape(), op);
  const Embedding e = embed(state.shape(), op.support(), std::nullopt);
  state.update([&](Vector& amps) { apply_embedded(amps, e, op.matrix()); }, op.unitary());
}

QuditState apply_local(const QuditState& state, const LocalOperator& op) {
  QuditState out = state;
  apply_local_inplace(out, op);
  return out;
}

void apply_controlled_inplace(QuditState& state, int control_site, int control_value,
                              const LocalOperator& op) {
  check_operator_fits(state.shape(), op);
  const int cdim = state.shape().dim(control_site);
  if (std::find(op.support().begin(), op.support().end(), control_site) != op.support().end()) {
    throw DimensionError(fmt::format("control site {} lies inside the operator support", control_site));
  }
  if (control_value < 0 || control_value >= cdim) {
    throw DimensionError(fmt::format("control value {} invalid for dimension {}", control_value, cdim));
  }
  const Embedding e = embed(state.shape(), op.support(), std::make_pair(control_site, control_value));
  state.update([&](Vector& amps) { apply_embedded(amps, e, op.matrix()); }, op.unitary());
}

QuditState apply_controlled(const QuditState& state, int control_site, int control_value,
                            const LocalOperator& op) {
  QuditState out = state;
  apply_controlled_inplace(out, control_site, control_value, op);
  return out;
}

double ancilla_zero_probability(const QuditState& state) {
  if (state.shape().dim(0) != 2) throw DimensionError("site 0 is not a qubit ancilla");
  if (state.squared_norm() <= 0.0) throw ValidationError("zero state has no outcome distribution");
  const auto half = static_cast<Eigen::Index>(state.shape().stride(0));
  return state.amplitudes().head(half).squaredNorm() / state.squared_norm();
}

std::vector<double> site_probabilities(const QuditState& state, int site) {
  const int d = state.shape().dim(site);
  if (state.squared_norm() <= 0.0) throw ValidationError("zero state has no outcome distribution");
  const std::size_t stride = state.shape().stride(site);
  const std::size_t block = stride * static_cast<std::size_t>(d);
  std::vector<double> p(static_cast<std::size_t>(d), 0.0);
  const Vector& a = state.amplitudes();
  for (std::size_t outer = 0; outer < state.shape().size(); outer += block) {
    for (int level = 0; level < d; ++level) {
      const std::size_t begin = outer + static_cast<std::size_t>(level) * stride;
      p[level] += a.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(stride)).squaredNorm();
    }
  }
  for (double& x : p) x /= state.squared_norm();
  return p;
}

Complex matrix_element(const QuditState& bra, const LocalOperator& op, const QuditState& ket) {
  if (!(bra.shape() == ket.shape())) throw DimensionError("bra and ket registers differ");
  return inner(bra, apply_local(ket, op));
}

Complex inner(const QuditState& a, const QuditState& b) {
  if (!(a.shape() == b.shape())) throw DimensionError("inner product of different registers");
  return a.amplitudes().dot(b.amplitudes());
}

std::vector<std::uint64_t> sample_multinomial(std::span<const double> probabilities,
                                              std::uint64_t shots, Rng& rng) {
  std::vector<std::uint64_t> counts(probabilities.size(), 0);
  if (shots == 0 || probabilities.empty()) return counts;
  // Sequential conditional binomials; the last level takes the remainder.
  double remaining_p = 1.0;
  std::uint64_t remaining = shots;
  for (std::size_t k = 0; k + 1 < probabilities.size() && remaining > 0; ++k) {
    const double p = std::clamp(probabilities[k], 0.0, 1.0);
    const double q = remaining_p > 0.0 ? std::clamp(p / remaining_p, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, q);
    counts[k] = draw(rng);
    remaining -= counts[k];
    remaining_p -= p;
  }
  counts.back() += remaining;
  return counts;
}

std::vector<std::uint64_t> sample_outcomes(const QuditState& state, int site, std::uint64_t shots,
                                           Rng& rng) {
  const std::vector<double> p = site_probabilities(state, site);
  return sample_multinomial(p, shots, rng);
}

std::vector<std::uint64_t> sample_outcomes(const QuditState& state, int site, std::uint64_t shots,
                                           StreamKey key) {
  Rng rng = make_rng(key);
  return sample_outcomes(state, site, shots, rng);
}

}  // namespace quditcorr
