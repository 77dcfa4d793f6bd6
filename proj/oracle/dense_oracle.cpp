#include "dense_oracle.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

namespace {

const double r = 1.0 / std::sqrt(2.0);

Mat kron2(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Mat spin1_x() {
  Mat m(3, 3);
  m << 0, r, 0, r, 0, r, 0, r, 0;
  return m;
}

Mat spin1_y() {
  const cd i(0, 1);
  Mat m(3, 3);
  m << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
  return m;
}

Mat spin1_z() {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 1;
  m(2, 2) = -1;
  return m;
}

Mat embed(const Mat& op, int site, int n_sites) {
  Mat out = Mat::Identity(1, 1);
  for (int k = 0; k < n_sites; ++k) out = kron2(out, k == site ? op : Mat::Identity(3, 3));
  return out;
}

Mat xxz_hamiltonian(int n_sites, double j_xy, double j_z) {
  const int dim = static_cast<int>(std::pow(3, n_sites));
  Mat h = Mat::Zero(dim, dim);
  for (int k = 0; k + 1 < n_sites; ++k) {
    h += j_xy * embed(spin1_x(), k, n_sites) * embed(spin1_x(), k + 1, n_sites);
    h += j_xy * embed(spin1_y(), k, n_sites) * embed(spin1_y(), k + 1, n_sites);
    h += j_z * embed(spin1_z(), k, n_sites) * embed(spin1_z(), k + 1, n_sites);
  }
  return h;
}

Mat evolution(const Mat& h, double t) { return (cd(0, -t) * h).exp(); }

Mat heisenberg(const Mat& op, const Mat& h, double t) {
  const Mat u = evolution(h, t);
  return u.adjoint() * op * u;
}

Correlators two_time(const Mat& a, const Mat& b, const Mat& h, double t1, double t2, const Vec& psi) {
  const Mat at = heisenberg(a, h, t1);
  const Mat bt = heisenberg(b, h, t2);
  const cd anti = psi.dot((at * bt + bt * at) * psi);
  const cd comm = psi.dot((at * bt - bt * at) * psi);
  return {anti.real(), (cd(0, 1) * comm).real()};
}

Vec neel_superposition(int n_sites) {
  const int dim = static_cast<int>(std::pow(3, n_sites));
  Vec v = Vec::Zero(dim);
  int up = 0;
  int down = 0;
  for (int k = 0; k < n_sites; ++k) {
    up = 3 * up + (k % 2 == 0 ? 0 : 2);
    down = 3 * down + (k % 2 == 0 ? 2 : 0);
  }
  v(up) = r;
  v(down) = r;
  return v;
}

double pulsed_expectation(const Mat& h0, const Mat& h_pulse, const Mat& readout, double t1, double dt, double t2,
                          const Vec& psi) {
  const Vec out = evolution(h0, t2 - t1 - dt) * ((cd(0, -dt) * h_pulse).exp() * (evolution(h0, t1) * psi));
  return (out.dot(readout * out) / out.squaredNorm()).real();
}

}  // namespace oracle
