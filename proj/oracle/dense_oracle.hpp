#pragma once

// Brute-force reference: full 3^N matrices, U = exp(-iHt) by matrix
// exponential, Heisenberg operators U^dag A U. Kept free of the library so
// that agreement with it means something.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Spin-1 matrices in the basis m = +1, 0, -1.
Mat spin1_x();
Mat spin1_y();
Mat spin1_z();

/// op on `site` of an n-site spin-1 chain, site 0 leftmost in the Kronecker product.
Mat embed(const Mat& op, int site, int n_sites);

/// Open-boundary XXZ chain, sum_k j_xy (SxSx + SySy) + j_z SzSz.
Mat xxz_hamiltonian(int n_sites, double j_xy, double j_z);

Mat evolution(const Mat& h, double t);

/// U(t)^dag op U(t).
Mat heisenberg(const Mat& op, const Mat& h, double t);

struct Correlators {
  double plus;   ///< <{A(t1), B(t2)}>
  double minus;  ///< i <[A(t1), B(t2)]>
};

Correlators two_time(const Mat& a, const Mat& b, const Mat& h, double t1, double t2, const Vec& psi);

/// (|+-+...> + |-+-...>)/sqrt(2).
Vec neel_superposition(int n_sites);

/// <Sz_readout(t2)> after evolving with h0 for t1, h_pulse for dt, h0 for the rest.
double pulsed_expectation(const Mat& h0, const Mat& h_pulse, const Mat& readout, double t1, double dt, double t2,
                          const Vec& psi);

}  // namespace oracle
