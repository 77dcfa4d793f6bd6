#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "dense_oracle.hpp"
#include "quditcorr/benchmark.hpp"
#include "quditcorr/error.hpp"
#include "quditcorr/linear_response.hpp"

using namespace quditcorr;

namespace {

std::shared_ptr<const SparseHamiltonian> xxz(int n) {
  return std::make_shared<const SparseHamiltonian>(build_xxz(n, 1.0, 0.5));
}

LinearResponseConfig config(double lambda, PerturbationKind kind, int probe = 0, int readout = 1) {
  return LinearResponseConfig{lambda, 1e-3, probe, readout, kind};
}

double oracle_lr(int n, const LinearResponseConfig& c, double t1, double t2) {
  const oracle::Mat h0 = oracle::xxz_hamiltonian(n, 1.0, 0.5);
  const oracle::Mat szj = oracle::embed(oracle::spin1_z(), c.probe_site, n);
  const Complex coupling = c.kind == PerturbationKind::hermitian ? Complex(c.lambda, 0) : Complex(0, c.lambda);
  const oracle::Mat hp = h0 - coupling * szj;
  const oracle::Mat szi = oracle::embed(oracle::spin1_z(), c.readout_site, n);
  const oracle::Vec psi = oracle::neel_superposition(n);
  const double pert = oracle::pulsed_expectation(h0, hp, szi, t1, c.pulse_area, t2, psi);
  const oracle::Vec ref = oracle::evolution(h0, t2) * psi;
  return -(pert - ref.dot(szi * ref).real()) / (c.lambda * c.pulse_area);
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config(0.0, PerturbationKind::hermitian).validate(), ValidationError);
  CHECK_THROWS_AS(config(-0.2, PerturbationKind::hermitian).validate(), ValidationError);
  LinearResponseConfig c = config(0.2, PerturbationKind::hermitian);
  c.pulse_area = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(config(0.2, PerturbationKind::hermitian).pulse_duration(2.0) == doctest::Approx(5e-4));
}

TEST_CASE("effective shots") {
  CHECK(effective_shots(6000, 1.0) == 6000);
  CHECK(effective_shots(6000, 0.5) == 3000);
  CHECK(effective_shots(6000, 1e-9) == 1);
  CHECK_THROWS(effective_shots(6000, 0.0));
  CHECK_THROWS(effective_shots(6000, 1.1));
}

TEST_CASE("normalized expectation") {
  const QuditState psi = neel_superposition(2);
  const HermitianObservable sz(spin_matrix(1.0, SpinAxis::z, 0));
  CHECK(normalized_expectation(psi, sz) == doctest::Approx(0.0));
  Vector v(3);
  v << 0.6, 0.0, 0.8;
  const QuditState single(RegisterShape({3}), v);
  const HermitianObservable s0(spin_matrix(1.0, SpinAxis::z));
  CHECK(normalized_expectation(single, s0) == doctest::Approx(0.36 - 0.64));
  CHECK(normalized_expectation(QuditState(RegisterShape({3}), 0.5 * v), s0) == doctest::Approx(0.36 - 0.64));

  // Single spin after a non-Hermitian pulse against a 3x3 exponential.
  Vector w(3);
  w << 0.6, Complex(0, 0.48), 0.64;
  const QuditState start(RegisterShape({3}), w);
  const Matrix hm = Complex(0, -0.3) * spin_matrix(1.0, SpinAxis::z).matrix();
  const auto h = std::make_shared<const SparseHamiltonian>(SparseMatrix(hm.sparseView()), std::vector<int>{3}, Couplings{});
  const QuditState out = Propagator(h, PropagatorStrategy::dense_eig).evolve(start, 0.8);
  const Vector ref = (Complex(0, -0.8) * hm).exp() * w;
  const Matrix szm = spin_matrix(1.0, SpinAxis::z).matrix();
  CHECK(normalized_expectation(out, s0) == doctest::Approx((ref.dot(szm * ref) / ref.squaredNorm()).real()).epsilon(1e-12));
}

TEST_CASE("exact estimate equals the dense difference quotient") {
  for (auto kind : {PerturbationKind::hermitian, PerturbationKind::non_hermitian}) {
    const auto c = config(0.2, kind, 1, 2);
    for (double t2 : {0.5, 2.0, 4.5}) {
      const auto e = measure_lr(c, 0.3, t2, neel_superposition(3), xxz(3), default_propagator_factory(), LrBudget::exact());
      CHECK(e.value == doctest::Approx(oracle_lr(3, c, 0.3, t2)).epsilon(1e-6));
    }
  }
}

TEST_CASE("dimer commutator within O(lambda) of the oracle, with Richardson check") {
  const auto h = xxz(2);
  const double ref = oracle::two_time(oracle::embed(oracle::spin1_z(), 0, 2), oracle::embed(oracle::spin1_z(), 1, 2),
                                      oracle::xxz_hamiltonian(2, 1.0, 0.5), 0.0, 1.0, oracle::neel_superposition(2))
                         .minus;
  double scale = 0.0;
  for (double t = 0.0; t <= 5.0; t += 0.05) {
    scale = std::max(scale, std::abs(oracle::two_time(oracle::embed(oracle::spin1_z(), 0, 2),
                                                      oracle::embed(oracle::spin1_z(), 1, 2),
                                                      oracle::xxz_hamiltonian(2, 1.0, 0.5), 0.0, t,
                                                      oracle::neel_superposition(2))
                                         .minus));
  }
  auto lr = [&](double lambda) {
    return measure_lr(config(lambda, PerturbationKind::hermitian), 0.0, 1.0, neel_superposition(2), h,
                      default_propagator_factory(), LrBudget::exact())
        .value;
  };
  const double full = lr(0.01);
  const double half = lr(0.005);
  CHECK(std::abs(full - ref) <= 0.05 * scale);
  // First-order extrapolation removes the lambda-linear part of the bias.
  CHECK(std::abs(2 * half - full - ref) <= std::abs(full - ref) + 1e-9);
}

TEST_CASE("estimate converges to its small-lambda limit as lambda decreases") {
  // A state without spin-flip symmetry, so the response has an O(lambda) term.
  const int n = 3;
  const auto h = xxz(n);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Vector v(27);
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = Complex(g(rng), g(rng));
  v.normalize();
  const QuditState psi0(RegisterShape({3, 3, 3}), v);
  const oracle::Mat h0 = oracle::xxz_hamiltonian(n, 1.0, 0.5);
  const oracle::Mat probe = oracle::embed(oracle::spin1_z(), 0, n);
  const oracle::Mat readout = oracle::embed(oracle::spin1_z(), 1, n);
  for (auto kind : {PerturbationKind::hermitian, PerturbationKind::non_hermitian}) {
    for (double t2 : {1.0, 2.5}) {
      // lambda -> 0 limit of the same quotient, from the dense oracle at lambda = 1e-4.
      const double tiny = 1e-4;
      const Complex coupling = kind == PerturbationKind::hermitian ? Complex(tiny, 0) : Complex(0, tiny);
      const oracle::Vec ref = oracle::evolution(h0, t2) * v;
      const double base = (ref.dot(readout * ref)).real();
      const double limit = -(oracle::pulsed_expectation(h0, h0 - coupling * probe, readout, 0.0, 1e-3, t2, v) - base) /
                           (tiny * 1e-3);
      double previous = -1.0;
      for (double lambda : {0.05, 0.1, 0.2, 0.4}) {
        const double e = measure_lr(config(lambda, kind), 0.0, t2, psi0, h, default_propagator_factory(), LrBudget::exact()).value;
        const double deviation = std::abs(e - limit);
        CHECK(deviation > previous);
        previous = deviation;
      }
    }
  }
}

TEST_CASE("exact commutator and anticommutator traces approach the correlator") {
  const int n = 3;
  const auto h = xxz(n);
  const auto a = oracle::embed(oracle::spin1_z(), 0, n);
  const auto b = oracle::embed(oracle::spin1_z(), 1, n);
  const auto hd = oracle::xxz_hamiltonian(n, 1.0, 0.5);
  const auto psi = oracle::neel_superposition(n);
  for (double t2 : {1.0, 2.5}) {
    const auto r = oracle::two_time(a, b, hd, 0.0, t2, psi);  // <Sz> = 0 on this state
    const double herm = measure_lr(config(0.05, PerturbationKind::hermitian), 0.0, t2, neel_superposition(n), h,
                                   default_propagator_factory(), LrBudget::exact()).value;
    const double non = measure_lr(config(0.05, PerturbationKind::non_hermitian), 0.0, t2, neel_superposition(n), h,
                                  default_propagator_factory(), LrBudget::exact()).value;
    CHECK(std::abs(herm - r.minus) < 5e-3);
    CHECK(std::abs(non - r.plus) < 5e-3);
  }
}

TEST_CASE("sampled standard deviation scales as 1/(lambda * area * sqrt(shots))") {
  const auto h = xxz(2);
  const auto c1 = config(0.1, PerturbationKind::hermitian);
  const auto c2 = config(0.4, PerturbationKind::hermitian);
  const std::array<double, 1> times{1.0};
  const auto p1 = lr_trace(c1, 0.0, times, neel_superposition(2), h, default_propagator_factory())[0];
  const auto p2 = lr_trace(c2, 0.0, times, neel_superposition(2), h, default_propagator_factory())[0];
  auto empirical_std = [](const LinearResponseConfig& c, const LrPoint& p, std::uint64_t shots) {
    double s1 = 0.0, s2 = 0.0;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s) {
      const double v = lr_estimate(c, p, LrBudget::sampled(shots, StreamKey{static_cast<std::uint64_t>(s), 3})).value;
      s1 += v;
      s2 += v * v;
    }
    return std::sqrt(s2 / seeds - (s1 / seeds) * (s1 / seeds));
  };
  const double sd1 = empirical_std(c1, p1, 2000);
  const double sd2 = empirical_std(c2, p2, 2000);
  const double sd3 = empirical_std(c1, p1, 8000);
  CHECK(sd1 / sd2 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(sd1 / sd3 == doctest::Approx(2.0).epsilon(0.2));
  const auto modelled = lr_estimate(c1, p1, LrBudget::exact(2000)).std_error;
  CHECK(sd1 == doctest::Approx(modelled).epsilon(0.2));
}

TEST_CASE("non-Hermitian sampling uses the reduced shot count") {
  const auto c = config(0.4, PerturbationKind::non_hermitian);
  LrPoint p{1.0, {0.2, 0.5, 0.3}, {0.25, 0.5, 0.25}, 0.5};
  const auto e = lr_estimate(c, p, LrBudget::sampled(1000, StreamKey{1, 1}));
  CHECK(e.shots == 250 + 500);
  const auto h = lr_estimate(config(0.4, PerturbationKind::hermitian), p, LrBudget::sampled(1000, StreamKey{1, 1}));
  CHECK(h.shots == 1000);
  CHECK_THROWS(lr_estimate(c, p, LrBudget::sampled(1, StreamKey{1, 1})));
}

TEST_CASE("pulse must fit before t2") {
  const auto c = config(0.2, PerturbationKind::hermitian);
  CHECK_THROWS_AS(measure_lr(c, 1.0, 1.0005, neel_superposition(2), xxz(2), default_propagator_factory(), LrBudget::exact()),
                  ValidationError);
  CHECK_NOTHROW(measure_lr(c, 1.0, 1.001, neel_superposition(2), xxz(2), default_propagator_factory(), LrBudget::exact()));
}

TEST_CASE("tiny lambda gives a tiny difference") {
  // Both branches see nearly the same dynamics; the quotient stays finite.
  const auto e = measure_lr(config(1e-12, PerturbationKind::hermitian), 0.0, 1.0, neel_superposition(2), xxz(2),
                            default_propagator_factory(), LrBudget::exact());
  CHECK(std::isfinite(e.value));
}

TEST_CASE("norm collapse is flagged") {
  LinearResponseConfig c = config(50.0, PerturbationKind::non_hermitian);
  c.pulse_area = 0.5;
  const QuditState up = QuditState::basis(RegisterShape({3, 3}), std::array<int, 2>{0, 0});
  CHECK_THROWS_AS(measure_lr(c, 0.0, 1.0, up, xxz(2), default_propagator_factory(), LrBudget::exact()), ValidationError);
}
