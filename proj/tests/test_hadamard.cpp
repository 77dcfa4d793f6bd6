#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "quditcorr/benchmark.hpp"
#include "quditcorr/error.hpp"
#include "quditcorr/hadamard.hpp"

using namespace quditcorr;

namespace {

struct Chain {
  int n;
  std::shared_ptr<const SparseHamiltonian> h;
  Propagator prop;
  QuditState psi0;
  oracle::Mat hd;
  oracle::Vec psi;

  explicit Chain(int n_sites)
      : n(n_sites),
        h(std::make_shared<const SparseHamiltonian>(build_xxz(n_sites, 1.0, 0.5))),
        prop(Propagator::automatic(h)),
        psi0(neel_superposition(n_sites)),
        hd(oracle::xxz_hamiltonian(n_sites, 1.0, 0.5)),
        psi(oracle::neel_superposition(n_sites)) {}
};

HermitianObservable sz(int site) { return HermitianObservable(spin_matrix(1.0, SpinAxis::z, site)); }
HermitianObservable sx(int site) { return HermitianObservable(spin_matrix(1.0, SpinAxis::x, site)); }

QuditState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const RegisterShape shape(std::vector<int>(static_cast<std::size_t>(n), 3));
  Vector v(static_cast<Eigen::Index>(shape.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = Complex(g(rng), g(rng));
  return QuditState(shape, v.normalized());
}

}  // namespace

TEST_CASE("identity observables") {
  const Chain c(2);
  const HermitianObservable id(LocalOperator(Matrix::Identity(3, 3), {0}));
  HadamardTask task{0.0, 0.4, UnitaryChoice::w, UnitaryChoice::w, AncillaPhase::real, id, id};
  CHECK(run_hadamard_circuit(task, c.psi0, c.prop) == doctest::Approx(1.0).epsilon(1e-12));
  task.alpha = AncillaPhase::imaginary;
  CHECK(run_hadamard_circuit(task, c.psi0, c.prop) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("probability to correlator") {
  CHECK(probability_to_correlator(0.5) == 0.0);
  CHECK(probability_to_correlator(1.0) == 2.0);
  CHECK(probability_to_correlator(0.0) == -2.0);
  CHECK_NOTHROW(probability_to_correlator(1.0 + 1e-13));
  CHECK_THROWS_AS(probability_to_correlator(1.1), ValidationError);
  CHECK_THROWS_AS(probability_to_correlator(-0.01), ValidationError);
}

TEST_CASE("assemble correlator") {
  auto part = [](UnitaryChoice a, UnitaryChoice b, double v) {
    return CircuitPart{a, b, CorrelatorEstimate{v, 0.1, 10, EstimateMode::exact}};
  };
  using enum UnitaryChoice;
  std::vector<CircuitPart> zeros{part(w, w, 0), part(w, w_dagger, 0), part(w_dagger, w, 0), part(w_dagger, w_dagger, 0)};
  CHECK(assemble_correlator(zeros, 1.0, 1.0).value == 0.0);
  std::vector<CircuitPart> twos{part(w, w, 2), part(w, w_dagger, 2), part(w_dagger, w, 2), part(w_dagger, w_dagger, 2)};
  const auto e = assemble_correlator(twos, 1.0, 1.0);
  CHECK(e.value == doctest::Approx(2.0));
  CHECK(e.std_error == doctest::Approx(0.25 * std::sqrt(4 * 0.01)));
  CHECK(e.shots == 40);
  std::vector<CircuitPart> missing{part(w, w, 0), part(w, w_dagger, 0), part(w_dagger, w, 0)};
  CHECK_THROWS_AS(assemble_correlator(missing, 1.0, 1.0), ValidationError);
  std::vector<CircuitPart> dup{part(w, w, 0), part(w, w, 0), part(w_dagger, w, 0), part(w_dagger, w_dagger, 0)};
  CHECK_THROWS_AS(assemble_correlator(dup, 1.0, 1.0), ValidationError);
}

TEST_CASE("N=2 dimer at t2 = 0.7 matches the dense oracle") {
  const Chain c(2);
  const auto pair = measure_dynamical_correlator(sz(0), sz(1), 0.0, 0.7, c.psi0, c.prop, Budget::exact());
  const auto ref = oracle::two_time(oracle::embed(oracle::spin1_z(), 0, 2), oracle::embed(oracle::spin1_z(), 1, 2), c.hd,
                                    0.0, 0.7, c.psi);
  CHECK(std::abs(pair.plus.value - ref.plus) < 1e-8);
  CHECK(std::abs(pair.minus.value - ref.minus) < 1e-8);
  CHECK(std::abs(pair.minus.value) > 1e-3);  // the check is not vacuous
}

TEST_CASE("random two-time pairs and observables agree with the dense oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int n = 2; n <= 4; ++n) {
    const Chain c(n);
    const QuditState psi0 = random_state(n, rng);
    const oracle::Vec psi = psi0.amplitudes();
    for (int k = 0; k < 20; ++k) {
      double t1 = u(rng), t2 = u(rng);
      if (t2 < t1) std::swap(t1, t2);
      const int sa = static_cast<int>(rng() % n);
      const int sb = static_cast<int>(rng() % n);
      const bool use_x = k % 2 == 1;
      const auto a = use_x ? sx(sa) : sz(sa);
      const auto pair = measure_dynamical_correlator(a, sz(sb), t1, t2, psi0, c.prop, Budget::exact());
      const auto ref = oracle::two_time(oracle::embed(use_x ? oracle::spin1_x() : oracle::spin1_z(), sa, n),
                                        oracle::embed(oracle::spin1_z(), sb, n), c.hd, t1, t2, psi);
      CHECK(std::abs(pair.plus.value - ref.plus) < 1e-8);
      CHECK(std::abs(pair.minus.value - ref.minus) < 1e-8);
      const Complex corr = pair.correlator();
      CHECK(std::abs(corr.real() - ref.plus / 2) < 1e-8);
    }
  }
}

TEST_CASE("probabilities and unitary correlators stay in range") {
  const Chain c(3);
  for (double t : {0.0, 0.3, 2.2}) {
    for (AncillaPhase phase : {AncillaPhase::real, AncillaPhase::imaginary}) {
      const std::array<double, 1> times{t + 0.5};
      const auto p = hadamard_trace(sx(0), sz(2), t, times, c.psi0, c.prop, phase);
      for (double pk : p[0]) {
        CHECK(pk >= 0.0);
        CHECK(pk <= 1.0);
        CHECK(std::abs(probability_to_correlator(pk)) <= 2.0);
      }
    }
  }
}

TEST_CASE("trace matches single circuits") {
  const Chain c(3);
  const std::vector<double> times{0.2, 0.9, 0.9, 3.0};
  const auto trace = hadamard_trace(sz(0), sx(1), 0.2, times, c.psi0, c.prop, AncillaPhase::imaginary);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t part = 0; part < 4; ++part) {
      const HadamardTask task{0.2, times[k], static_cast<UnitaryChoice>(part / 2), static_cast<UnitaryChoice>(part % 2),
                              AncillaPhase::imaginary, sz(0), sx(1)};
      CHECK(std::abs(trace[k][part] - run_hadamard_circuit(task, c.psi0, c.prop)) < 1e-12);
    }
  }
  const std::vector<double> bad{0.1};
  CHECK_THROWS(hadamard_trace(sz(0), sx(1), 0.2, bad, c.psi0, c.prop, AncillaPhase::real));
}

TEST_CASE("Hermiticity symmetry under exchange of operators and times") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  const Chain c(4);
  for (int k = 0; k < 10; ++k) {
    const double t1 = u(rng), t2 = u(rng);
    const auto ab = measure_dynamical_correlator(sz(0), sx(2), t1, t2, c.psi0, c.prop, Budget::exact());
    const auto ba = measure_dynamical_correlator(sx(2), sz(0), t2, t1, c.psi0, c.prop, Budget::exact());
    CHECK(std::abs(ab.plus.value - ba.plus.value) < 1e-8);
    CHECK(std::abs(ab.minus.value + ba.minus.value) < 1e-8);
  }
}

TEST_CASE("equal-time invariants") {
  const Chain c(4);
  for (double t : {0.0, 1.3, 4.0}) {
    const auto same = measure_dynamical_correlator(sz(1), sz(1), t, t, c.psi0, c.prop, Budget::exact());
    CHECK(std::abs(same.minus.value) < 1e-10);
    const auto distinct = measure_dynamical_correlator(sz(0), sz(1), t, t, c.psi0, c.prop, Budget::exact());
    CHECK(std::abs(distinct.minus.value) < 1e-10);
  }
  const auto zero = measure_dynamical_correlator(sz(0), sz(1), 0.0, 0.0, c.psi0, c.prop, Budget::exact());
  CHECK(zero.plus.value == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("sample probability") {
  CHECK(sample_probability(0.0, 1000, StreamKey{1, 1}) == 0.0);
  CHECK(sample_probability(1.0, 1000, StreamKey{1, 1}) == 1.0);
  const double p = sample_probability(0.5, 10000, StreamKey{4, 2});
  CHECK(std::abs(p - 0.5) <= 5 * 0.005);
  CHECK(sample_probability(0.3, 777, StreamKey{8, 9}) == sample_probability(0.3, 777, StreamKey{8, 9}));
  CHECK_THROWS_AS(sample_probability(0.3, 0, StreamKey{8, 9}), ValidationError);
}

TEST_CASE("variance model") {
  CHECK(variance_model({0.0, 1.0, 1.0, 0.0}, 1.0, 1.0) == 0.0);
  CHECK(variance_model({0.5, 0.5, 0.5, 0.5}, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(variance_model({0.9, 0.1, 0.5, 0.5}, 1.0, 1.0) == doctest::Approx(2.72));
  CHECK(variance_model({0.5, 0.5, 0.5, 0.5}, 2.0, 0.5) == doctest::Approx(4.0));
  CHECK_THROWS(variance_model({1.5, 0.5, 0.5, 0.5}, 1.0, 1.0));
}

TEST_CASE("exact mode with a nominal budget reports the modelled error") {
  const std::array<double, 4> p{0.9, 0.1, 0.5, 0.5};
  const auto e = estimate_from_probabilities(p, 1.0, 1.0, Budget::exact(100));
  CHECK(e.std_error == doctest::Approx(std::sqrt(variance_model(p, 1.0, 1.0) / 400.0)));
  CHECK(e.shots == 400);
  CHECK(estimate_from_probabilities(p, 1.0, 1.0, Budget::exact()).std_error == 0.0);
}

TEST_CASE("sampled estimates are reproducible and unbiased") {
  const Chain c(2);
  const Budget budget = Budget::sampled(200, StreamKey{42, 0});
  const auto a = measure_dynamical_correlator(sz(0), sz(1), 0.0, 1.0, c.psi0, c.prop, budget);
  const auto b = measure_dynamical_correlator(sz(0), sz(1), 0.0, 1.0, c.psi0, c.prop, budget);
  CHECK(a.plus.value == b.plus.value);
  CHECK(a.minus.value == b.minus.value);
  CHECK(a.plus.mode == EstimateMode::sampled);
  CHECK_THROWS(measure_dynamical_correlator(sz(0), sz(1), 0.0, 1.0, c.psi0, c.prop, Budget::sampled(0, {})));

  const std::array<double, 4> p{0.8, 0.3, 0.55, 0.1};
  double sum = 0.0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) {
    sum += estimate_from_probabilities(p, 1.0, 1.0, Budget::sampled(100, StreamKey{static_cast<std::uint64_t>(s), 5})).value;
  }
  const double exact = estimate_from_probabilities(p, 1.0, 1.0, Budget::exact()).value;
  const double sigma = std::sqrt(variance_model(p, 1.0, 1.0) / 400.0 / seeds);
  CHECK(std::abs(sum / seeds - exact) < 5 * sigma);
}

TEST_CASE("each circuit measures 2 Re[exp(-i alpha) <V_B^dag(t2) V_A(t1)>]") {
  const int n = 3;
  const Chain c(n);
  const auto a = sx(0);
  const auto b = sz(2);
  const auto da = decompose(a);
  const auto db = decompose(b);
  const double t1 = 0.4, t2 = 1.7;
  for (AncillaPhase phase : {AncillaPhase::real, AncillaPhase::imaginary}) {
    for (std::size_t k = 0; k < 4; ++k) {
      const auto va = static_cast<UnitaryChoice>(k / 2);
      const auto vb = static_cast<UnitaryChoice>(k % 2);
      const HadamardTask task{t1, t2, va, vb, phase, a, b};
      const double measured = probability_to_correlator(run_hadamard_circuit(task, c.psi0, c.prop));
      const oracle::Mat ua = oracle::embed((va == UnitaryChoice::w ? da.w : da.w_dagger).matrix(), 0, n);
      const oracle::Mat ub = oracle::embed((vb == UnitaryChoice::w ? db.w : db.w_dagger).matrix(), 2, n);
      const Complex z = c.psi.dot(oracle::heisenberg(ub, c.hd, t2).adjoint() * oracle::heisenberg(ua, c.hd, t1) * c.psi);
      const double expected = 2.0 * (std::exp(Complex(0, -phase_angle(phase))) * z).real();
      CHECK(std::abs(measured - expected) < 1e-10);
    }
  }
}

TEST_CASE("task validation") {
  const Chain c(2);
  HadamardTask task{-0.1, 1.0, UnitaryChoice::w, UnitaryChoice::w, AncillaPhase::real, sz(0), sz(1)};
  CHECK_THROWS_AS(run_hadamard_circuit(task, c.psi0, c.prop), ValidationError);
  task = HadamardTask{0.0, 1.0, UnitaryChoice::w, UnitaryChoice::w, AncillaPhase::real, sz(0), sz(5)};
  CHECK_THROWS_AS(run_hadamard_circuit(task, c.psi0, c.prop), DimensionError);
}
