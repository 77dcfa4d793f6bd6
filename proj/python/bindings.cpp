#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quditcorr/benchmark.hpp"
#include "quditcorr/config.hpp"
#include "quditcorr/error.hpp"
#include "quditcorr/run.hpp"

namespace py = pybind11;
namespace qc = quditcorr;
using qc::Matrix;

namespace {

qc::SpinAxis parse_axis(const std::string& axis) {
  if (axis == "x") return qc::SpinAxis::x;
  if (axis == "y") return qc::SpinAxis::y;
  if (axis == "z") return qc::SpinAxis::z;
  throw qc::ValidationError("axis must be x, y or z");
}

struct Chain {
  std::shared_ptr<const qc::SparseHamiltonian> h;
  qc::Propagator prop;
  qc::QuditState psi0;

  Chain(int n, double jz_over_jxy)
      : h(std::make_shared<const qc::SparseHamiltonian>(qc::build_xxz(n, 1.0, jz_over_jxy))),
        prop(qc::Propagator::automatic(h)),
        psi0(qc::neel_superposition(n)) {}
};

py::dict estimate_dict(const qc::CorrelatorEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["shots"] = e.shots;
  d["sampled"] = e.mode == qc::EstimateMode::sampled;
  return d;
}

py::object optional_float(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::none(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-time correlators of spin-1 chains via Hadamard tests and linear response";
  m.attr("__version__") = qc::kVersion;

  // Translators run newest first, so the base class goes first.
  py::register_exception<qc::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<qc::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<qc::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<qc::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def(
      "spin_matrix", [](double spin, const std::string& axis) { return qc::spin_matrix(spin, parse_axis(axis)).matrix(); },
      py::arg("spin"), py::arg("axis"));

  m.def(
      "decompose",
      [](const qc::Matrix& x) {
        const auto d = qc::decompose(qc::HermitianObservable(qc::LocalOperator(x, {0})));
        return py::make_tuple(d.norm, Matrix(d.w.matrix()));
      },
      py::arg("x"), "Returns (|X|, W) with X = |X| (W + W^dag) / 2.");

  m.def(
      "xxz_hamiltonian", [](int n, double jxy, double jz) { return qc::build_xxz(n, jxy, jz).dense(); }, py::arg("n_sites"),
      py::arg("j_xy") = 1.0, py::arg("j_z") = 0.5, "Dense matrix of the open XXZ chain (small chains only).");

  m.def(
      "correlator",
      [](int n_sites, int site_a, int site_b, double t1, double t2, std::uint64_t shots, std::uint64_t seed,
         double jz_over_jxy) {
        const Chain c(n_sites, jz_over_jxy);
        const qc::HermitianObservable a(qc::spin_matrix(1.0, qc::SpinAxis::z, site_a));
        const qc::HermitianObservable b(qc::spin_matrix(1.0, qc::SpinAxis::z, site_b));
        const auto budget = shots == 0 ? qc::Budget::exact() : qc::Budget::sampled(shots, {seed, 0});
        const auto pair = qc::measure_dynamical_correlator(a, b, t1, t2, c.psi0, c.prop, budget);
        py::dict d;
        d["plus"] = estimate_dict(pair.plus);
        d["minus"] = estimate_dict(pair.minus);
        return d;
      },
      py::arg("n_sites"), py::arg("site_a"), py::arg("site_b"), py::arg("t1"), py::arg("t2"), py::arg("shots") = 0,
      py::arg("seed") = 0, py::arg("jz_over_jxy") = 0.5,
      "Hadamard-test C+ and C- of Sz_a(t1), Sz_b(t2) on the Neel superposition (0-based sites; shots=0 is exact).");

  m.def(
      "linear_response",
      [](int n_sites, int probe_site, int readout_site, double t1, double t2, double lambda, bool hermitian,
         double pulse_area, std::uint64_t shots, std::uint64_t seed, double jz_over_jxy) {
        const Chain c(n_sites, jz_over_jxy);
        const qc::LinearResponseConfig config{lambda, pulse_area, probe_site, readout_site,
                                              hermitian ? qc::PerturbationKind::hermitian
                                                        : qc::PerturbationKind::non_hermitian};
        const auto budget = shots == 0 ? qc::LrBudget::exact() : qc::LrBudget::sampled(shots, {seed, 0});
        return estimate_dict(qc::measure_lr(config, t1, t2, c.psi0, c.h, qc::default_propagator_factory(), budget));
      },
      py::arg("n_sites"), py::arg("probe_site"), py::arg("readout_site"), py::arg("t1"), py::arg("t2"),
      py::arg("lam") = 0.2, py::arg("hermitian") = true, py::arg("pulse_area") = 1e-3, py::arg("shots") = 0,
      py::arg("seed") = 0, py::arg("jz_over_jxy") = 0.5);

  m.def("variance_model", &qc::variance_model, py::arg("p"), py::arg("norm_a") = 1.0, py::arg("norm_b") = 1.0);
  m.def("relative_error", [](const std::vector<double>& e, const std::vector<double>& r, const std::vector<double>& t) {
    return qc::relative_error(e, r, t);
  });
  m.def("time_averaged_std",
        [](const std::vector<double>& s, const std::vector<double>& t) { return qc::time_averaged_std(s, t); });

  m.def(
      "run_study",
      [](const std::string& config_json) {
        const auto parsed = qc::parse_config_text(config_json);
        qc::StudyResult result;
        {
          py::gil_scoped_release release;
          result = qc::run_quench_study(parsed.config.scenario(), parsed.config.study_options());
        }
        py::list records;
        for (const auto& r : result.records) {
          py::dict d;
          d["protocol"] = std::string(qc::to_string(r.protocol));
          d["kind"] = std::string(1, r.kind);
          d["t"] = r.t;
          d["lambda"] = optional_float(r.lambda);
          d["exact"] = r.exact;
          d["sampled"] = optional_float(r.sampled);
          d["std_error"] = r.std_error;
          d["shots"] = r.shots;
          d["seed"] = r.seed;
          records.append(d);
        }
        py::list summaries;
        for (const auto& s : result.summaries) {
          auto merit = [](const qc::FigureOfMerit& f) {
            py::dict d;
            d["r_plus"] = optional_float(f.r_plus);
            d["r_minus"] = optional_float(f.r_minus);
            d["dc_plus"] = optional_float(f.dc_plus);
            d["dc_minus"] = optional_float(f.dc_minus);
            return d;
          };
          py::dict d;
          d["protocol"] = std::string(qc::to_string(s.protocol));
          d["lambda"] = optional_float(s.lambda);
          d["exact"] = merit(s.exact);
          d["sampled"] = s.sampled ? py::object(merit(*s.sampled)) : py::none();
          summaries.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["summaries"] = summaries;
        out["csv"] = qc::format_results_csv(result.records);
        return out;
      },
      py::arg("config_json"), "Runs the quench study for a JSON config string; nothing is written to disk.");
}
