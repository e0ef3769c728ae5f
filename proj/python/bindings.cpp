#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ngl/bounds.hpp"
#include "ngl/drivers.hpp"
#include "ngl/harness/config.hpp"
#include "ngl/harness/experiment.hpp"
#include "ngl/numkit.hpp"
#include "ngl/oracles.hpp"
#include "ngl/problems.hpp"
#include "ngl/solvers.hpp"

namespace py = pybind11;
using namespace ngl;

namespace {

py::dict trace_to_dict(const RunTrace& t) {
  std::vector<std::int64_t> k;
  std::vector<double> gap, grad, noisy;
  std::vector<std::int64_t> inner;
  for (const auto& r : t.rows) {
    k.push_back(r.k);
    gap.push_back(r.f_gap);
    grad.push_back(r.grad_norm);
    noisy.push_back(r.noisy_grad_norm);
    inner.push_back(r.inner_loops);
  }
  py::dict d;
  d["k"] = k;
  d["f_gap"] = gap;
  d["grad_norm"] = grad;
  d["noisy_grad_norm"] = noisy;
  d["inner_loops"] = inner;
  d["reason"] = to_string(t.reason);
  d["final_point"] = t.final_point;
  d["final_f_gap"] = t.final_f_gap;
  d["iterations"] = t.iterations;
  d["inner_loop_total"] = t.inner_loop_total;
  d["hypothesis_warning"] = t.hypothesis_warning;
  d["warning"] = t.warning;
  d["stage_ends"] = t.stage_ends;
  return d;
}

EnvelopeConstants constants_from(const py::dict& d) {
  EnvelopeConstants c;
  for (const auto& item : d) {
    const auto key = item.first.cast<std::string>();
    const auto v = item.second.cast<double>();
    if (key == "mu") c.mu = v;
    else if (key == "L") c.L = v;
    else if (key == "alpha") c.alpha = v;
    else if (key == "delta") c.delta = v;
    else if (key == "f0_gap") c.f0_gap = v;
    else if (key == "R") c.R = v;
    else if (key == "L0") c.L0 = v;
    else if (key == "K") c.K = v;
    else if (key == "beta") c.beta = v;
    else if (key == "tau") c.tau = v;
    else if (key == "A0") c.A0 = v;
    else if (key == "C0") c.C0 = v;
    else if (key == "gamma") c.gamma = v;
    else throw InvalidInput("unknown constant '" + key + "'");
  }
  return c;
}

RunOptions options(std::optional<Vector> x0, std::int64_t stride) {
  RunOptions o;
  o.x0 = std::move(x0);
  o.record_stride = stride;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimization with inexact gradients";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<HypothesisViolation>(m, "HypothesisViolation", PyExc_ValueError);

  m.def("kahan_sum", [](const std::vector<double>& v) { return kahan_sum(v); });
  m.def("round_to_precision", [](double x, int p) { return round_to_precision(x, PrecisionSpec(p)); });

  py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
      .def_property_readonly("dim", &Problem::dim)
      .def_property_readonly("mu", &Problem::mu)
      .def_property_readonly("L", &Problem::L)
      .def_property_readonly("f_star", &Problem::f_star)
      .def_property_readonly("x_star", &Problem::x_star)
      .def_property_readonly("name", &Problem::name)
      .def("value", &Problem::value)
      .def("gradient", &Problem::gradient)
      .def("gap", &Problem::gap);

  auto cast_problem = [](ProblemPtr p) { return std::const_pointer_cast<Problem>(p); };
  m.def("nesterov_convex", [=](int k, double L, int n) { return cast_problem(nesterov_convex(k, L, n)); },
        py::arg("k"), py::arg("L"), py::arg("n"));
  m.def("nesterov_strongly_convex",
        [=](double mu, double L, int n) { return cast_problem(nesterov_strongly_convex(mu, L, n)); },
        py::arg("mu"), py::arg("L"), py::arg("n"));
  m.def("quadratic",
        [=](const Matrix& A, const Vector& b) { return cast_problem(quadratic(A, b)); },
        py::arg("A"), py::arg("b"));

  py::class_<GradientOracle, std::shared_ptr<GradientOracle>>(m, "GradientOracle")
      .def_property_readonly("alpha", &GradientOracle::declared_alpha)
      .def_property_readonly("delta", &GradientOracle::declared_delta)
      .def_property_readonly("kind", &GradientOracle::kind)
      .def("estimate", &GradientOracle::estimate, py::arg("x"), py::arg("query") = 0);

  m.def(
      "noisy_oracle",
      [](std::shared_ptr<Problem> p, double alpha, double delta, const std::string& mode,
         std::uint64_t seed) -> std::shared_ptr<GradientOracle> {
        return std::make_shared<NoisyOracle>(p, NoiseSpec{alpha, delta, parse_noise_mode(mode), seed});
      },
      py::arg("problem"), py::arg("alpha") = 0.0, py::arg("delta") = 0.0,
      py::arg("mode") = "sampled", py::arg("seed") = 0);
  m.def(
      "compressed_oracle",
      [](std::shared_ptr<Problem> p, const std::string& kind, int param) -> std::shared_ptr<GradientOracle> {
        return std::make_shared<CompressedOracle>(p, parse_compressor(kind), param);
      },
      py::arg("problem"), py::arg("kind"), py::arg("param") = 0);

  m.def("top_k_compress", &top_k_compress);
  m.def("sign_compress", &sign_compress);
  m.def("sparsify_grid", &sparsify_grid);

  m.def(
      "gd_run",
      [](std::shared_ptr<GradientOracle> o, std::int64_t steps, double alpha,
         std::optional<Vector> x0, std::int64_t stride) {
        return trace_to_dict(gd_run(*o, GDConfig{steps, alpha, o->problem().L()}, options(x0, stride)));
      },
      py::arg("oracle"), py::arg("steps"), py::arg("alpha") = 0.0, py::arg("x0") = py::none(),
      py::arg("record_stride") = 1);
  m.def(
      "re_agm_run",
      [](std::shared_ptr<GradientOracle> o, std::int64_t steps, double alpha,
         std::optional<Vector> x0, std::int64_t stride) {
        const Problem& p = o->problem();
        return trace_to_dict(
            re_agm_run(*o, ReAgmConfig{steps, p.mu(), p.L(), alpha}, options(x0, stride)));
      },
      py::arg("oracle"), py::arg("steps"), py::arg("alpha") = 0.0, py::arg("x0") = py::none(),
      py::arg("record_stride") = 1);
  m.def(
      "adaptive_gd_run",
      [](std::shared_ptr<GradientOracle> o, std::int64_t steps, double L0, double delta,
         bool adapt_L, std::optional<Vector> x0) {
        return trace_to_dict(
            adaptive_gd_run(*o, AdaptiveGDConfig{steps, L0, delta, adapt_L}, options(x0, 1)));
      },
      py::arg("oracle"), py::arg("steps"), py::arg("L0"), py::arg("delta") = 0.0,
      py::arg("adapt_L") = false, py::arg("x0") = py::none());
  m.def(
      "solve_convex_gd",
      [](std::shared_ptr<GradientOracle> o, double eps, double R) {
        return trace_to_dict(solve_convex_gd(o, eps, R));
      },
      py::arg("oracle"), py::arg("epsilon"), py::arg("R"));

  py::class_<ReAgmParameters>(m, "ReAgmParameters")
      .def_readonly("h", &ReAgmParameters::h)
      .def_readonly("L_hat", &ReAgmParameters::L_hat)
      .def_readonly("gamma_star", &ReAgmParameters::gamma_star)
      .def_readonly("s", &ReAgmParameters::s)
      .def_readonly("m", &ReAgmParameters::m)
      .def_readonly("q", &ReAgmParameters::q)
      .def_readonly("omega", &ReAgmParameters::omega);
  m.def("re_agm_calculate_parameters", &re_agm_calculate_parameters, py::arg("mu"), py::arg("L"),
        py::arg("alpha"));
  m.def("gd_step_size", &gd_step_size, py::arg("alpha"), py::arg("L"));
  m.def("gamma_star", &gamma_star, py::arg("mu"), py::arg("L"), py::arg("alpha"));
  m.def("stopping_level", &stopping_level, py::arg("mu"), py::arg("alpha"), py::arg("delta"),
        py::arg("K"));

  py::class_<Envelope>(m, "Envelope")
      .def_property_readonly("theorem", [](const Envelope& e) { return to_string(e.id()); })
      .def_property_readonly("prefactor", &Envelope::prefactor)
      .def_property_readonly("rate", &Envelope::rate)
      .def_property_readonly("floor", &Envelope::floor)
      .def("__call__", &Envelope::value)
      .def("steps_to_reach", &Envelope::steps_to_reach);
  m.def(
      "envelope",
      [](const std::string& id, const py::dict& c) { return envelope(parse_theorem(id), constants_from(c)); },
      py::arg("theorem"), py::arg("constants"));
  m.def(
      "iteration_budget",
      [](const std::string& id, const py::dict& c, double eps) {
        return iteration_budget(parse_theorem(id), constants_from(c), eps);
      },
      py::arg("theorem"), py::arg("constants"), py::arg("epsilon"));

  m.def(
      "run_config_text",
      [](const std::string& text) {
        const auto cfg = harness::experiment_from(harness::parse_config_text(text));
        const auto res = harness::run_experiment(cfg);
        py::dict d = trace_to_dict(res.trace);
        d["bound"] = res.bounds;
        d["envelope_violations"] = res.summary.envelope_violations;
        return d;
      },
      py::arg("text"), "Runs an experiment from config text without writing files.");
}
