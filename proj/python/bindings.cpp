// pybind11 bindings: problems, the Newton driver, the least-squares kernel,
// the closed-form oracles and the config/sweep runner.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "hjcell/config.hpp"
#include "hjcell/errors.hpp"
#include "hjcell/linsolve.hpp"
#include "hjcell/newton.hpp"
#include "hjcell/problems.hpp"
#include "hjcell/reference.hpp"
#include "hjcell/runner.hpp"

namespace py = pybind11;
using namespace hjcell;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array dense_jacobian(const Problem& p, const Array& x) {
  const SparseMatrix J = p.jacobian(to_vector(x));
  const std::vector<double> cm = J.to_dense();
  Array out({static_cast<py::ssize_t>(J.rows()), static_cast<py::ssize_t>(J.cols())});
  auto o = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < J.cols(); ++j)
    for (std::size_t i = 0; i < J.rows(); ++i) o(i, j) = cm[j * J.rows() + i];
  return out;
}

SparseMatrix from_numpy(const Array& a) {
  if (a.ndim() != 2) throw ContractError("expected a 2D array");
  const auto r = a.unchecked<2>();
  SparseMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j)
      if (r(i, j) != 0.0) m.add(i, j, r(i, j));
  m.compress();
  return m;
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["x"] = to_array(r.final_state);
  d["lam"] = r.lambda;
  d["iterations"] = r.iterations;
  d["residual_sq"] = r.final_residual_sq;
  d["step_sq"] = r.final_step_sq;
  d["converged"] = r.converged;
  d["regularizations"] = r.regularization_activations;
  d["guard_activations"] = r.guard_activations;
  d["seconds"] = r.wall_time_seconds;
  d["failure_reason"] = r.failure_reason;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hjcell, m) {
  m.doc() = "Ergodic Hamilton-Jacobi cell problems solved by generalized Newton";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  py::enum_<Boundary>(m, "Boundary").value("periodic", Boundary::Periodic).value("neumann", Boundary::Neumann);
  py::enum_<NonconvexScheme>(m, "NonconvexScheme")
      .value("lf", NonconvexScheme::LaxFriedrichs)
      .value("eo", NonconvexScheme::EngquistOsher);
  py::enum_<DislocationRegime>(m, "DislocationRegime")
      .value("local", DislocationRegime::Local)
      .value("convolution", DislocationRegime::Convolution)
      .value("full", DislocationRegime::FullKernel);
  py::enum_<MfgCoupling>(m, "MfgCoupling").value("quadratic", MfgCoupling::Quadratic).value("neglog", MfgCoupling::NegLog);
  py::enum_<StopRule>(m, "StopRule")
      .value("step", StopRule::StepNorm)
      .value("residual", StopRule::ResidualNorm)
      .value("either", StopRule::Either);

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int, Boundary>(), py::arg("dim"), py::arg("N"), py::arg("boundary") = Boundary::Periodic)
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("N", &Grid::nodes_per_dim)
      .def_property_readonly("h", &Grid::spacing)
      .def_property_readonly("size", &Grid::size);

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("n_unknowns", &Problem::n_unknowns)
      .def_property_readonly("n_equations", &Problem::n_equations)
      .def_property_readonly("lambda_slots", &Problem::lambda_slots)
      .def_property_readonly("field_names", &Problem::field_names)
      .def("initial_guess", [](const Problem& p) { return to_array(p.initial_guess()); })
      .def("residual", [](const Problem& p, const Array& x) { return to_array(p.residual(to_vector(x))); })
      .def("jacobian", &dense_jacobian, "dense copy of the Jacobian")
      .def("constant_shift_direction", [](const Problem& p) { return to_array(p.constant_shift_direction()); })
      .def("__repr__", &Problem::descriptor);

  auto pot = [](const std::string& name) { return potential_by_name(name); };

  m.def("eikonal", [pot](const Grid& g, const std::string& V, std::array<double, 2> p, double q) {
    return make_eikonal(g, pot(V), p, q);
  }, py::arg("grid"), py::arg("V") = "sin", py::arg("p") = std::array<double, 2>{0.0, 0.0}, py::arg("q") = 2.0);
  m.def("nonconvex", [pot](const Grid& g, const std::string& V, double p, NonconvexScheme s, double theta) {
    return make_nonconvex(g, pot(V), p, s, theta);
  }, py::arg("grid"), py::arg("V") = "sin", py::arg("p") = 0.0, py::arg("scheme") = NonconvexScheme::LaxFriedrichs,
        py::arg("theta") = 0.0);
  m.def("second_order", [pot](const Grid& g, const std::string& V, double p, double s, double alpha) {
    return make_second_order(g, pot(V), p, s, alpha);
  }, py::arg("grid"), py::arg("V") = "sin", py::arg("p") = 0.0, py::arg("s") = 0.0, py::arg("alpha") = 1.0);
  m.def("weakly_coupled", [pot](const Grid& g, const std::string& V1, const std::string& V2, const std::string& c1,
                                const std::string& c2, std::array<double, 2> p) {
    return make_weakly_coupled(g, pot(V1), pot(V2), pot(c1), pot(c2), p);
  }, py::arg("grid"), py::arg("V1") = "sin", py::arg("V2") = "cos", py::arg("c1") = "coupling_1",
        py::arg("c2") = "coupling_2", py::arg("p") = std::array<double, 2>{0.0, 0.0});
  m.def("dislocation", [pot](const Grid& g, const std::string& c0, double L, int P, int Q, DislocationRegime regime,
                             int truncation) {
    DislocationParams dp;
    dp.stress = L;
    dp.density_num = P;
    dp.density_den = Q;
    dp.regime = regime;
    dp.truncation = truncation;
    return make_dislocation(g, pot(c0), dp);
  }, py::arg("grid"), py::arg("c0") = "two_sin", py::arg("L") = 0.0, py::arg("P") = 0, py::arg("Q") = 10,
        py::arg("regime") = DislocationRegime::Local, py::arg("truncation") = 100);
  m.def("mfg", [pot](const Grid& g, double nu, const std::string& f, MfgCoupling c, double m_floor) {
    return make_mfg(g, nu, pot(f), c, m_floor);
  }, py::arg("grid"), py::arg("nu") = 1.0, py::arg("f") = "mfg_cost", py::arg("coupling") = MfgCoupling::Quadratic,
        py::arg("m_floor") = 1e-10);
  m.def("multipop_mfg", [](const Grid& g, double nu, std::vector<std::vector<double>> theta, int pieces) {
    const int P = static_cast<int>(theta.size());
    const MeshField guess = pieces > 0 ? piecewise_population_guess(g, P, pieces) : constant_population_guess(g, P);
    return make_multipop_mfg(g, nu, std::move(theta), guess);
  }, py::arg("grid"), py::arg("nu"), py::arg("theta"), py::arg("pieces") = 0,
        "pieces > 0 selects the piecewise-constant guess, 0 the constant one");

  py::class_<NewtonConfig>(m, "NewtonConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &NewtonConfig::epsilon)
      .def_readwrite("max_iterations", &NewtonConfig::max_iterations)
      .def_readwrite("damping_mu", &NewtonConfig::damping_mu)
      .def_readwrite("lm_tau", &NewtonConfig::lm_tau)
      .def_readwrite("stop_rule", &NewtonConfig::stop_rule)
      .def_property("line_search", [](const NewtonConfig& c) { return c.line_search.enabled; },
                    [](NewtonConfig& c, bool on) { c.line_search.enabled = on; });

  m.def("solve", [](const Problem& p, const NewtonConfig& cfg, std::optional<Array> x0) {
    cfg.validate();
    const std::vector<double> start = x0 ? to_vector(*x0) : p.initial_guess();
    SolveReport r;
    {
      py::gil_scoped_release release;
      r = newton_solve(p, start, cfg);
    }
    return report_dict(r);
  }, py::arg("problem"), py::arg("config") = NewtonConfig{}, py::arg("x0") = py::none());

  m.def("lstsq", [](const Array& J, const Array& F) {
    const LsqSolution s = qr_least_squares(from_numpy(J), to_vector(F));
    py::dict d;
    d["delta"] = to_array(s.delta);
    d["residual_norm"] = s.residual_norm;
    d["full_rank"] = s.rank == RankFlag::FullRank;
    return d;
  }, py::arg("J"), py::arg("F"), "minimum-norm solution of J delta = -F");

  m.def("exact_hbar_eikonal_1d", [pot](const std::string& V, double p) { return exact_hbar_eikonal_1d(pot(V), p); },
        py::arg("V"), py::arg("p"));
  m.def("exact_hbar_qpower_1d", [pot](const std::string& V, double p, double q) {
    return exact_hbar_qpower_1d(pot(V), p, q);
  }, py::arg("V"), py::arg("p"), py::arg("q"));
  m.def("exact_hbar_nonconvex_1d", [pot](const std::string& V, double p) { return exact_hbar_nonconvex_1d(pot(V), p); },
        py::arg("V"), py::arg("p"));
  m.def("plateau_edge", [pot](const std::string& V, double q) { return qpower_plateau_edge(pot(V), q); },
        py::arg("V"), py::arg("q") = 2.0);

  m.def("run_sweep_json", [](const std::string& text) {
    RunConfig cfg = parse_run_config(text);
    cfg.output_csv.clear();
    SweepResult res;
    {
      py::gil_scoped_release release;
      res = run_sweep(cfg);
    }
    std::ostringstream os;
    res.table.write_csv(os);
    return os.str();
  }, py::arg("config_json"), "runs a sweep described by a JSON config and returns the CSV text");
}
