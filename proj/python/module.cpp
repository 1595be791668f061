#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smart/diagnostics.hpp"
#include "smart/initializers.hpp"
#include "smart/model_select.hpp"
#include "smart/simulation.hpp"
#include "smart/solver.hpp"

namespace py = pybind11;
using namespace smart;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral transfer learning for low-rank multi-task regression";

  py::class_<SvdTriple>(m, "SvdTriple")
      .def_readonly("U", &SvdTriple::U)
      .def_readonly("d", &SvdTriple::d)
      .def_readonly("V", &SvdTriple::V);
  m.def("svd", &svd, py::arg("A"));
  m.def("qr_orthonormalize", &qr_orthonormalize, py::arg("A"));
  m.def("complete_basis", &complete_basis, py::arg("U0"), py::arg("accept_tol") = 1e-8);
  m.def("soft_threshold", py::overload_cast<const Matrix&, double>(&soft_threshold),
        py::arg("A"), py::arg("kappa"));

  py::class_<SmartFactors>(m, "SmartFactors")
      .def_readonly("U", &SmartFactors::U)
      .def_readonly("D", &SmartFactors::D)
      .def_readonly("V", &SmartFactors::V)
      .def("coefficient", &SmartFactors::coefficient);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("rho0", &SolverConfig::rho0)
      .def_readwrite("gamma_rho", &SolverConfig::gamma_rho)
      .def_readwrite("t_max", &SolverConfig::t_max)
      .def_readwrite("eps", &SolverConfig::eps);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("factors", &FitReport::factors)
      .def_readonly("C_hat", &FitReport::C_hat)
      .def_readonly("primal_residual", &FitReport::primal_residual)
      .def_readonly("stationarity_residual", &FitReport::stationarity_residual)
      .def_readonly("iterations", &FitReport::iterations)
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("objective", &FitReport::objective);

  m.def("lasso_fit",
        [](const Matrix& X, const Matrix& Y, double lambda0) { return lasso_fit(X, Y, lambda0); },
        py::arg("X"), py::arg("Y"), py::arg("lambda0"));
  m.def("ridge_fit", &ridge_fit, py::arg("X"), py::arg("Y"), py::arg("lambda0"));
  m.def("ols_fit", &ols_fit, py::arg("X"), py::arg("Y"));
  m.def("warm_start", &warm_start, py::arg("C_init"), py::arg("r"));
  m.def("default_lasso_lambda", &default_lasso_lambda, py::arg("X"), py::arg("Y"));

  m.def(
      "smart_fit",
      [](const Matrix& X, const Matrix& Y, const Matrix& C0_tilde, int r, int r_u, int r_v,
         double lambda_u, double lambda_v, const SolverConfig& cfg) {
        SmartFactors init = warm_start(lasso_fit(X, Y, default_lasso_lambda(X, Y)), r);
        return smart_fit(X, Y, C0_tilde, r, r_u, r_v, lambda_u, lambda_v, init, cfg);
      },
      py::arg("X"), py::arg("Y"), py::arg("C0_tilde"), py::arg("r"), py::arg("r_u"),
      py::arg("r_v"), py::arg("lambda_u"), py::arg("lambda_v"),
      py::arg("config") = SolverConfig());

  m.def("select_rank", &select_rank, py::arg("X"), py::arg("Y"));
  m.def("norm_frob_error", &norm_frob_error, py::arg("C_hat"), py::arg("C_star"));
}
