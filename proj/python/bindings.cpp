#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "icapath/diagnostics.hpp"
#include "icapath/errors.hpp"
#include "icapath/io.hpp"
#include "icapath/penalty.hpp"
#include "icapath/simulate.hpp"
#include "icapath/solver.hpp"
#include "icapath/tuning.hpp"

namespace py = pybind11;
using namespace icapath;

namespace {

Matrix path_coefficients(const PathResult& path) {
  Matrix out(static_cast<Eigen::Index>(path.points.size()), path.p());
  for (std::size_t k = 0; k < path.points.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = path.coefficients(k).transpose();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Penalized GLM solution paths by iterative coordinate ascent";
  m.attr("__version__") = version_string();

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<ScaleRefusal>(m, "ScaleRefusal", PyExc_RuntimeError);

  py::class_<PenaltySpec>(m, "PenaltySpec")
      .def_static("l1", &PenaltySpec::l1)
      .def_static("scad", &PenaltySpec::scad, py::arg("a") = PenaltySpec::kDefaultScadA)
      .def_static("mcp", &PenaltySpec::mcp, py::arg("a"))
      .def_property_readonly("name", &PenaltySpec::name)
      .def_property_readonly("a", &PenaltySpec::a)
      .def("__eq__", [](const PenaltySpec& a, const PenaltySpec& b) { return a == b; })
      .def("__repr__", [](const PenaltySpec& s) {
        return "PenaltySpec(" + s.name() + ", a=" + std::to_string(s.a()) + ")";
      });

  m.def("penalty_value", &penalty_value, py::arg("spec"), py::arg("t"), py::arg("lam"));
  m.def("penalty_deriv", &penalty_deriv, py::arg("spec"), py::arg("t"), py::arg("lam"));
  m.def("max_concavity", &max_concavity, py::arg("spec"), py::arg("lam"));
  m.def("local_concavity",
        [](const PenaltySpec& s, const std::vector<double>& v, double lam) {
          return local_concavity(s, v, lam);
        },
        py::arg("spec"), py::arg("v"), py::arg("lam"));
  m.def("prox",
        [](const PenaltySpec& s, double z, double lam, double cap) {
          return prox_univariate(s, {z, lam, cap});
        },
        py::arg("spec"), py::arg("z"), py::arg("lam"), py::arg("curvature_weight"));
  m.def("prox_objective",
        [](const PenaltySpec& s, double z, double lam, double cap, double beta) {
          return prox_objective(s, {z, lam, cap}, beta);
        },
        py::arg("spec"), py::arg("z"), py::arg("lam"), py::arg("curvature_weight"),
        py::arg("beta"));

  py::class_<FamilySpec>(m, "FamilySpec")
      .def_static("gaussian", &FamilySpec::gaussian, py::arg("sigma2") = 1.0)
      .def_static("logistic", &FamilySpec::logistic)
      .def_static("poisson", &FamilySpec::poisson)
      .def_property_readonly("name", &FamilySpec::name)
      .def_property_readonly("dispersion", &FamilySpec::dispersion)
      .def("__repr__", [](const FamilySpec& f) { return "FamilySpec(" + f.name() + ")"; });

  m.def("log_likelihood", &log_likelihood, py::arg("family"), py::arg("y"), py::arg("x"),
        py::arg("beta"));
  m.def("score", &score, py::arg("family"), py::arg("y"), py::arg("x"), py::arg("beta"));
  m.def("fisher_information", &fisher_information, py::arg("family"), py::arg("x"),
        py::arg("beta"));
  m.def("deviance", &deviance, py::arg("family"), py::arg("y"), py::arg("x"), py::arg("beta"));

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<Matrix, Vector>(), py::arg("x"), py::arg("y"))
      .def_readonly("x", &Dataset::x)
      .def_readonly("y", &Dataset::y)
      .def_readonly("column_scales", &Dataset::column_scales)
      .def_readonly("standardized", &Dataset::standardized)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p);
  m.def("standardize", &standardize, py::arg("data"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("lambda_grid", &SolverConfig::lambda_grid)
      .def_readwrite("nlambda", &SolverConfig::nlambda)
      .def_readwrite("lambda_min_ratio", &SolverConfig::lambda_min_ratio)
      .def_readwrite("max_sweeps", &SolverConfig::max_sweeps)
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("sparsity_cap", &SolverConfig::sparsity_cap)
      .def_readwrite("standardize", &SolverConfig::standardize);

  py::class_<PathPoint>(m, "PathPoint")
      .def_readonly("lam", &PathPoint::lambda)
      .def_property_readonly("coefficients",
                             [](const PathPoint& p) { return Vector(p.coefficients); })
      .def_readonly("loglik", &PathPoint::loglik)
      .def_readonly("penalized_objective", &PathPoint::penalized_objective)
      .def_readonly("deviance", &PathPoint::deviance)
      .def_readonly("support_size", &PathPoint::support_size)
      .def_readonly("sweeps_used", &PathPoint::sweeps_used)
      .def_readonly("converged", &PathPoint::converged)
      .def_readonly("ascent_violations", &PathPoint::ascent_violations);

  py::class_<PathResult>(m, "PathResult")
      .def_readonly("lambdas", &PathResult::lambdas)
      .def_readonly("points", &PathResult::points)
      .def_readonly("column_scales", &PathResult::column_scales)
      .def_readonly("standardized", &PathResult::standardized)
      .def_readonly("stopped_early", &PathResult::stopped_early)
      .def_property_readonly("coefficients", &path_coefficients)
      .def("fitted_coefficients", &PathResult::fitted_coefficients, py::arg("k"))
      .def("total_ascent_violations", &PathResult::total_ascent_violations)
      .def("__len__", [](const PathResult& p) { return p.points.size(); });

  m.def("lambda_max", &lambda_max_proxy, py::arg("data"), py::arg("family"));
  m.def("ica_path", &ica_path, py::arg("data"), py::arg("family"), py::arg("penalty"),
        py::arg("config") = SolverConfig{}, py::call_guard<py::gil_scoped_release>());
  m.def("penalized_objective", &penalized_objective, py::arg("data"), py::arg("family"),
        py::arg("penalty"), py::arg("lam"), py::arg("beta"));

  py::class_<OptimalityReport>(m, "OptimalityReport")
      .def_readonly("lam", &OptimalityReport::lambda)
      .def_readonly("support_size", &OptimalityReport::support_size)
      .def_readonly("stationarity_residual", &OptimalityReport::stationarity_residual)
      .def_readonly("z_inf", &OptimalityReport::z_inf)
      .def_readonly("z_bound", &OptimalityReport::z_bound)
      .def_readonly("eigen_margin", &OptimalityReport::eigen_margin)
      .def_readonly("coordinatewise_margin", &OptimalityReport::coordinatewise_margin)
      .def_readonly("passes_strict", &OptimalityReport::passes_strict)
      .def_readonly("passes_nonstrict", &OptimalityReport::passes_nonstrict);

  m.def(
      "check_local_max",
      [](const Dataset& d, const FamilySpec& f, const PenaltySpec& p, double lam,
         const Vector& beta, double stationarity, double strictness) {
        return check_local_max(d, f, p, lam, beta, {stationarity, strictness});
      },
      py::arg("data"), py::arg("family"), py::arg("penalty"), py::arg("lam"), py::arg("beta"),
      py::arg("stationarity_tol") = LocalMaxTolerances{}.stationarity,
      py::arg("strictness_tol") = LocalMaxTolerances{}.strictness);
  m.def("l1_kkt_violation", &l1_kkt_violation, py::arg("data"), py::arg("family"),
        py::arg("lam"), py::arg("beta"));

  py::class_<GlobalCheckReport>(m, "GlobalCheckReport")
      .def_readonly("kappa", &GlobalCheckReport::kappa)
      .def_readonly("min_eigenvalue", &GlobalCheckReport::min_eigenvalue)
      .def_readonly("pointwise_convexity_margin", &GlobalCheckReport::pointwise_convexity_margin)
      .def_readonly("exact", &GlobalCheckReport::exact)
      .def_readonly("rank_deficient", &GlobalCheckReport::rank_deficient)
      .def_readonly("margin_holds", &GlobalCheckReport::margin_holds)
      .def_readonly("c0", &GlobalCheckReport::c0)
      .def_readonly("scad_robustness_threshold", &GlobalCheckReport::scad_robustness_threshold)
      .def_readonly("min_abs_coef", &GlobalCheckReport::min_abs_coef)
      .def_readonly("robustness_passes", &GlobalCheckReport::robustness_passes);
  m.def("check_global", &check_global, py::arg("data"), py::arg("family"), py::arg("penalty"),
        py::arg("lam"), py::arg("beta"));

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("chosen_index", &SelectionResult::chosen_index)
      .def_readonly("chosen_lambda", &SelectionResult::chosen_lambda)
      .def_readonly("scores", &SelectionResult::scores)
      .def_readonly("size_penalty", &SelectionResult::size_penalty)
      .def_property_readonly("criterion",
                             [](const SelectionResult& s) { return criterion_name(s.criterion); });

  m.def("bic_score", &bic_score, py::arg("data"), py::arg("family"), py::arg("beta"));
  m.def("sic_score", &sic_score, py::arg("data"), py::arg("family"), py::arg("beta"),
        py::arg("factor") = std::nullopt);
  m.def(
      "select_lambda",
      [](const PathResult& path, const std::string& criterion, const Dataset& d,
         const FamilySpec& f, std::optional<double> factor) {
        return select_lambda(path, parse_criterion(criterion), d, f, factor);
      },
      py::arg("path"), py::arg("criterion"), py::arg("data"), py::arg("family"),
      py::arg("sic_factor") = std::nullopt);
  m.def("kfold_cv", &kfold_cv, py::arg("data"), py::arg("family"), py::arg("penalty"),
        py::arg("config") = SolverConfig{}, py::arg("folds") = 5, py::arg("seed") = 1,
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<SimConfig>(m, "SimConfig")
      .def_readwrite("n", &SimConfig::n)
      .def_readwrite("p", &SimConfig::p)
      .def_readwrite("family", &SimConfig::family)
      .def_readwrite("beta_true", &SimConfig::beta_true)
      .def_readwrite("ar_rho", &SimConfig::ar_rho)
      .def_readwrite("replicates", &SimConfig::replicates)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("methods", &SimConfig::methods)
      .def_readwrite("include_oracle", &SimConfig::include_oracle)
      .def_property(
          "selection", [](const SimConfig& c) { return criterion_name(c.selection); },
          [](SimConfig& c, const std::string& s) { c.selection = parse_criterion(s); })
      .def_readwrite("sic_factor", &SimConfig::sic_factor)
      .def_readwrite("cv_folds", &SimConfig::cv_folds)
      .def_readwrite("test_size", &SimConfig::test_size)
      .def_readwrite("solver", &SimConfig::solver)
      .def_readwrite("threads", &SimConfig::threads)
      .def_readwrite("check_optimality", &SimConfig::check_optimality)
      .def("validate", &SimConfig::validate);
  m.def("logistic_study_config", &logistic_study_config, py::arg("p") = 25);
  m.def("poisson_study_config", &poisson_study_config, py::arg("p") = 25);
  m.def(
      "run_experiment_json",
      [](const SimConfig& c) {
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        return to_json(r).dump();
      },
      py::arg("config"));
}
