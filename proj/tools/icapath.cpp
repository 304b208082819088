#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "icapath/diagnostics.hpp"
#include "icapath/errors.hpp"
#include "icapath/io.hpp"
#include "icapath/simulate.hpp"
#include "icapath/solver.hpp"
#include "icapath/tuning.hpp"

using namespace icapath;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitScale = 4;

struct ModelFlags {
  std::string family = "gaussian";
  double dispersion = 1.0;
  std::string penalty = "scad";
  std::optional<double> a;
  int nlambda = 100;
  double lambda_min_ratio = 0.01;
  double tol = 1e-8;
  int max_sweeps = 100;
  std::optional<int> sparsity_cap;
  bool no_standardize = false;
};

struct TuneFlags {
  std::string criterion = "bic";
  std::optional<double> sic_factor;
  int folds = 5;
  std::uint64_t seed = 1;
  int threads = 1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--family", f.family, "gaussian | logistic | poisson")
      ->check(CLI::IsMember({"gaussian", "logistic", "poisson"}, CLI::ignore_case));
  cmd->add_option("--dispersion", f.dispersion, "Gaussian noise variance");
  cmd->add_option("--penalty", f.penalty, "l1 | scad | mcp")
      ->check(CLI::IsMember({"l1", "lasso", "scad", "mcp"}, CLI::ignore_case));
  cmd->add_option("--a", f.a, "Shape parameter (SCAD default 3.7, MCP required)");
  cmd->add_option("--nlambda", f.nlambda, "Grid size")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda-min-ratio", f.lambda_min_ratio,
                  "Smallest lambda as a fraction of lambda_max");
  cmd->add_option("--tol", f.tol, "Max coefficient change per sweep at convergence");
  cmd->add_option("--max-sweeps", f.max_sweeps, "Sweep limit per lambda")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sparsity-cap", f.sparsity_cap, "Stop the path past this support size");
  cmd->add_flag("--no-standardize", f.no_standardize, "Fit on the columns as given");
}

void add_tune_flags(CLI::App* cmd, TuneFlags& t) {
  cmd->add_option("--criterion", t.criterion, "bic | sic | cv")
      ->check(CLI::IsMember({"bic", "sic", "cv"}, CLI::ignore_case));
  cmd->add_option("--sic-factor", t.sic_factor, "SIC model-size penalty (default log n)");
  cmd->add_option("--folds", t.folds, "Cross-validation folds");
  cmd->add_option("--seed", t.seed, "Random seed");
  cmd->add_option("--threads", t.threads, "Worker threads")->check(CLI::PositiveNumber);
}

FamilySpec make_family(const ModelFlags& f) {
  return FamilySpec(parse_family_kind(f.family), f.dispersion);
}

PenaltySpec make_penalty(const ModelFlags& f) {
  const PenaltyKind kind = parse_penalty_kind(f.penalty);
  if (kind == PenaltyKind::MCP && !f.a) throw DomainError("MCP requires --a");
  return PenaltySpec(kind, f.a.value_or(PenaltySpec::kDefaultScadA));
}

SolverConfig make_solver(const ModelFlags& f) {
  SolverConfig cfg;
  cfg.nlambda = f.nlambda;
  cfg.lambda_min_ratio = f.lambda_min_ratio;
  cfg.tol = f.tol;
  cfg.max_sweeps = f.max_sweeps;
  cfg.sparsity_cap = f.sparsity_cap;
  cfg.standardize = !f.no_standardize;
  return cfg;
}

std::string settings_text(const ModelFlags& f) {
  std::ostringstream s;
  s << std::setprecision(17) << "family=" << f.family << ";dispersion=" << f.dispersion
    << ";penalty=" << f.penalty << ";a=" << (f.a ? std::to_string(*f.a) : "default")
    << ";nlambda=" << f.nlambda << ";ratio=" << f.lambda_min_ratio << ";tol=" << f.tol
    << ";sweeps=" << f.max_sweeps
    << ";cap=" << (f.sparsity_cap ? std::to_string(*f.sparsity_cap) : "none")
    << ";standardize=" << !f.no_standardize;
  return s.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void warn_information_criterion(Eigen::Index n, Eigen::Index p, Criterion c) {
  if (c != Criterion::CV && p > n) {
    std::cerr << "warning: p = " << p << " exceeds n = " << n
              << "; information criteria are unreliable here, consider --criterion cv\n";
  }
}

int cmd_fit(const std::string& data_path, const std::string& out_path,
            const ModelFlags& f) {
  const FamilySpec fam = make_family(f);
  const PenaltySpec pen = make_penalty(f);
  const SolverConfig cfg = make_solver(f);
  const CsvTable table = read_csv_file(data_path);
  const PathResult path = ica_path(table.data, fam, pen, cfg);
  const RunManifest m = make_manifest("fit", settings_text(f), 0);
  emit(out_path, path_to_json(path, fam, pen, cfg, table.predictor_names, m).dump(2) + "\n");
  int nonconverged = 0;
  for (const auto& pt : path.points) nonconverged += pt.converged ? 0 : 1;
  if (nonconverged > 0) {
    std::cerr << "warning: " << nonconverged << " of " << path.points.size()
              << " path points reached the sweep limit without converging\n";
  }
  return 0;
}

int cmd_select(const std::string& path_file, const std::string& data_path,
               const std::string& out_path, const TuneFlags& t) {
  const StoredPath sp = path_from_json(load_json(path_file));
  const CsvTable table = read_csv_file(data_path);
  if (table.data.p() != sp.p()) throw DataError("data and path disagree on the number of predictors");
  const Criterion crit = parse_criterion(t.criterion);
  warn_information_criterion(table.data.n(), table.data.p(), crit);

  SelectionResult sel;
  if (crit == Criterion::CV) {
    SolverConfig cfg;
    cfg.lambda_grid = sp.lambdas;
    cfg.tol = sp.tol;
    cfg.max_sweeps = sp.max_sweeps;
    cfg.standardize = sp.standardized;
    sel = kfold_cv(table.data, sp.family, sp.penalty, cfg, t.folds, t.seed, t.threads);
  } else {
    PathResult pr;
    pr.lambdas = sp.lambdas;
    pr.column_scales = Vector::Ones(sp.p());
    for (std::size_t k = 0; k < sp.coefficients.size(); ++k) {
      PathPoint pt;
      pt.lambda = sp.lambdas[k];
      pt.coefficients = sp.coefficients[k].sparseView();
      pr.points.push_back(pt);
    }
    sel = select_lambda(pr, crit, table.data, sp.family, t.sic_factor);
  }
  json out;
  std::ostringstream settings;
  settings << "criterion=" << t.criterion << ";folds=" << t.folds << ";sic="
           << (t.sic_factor ? std::to_string(*t.sic_factor) : "default");
  out["manifest"] = to_json(make_manifest("select", settings.str(), t.seed));
  out["selection"] = to_json(sel);
  if (sel.chosen_index < sp.coefficients.size()) {
    json coef = json::object();
    const Vector& b = sp.coefficients[sel.chosen_index];
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (b[j] != 0.0) coef[std::to_string(j)] = b[j];
    }
    out["coefficients"] = coef;
  }
  emit(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_check(const std::string& path_file, const std::string& data_path,
              const std::string& out_path, std::optional<std::size_t> index) {
  const StoredPath sp = path_from_json(load_json(path_file));
  const CsvTable table = read_csv_file(data_path);
  if (table.data.p() != sp.p()) throw DataError("data and path disagree on the number of predictors");
  const Dataset fitted = sp.standardized ? standardize(table.data) : table.data;
  LocalMaxTolerances tol;
  tol.stationarity = 10.0 * sp.tol;

  json reports = json::array();
  bool all_pass = true;
  for (std::size_t k = 0; k < sp.coefficients.size(); ++k) {
    if (index && *index != k) continue;
    const Vector beta = sp.fitted_coefficients(k);
    const double lambda = sp.lambdas[k];
    const OptimalityReport r =
        check_local_max(fitted, sp.family, sp.penalty, lambda, beta, tol);
    json entry = {{"index", k}, {"converged", static_cast<bool>(sp.converged[k])}};
    entry["local"] = to_json(r);
    entry["global"] = to_json(check_global(fitted, sp.family, sp.penalty, lambda, beta));
    if (sp.penalty.kind() == PenaltyKind::L1) {
      entry["l1_kkt_violation"] = l1_kkt_violation(fitted, sp.family, lambda, beta);
    }
    if (sp.converged[k] && !r.passes_nonstrict) all_pass = false;
    reports.push_back(entry);
  }
  if (index && reports.empty()) throw DataError("index out of range");
  json out;
  std::ostringstream settings;
  settings << std::setprecision(17) << "stationarity=" << tol.stationarity
           << ";strictness=" << tol.strictness;
  out["manifest"] = to_json(make_manifest("check", settings.str(), 0));
  out["tolerances"] = {{"stationarity", tol.stationarity}, {"strictness", tol.strictness}};
  out["all_converged_pass_nonstrict"] = all_pass;
  out["reports"] = reports;
  emit(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& study,
                 std::optional<int> replicates, std::optional<int> threads,
                 const std::string& csv_out, const std::string& json_out) {
  SimConfig cfg;
  std::string settings;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    settings = buf.str();
    std::istringstream again(settings);
    cfg = parse_sim_config(again);
  } else if (study == "poisson") {
    cfg = poisson_study_config();
    settings = "study=poisson";
  } else {
    cfg = logistic_study_config();
    settings = "study=logistic";
  }
  if (replicates) cfg.replicates = *replicates;
  if (threads) cfg.threads = *threads;
  settings += ";replicates=" + std::to_string(cfg.replicates);
  cfg.validate();
  warn_information_criterion(cfg.n, cfg.p, cfg.selection);

  const ExperimentResult res = run_experiment(cfg);
  std::ostringstream table;
  write_experiment_csv(table, res);
  emit(csv_out, table.str());
  if (!json_out.empty()) {
    json out = to_json(res);
    out["manifest"] = to_json(make_manifest("simulate", settings, cfg.seed));
    emit(json_out, out.dump(2) + "\n");
  }
  for (const auto& m : res.methods) {
    if (m.failures > 0) {
      std::cerr << "warning: " << m.method << ": " << m.failures
                << " replicate(s) failed and were excluded\n";
    }
  }
  return 0;
}

int cmd_plotdata(const std::string& path_file, const std::string& out_path) {
  const StoredPath sp = path_from_json(load_json(path_file));
  std::ostringstream out;
  write_plot_csv(out, sp);
  emit(out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized likelihood paths for generalized linear models"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  ModelFlags model;
  TuneFlags tune;
  std::string data_path;
  std::string path_file;
  std::string out_path;

  auto* fit = app.add_subcommand("fit", "Fit a regularization path to CSV data");
  fit->add_option("data", data_path, "CSV with header and response column y")->required();
  fit->add_option("-o,--out", out_path, "Path JSON output (default stdout)");
  add_model_flags(fit, model);

  auto* select = app.add_subcommand("select", "Choose lambda along a fitted path");
  select->add_option("path", path_file, "Path JSON from fit")->required();
  select->add_option("data", data_path, "CSV the path was fitted on")->required();
  select->add_option("-o,--out", out_path, "Selection JSON output");
  add_tune_flags(select, tune);

  std::optional<std::size_t> index;
  auto* check = app.add_subcommand("check", "Local and global optimality diagnostics");
  check->add_option("path", path_file, "Path JSON from fit")->required();
  check->add_option("data", data_path, "CSV the path was fitted on")->required();
  check->add_option("--index", index, "Check only this path point");
  check->add_option("-o,--out", out_path, "Report JSON output");

  std::string config_path;
  std::string study = "logistic";
  std::optional<int> replicates;
  std::optional<int> sim_threads;
  std::string csv_out;
  std::string json_out;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation study");
  simulate->add_option("--config", config_path, "key = value configuration file");
  simulate->add_option("--study", study, "Built-in study when no config is given")
      ->check(CLI::IsMember({"logistic", "poisson"}));
  simulate->add_option("--replicates", replicates, "Override the replicate count");
  simulate->add_option("--threads", sim_threads, "Override the worker count");
  simulate->add_option("--out-csv", csv_out, "Summary table CSV (default stdout)");
  simulate->add_option("--out-json", json_out, "Full results JSON");

  auto* plot = app.add_subcommand("plotdata", "Coefficient trajectories as CSV");
  plot->add_option("path", path_file, "Path JSON from fit")->required();
  plot->add_option("-o,--out", out_path, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(data_path, out_path, model);
    if (*select) return cmd_select(path_file, data_path, out_path, tune);
    if (*check) return cmd_check(path_file, data_path, out_path, index);
    if (*simulate) {
      return cmd_simulate(config_path, study, replicates, sim_threads, csv_out, json_out);
    }
    if (*plot) return cmd_plotdata(path_file, out_path);
  } catch (const ScaleRefusal& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitScale;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
