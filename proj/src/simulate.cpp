#include "icapath/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "icapath/diagnostics.hpp"
#include "icapath/errors.hpp"
#include "icapath/parallel.hpp"

namespace icapath {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "': '" + v + "' is not a number");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "': '" + v + "' is not an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw DataError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string method_label(const PenaltySpec& pen) {
  return pen.kind() == PenaltyKind::L1 ? "lasso" : pen.name();
}

std::mt19937_64 replicate_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

struct MethodRun {
  bool ok = false;
  SimMetrics metrics;
  long path_points = 0;
  long nonconverged = 0;
  long ascent = 0;
  long cv_ascent = 0;
  long local_checked = 0;
  long local_failed = 0;
  long kappa_only = 0;
  long kappa_only_coordinatewise_ok = 0;
  double worst_stationarity = 0.0;
  long kkt_checked = 0;
  long kkt_failed = 0;
  double worst_kkt = 0.0;
};

constexpr double kL1KktTolerance = 1e-6;

}  // namespace

void SimConfig::validate() const {
  if (n < 2 || p < 1) throw DataError("simulation needs n >= 2 and p >= 1");
  if (beta_true.size() != p) {
    throw DataError("beta_true has " + std::to_string(beta_true.size()) +
                    " entries but p = " + std::to_string(p));
  }
  if (!(std::abs(ar_rho) < 1.0)) throw DomainError("ar_rho must lie in (-1, 1)");
  if (replicates < 1) throw DataError("replicates must be >= 1");
  if (test_size < 1) throw DataError("test_size must be >= 1");
  if (methods.empty() && !include_oracle) {
    throw DataError("simulation needs at least one method");
  }
  if (selection == Criterion::CV && (cv_folds < 2 || cv_folds > n)) {
    throw DataError("cv folds must lie in [2, n]");
  }
}

SimConfig logistic_study_config(int p) {
  SimConfig cfg;
  cfg.n = 200;
  cfg.p = p;
  cfg.family = FamilySpec::logistic();
  cfg.beta_true = Vector::Zero(p);
  cfg.beta_true.head(5) << 2.5, -1.9, 2.8, -2.2, 3.0;
  cfg.ar_rho = 0.5;
  cfg.methods = {PenaltySpec::l1(), PenaltySpec::scad(3.7),
                 PenaltySpec::mcp(3.7)};
  return cfg;
}

SimConfig poisson_study_config(int p) {
  SimConfig cfg = logistic_study_config(p);
  cfg.family = FamilySpec::poisson();
  cfg.beta_true.head(5) << 1.25, -0.95, 0.9, -1.1, 0.6;
  return cfg;
}

SimConfig parse_sim_config(std::istream& in) {
  SimConfig cfg;
  cfg.methods.clear();
  std::vector<std::string> method_names = {"l1", "scad", "mcp"};
  std::vector<double> beta_head;
  std::string family = "logistic";
  double dispersion = 1.0;
  double scad_a = PenaltySpec::kDefaultScadA;
  double mcp_a = PenaltySpec::kDefaultScadA;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "n") {
      cfg.n = static_cast<int>(parse_int(key, value));
    } else if (key == "p") {
      cfg.p = static_cast<int>(parse_int(key, value));
    } else if (key == "family") {
      family = value;
    } else if (key == "dispersion") {
      dispersion = parse_double(key, value);
    } else if (key == "beta_true") {
      beta_head.clear();
      for (const auto& item : split_list(value)) {
        beta_head.push_back(parse_double(key, item));
      }
    } else if (key == "ar_rho") {
      cfg.ar_rho = parse_double(key, value);
    } else if (key == "replicates") {
      cfg.replicates = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "methods") {
      method_names = split_list(value);
    } else if (key == "scad_a" || key == "a") {
      scad_a = parse_double(key, value);
    } else if (key == "mcp_a") {
      mcp_a = parse_double(key, value);
    } else if (key == "oracle") {
      cfg.include_oracle = parse_bool(key, value);
    } else if (key == "criterion") {
      cfg.selection = parse_criterion(value);
    } else if (key == "sic_factor") {
      cfg.sic_factor = parse_double(key, value);
    } else if (key == "folds") {
      cfg.cv_folds = static_cast<int>(parse_int(key, value));
    } else if (key == "test_size") {
      cfg.test_size = static_cast<int>(parse_int(key, value));
    } else if (key == "nlambda") {
      cfg.solver.nlambda = static_cast<int>(parse_int(key, value));
    } else if (key == "lambda_min_ratio") {
      cfg.solver.lambda_min_ratio = parse_double(key, value);
    } else if (key == "tol") {
      cfg.solver.tol = parse_double(key, value);
    } else if (key == "max_sweeps") {
      cfg.solver.max_sweeps = static_cast<int>(parse_int(key, value));
    } else if (key == "sparsity_cap") {
      cfg.solver.sparsity_cap = static_cast<int>(parse_int(key, value));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(key, value));
    } else if (key == "check_optimality") {
      cfg.check_optimality = parse_bool(key, value);
    } else {
      throw DataError("config line " + std::to_string(line_no) +
                      ": unknown key '" + key + "'");
    }
  }

  cfg.family = FamilySpec(parse_family_kind(family), dispersion);
  if (static_cast<int>(beta_head.size()) > cfg.p) {
    throw DataError("beta_true lists more entries than p");
  }
  cfg.beta_true = Vector::Zero(cfg.p);
  for (std::size_t j = 0; j < beta_head.size(); ++j) {
    cfg.beta_true[static_cast<Eigen::Index>(j)] = beta_head[j];
  }
  for (const auto& name : method_names) {
    if (name == "oracle") {
      cfg.include_oracle = true;
      continue;
    }
    switch (parse_penalty_kind(name)) {
      case PenaltyKind::L1:
        cfg.methods.push_back(PenaltySpec::l1());
        break;
      case PenaltyKind::SCAD:
        cfg.methods.push_back(PenaltySpec::scad(scad_a));
        break;
      case PenaltyKind::MCP:
        cfg.methods.push_back(PenaltySpec::mcp(mcp_a));
        break;
    }
  }
  cfg.validate();
  return cfg;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t r) {
  std::uint64_t z = master + (r + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix gen_design_raw(int n, int p, double ar_rho, std::mt19937_64& rng) {
  if (!(std::abs(ar_rho) < 1.0)) throw DomainError("ar_rho must lie in (-1, 1)");
  if (n < 1 || p < 1) throw DataError("design needs n >= 1 and p >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - ar_rho * ar_rho);
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    double prev = normal(rng);
    x(i, 0) = prev;
    for (int j = 1; j < p; ++j) {
      prev = ar_rho * prev + innovation * normal(rng);
      x(i, j) = prev;
    }
  }
  return x;
}

Dataset gen_design(int n, int p, double ar_rho, std::mt19937_64& rng) {
  return standardize(Dataset(gen_design_raw(n, p, ar_rho, rng), Vector::Zero(n)));
}

double prediction_error(const FamilySpec& fam, const Vector& beta_hat,
                        const Vector& beta_true, double ar_rho, int test_size,
                        std::mt19937_64& rng) {
  if (test_size < 1) throw DataError("test_size must be >= 1");
  if (beta_hat.size() != beta_true.size()) {
    throw DataError("beta_hat and beta_true lengths differ");
  }
  const Matrix x = gen_design_raw(test_size, static_cast<int>(beta_true.size()),
                                  ar_rho, rng);
  const Vector y = sample_response(fam, x * beta_true, rng);
  const Vector fitted = x * beta_hat;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (fam.kind() == FamilyKind::Poisson &&
        std::abs(fitted[i]) > kPoissonThetaGuard) {
      throw DataError("fitted poisson rate exceeds the overflow guard");
    }
    const double r = y[i] - mean(fam, fitted[i]);
    acc += r * r;
  }
  return acc / static_cast<double>(test_size);
}

double half_min_signal(const Vector& beta_true) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
    if (beta_true[j] != 0.0) m = std::min(m, std::abs(beta_true[j]));
  }
  return std::isfinite(m) ? 0.5 * m : 0.0;
}

SimMetrics evaluate_fit(const Vector& beta_hat, const Vector& beta_true,
                        const Dataset& data, const FamilySpec& fam) {
  if (beta_hat.size() != beta_true.size() || beta_hat.size() != data.p()) {
    throw DataError("coefficient lengths disagree with the design");
  }
  SimMetrics m;
  m.pe = std::numeric_limits<double>::quiet_NaN();
  const Vector diff = beta_hat - beta_true;
  m.l2_loss = diff.norm();
  m.l1_loss = diff.lpNorm<1>();
  m.deviance = deviance_from_theta(fam, data.y, data.x * beta_hat);
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    if (beta_hat[j] != 0.0) ++m.n_selected;
    if (beta_true[j] != 0.0 && beta_hat[j] == 0.0) ++m.false_negatives;
  }
  m.half_min_signal = half_min_signal(beta_true);
  return m;
}

MetricStat summarize(std::vector<double> values) {
  MetricStat s;
  if (values.empty()) {
    s.median = s.robust_sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  s.median = quantile_sorted(values, 0.5);
  s.robust_sd =
      (quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25)) / 1.349;
  return s;
}

ExperimentResult run_experiment(const SimConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const std::size_t n_methods =
      config.methods.size() + (config.include_oracle ? 1 : 0);
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<MethodRun>> runs(reps,
                                           std::vector<MethodRun>(n_methods));

  std::vector<Eigen::Index> true_support;
  for (Eigen::Index j = 0; j < config.beta_true.size(); ++j) {
    if (config.beta_true[j] != 0.0) true_support.push_back(j);
  }

  SolverConfig solver_cfg = config.solver;
  solver_cfg.standardize = false;  // designs are standardized on generation
  const LocalMaxTolerances local_tol{10.0 * solver_cfg.tol, 1e-8};

  parallel_for(reps, config.threads, [&](std::size_t r) {
    auto rng = replicate_rng(replicate_seed(config.seed, r));
    Dataset data = gen_design(config.n, config.p, config.ar_rho, rng);
    try {
      data.y = sample_response(config.family, data.x * config.beta_true, rng);
    } catch (const DataError&) {
      return;  // every method of this replicate stays marked failed
    }
    const std::uint64_t fold_seed = rng();
    const Matrix test_x =
        gen_design_raw(config.test_size, config.p, config.ar_rho, rng);
    Vector test_y;
    try {
      test_y = sample_response(config.family, test_x * config.beta_true, rng);
    } catch (const DataError&) {
      return;
    }
    auto pe_of = [&](const Vector& beta_hat) {
      const Vector fitted = test_x * beta_hat;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < test_y.size(); ++i) {
        const double res = test_y[i] - mean(config.family, fitted[i]);
        acc += res * res;
      }
      return acc / static_cast<double>(test_y.size());
    };

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const PenaltySpec& pen = config.methods[m];
      MethodRun& run = runs[r][m];
      try {
        const PathResult path = ica_path(data, config.family, pen, solver_cfg);
        std::size_t chosen = 0;
        if (config.selection == Criterion::CV) {
          SolverConfig cv_cfg = solver_cfg;
          cv_cfg.lambda_grid = path.lambdas;
          const SelectionResult cv = kfold_cv(data, config.family, pen, cv_cfg,
                                              config.cv_folds, fold_seed);
          run.cv_ascent = cv.ascent_violations;
          chosen = std::min(cv.chosen_index, path.points.size() - 1);
        } else {
          chosen = select_lambda(path, config.selection, data, config.family,
                                 config.sic_factor)
                       .chosen_index;
        }
        const Vector beta_hat = path.coefficients(chosen);
        run.metrics = evaluate_fit(beta_hat, config.beta_true, data,
                                   config.family);
        run.metrics.pe = pe_of(beta_hat);

        run.path_points = static_cast<long>(path.points.size());
        for (std::size_t k = 0; k < path.points.size(); ++k) {
          const PathPoint& pt = path.points[k];
          run.ascent += pt.ascent_violations;
          if (!pt.converged) {
            ++run.nonconverged;
            continue;
          }
          if (!config.check_optimality) continue;
          const Vector b = path.fitted_coefficients(k);
          const auto rep =
              check_local_max(data, config.family, pen, pt.lambda, b, local_tol);
          ++run.local_checked;
          run.worst_stationarity =
              std::max(run.worst_stationarity, rep.stationarity_residual);
          if (!rep.passes_nonstrict) {
            ++run.local_failed;
            const bool first_order =
                rep.stationarity_residual <= local_tol.stationarity &&
                rep.z_inf <= rep.z_bound + local_tol.strictness;
            if (first_order) {
              ++run.kappa_only;
              if (*rep.coordinatewise_margin >= -local_tol.strictness)
                ++run.kappa_only_coordinatewise_ok;
            }
          }
          if (pen.kind() == PenaltyKind::L1) {
            const double v = l1_kkt_violation(data, config.family, pt.lambda, b);
            ++run.kkt_checked;
            run.worst_kkt = std::max(run.worst_kkt, v);
            if (v > kL1KktTolerance) ++run.kkt_failed;
          }
        }
        run.ok = true;
      } catch (const NumericalError&) {
      } catch (const DataError&) {
      }
    }

    if (config.include_oracle) {
      MethodRun& run = runs[r][n_methods - 1];
      Matrix sub(data.n(), static_cast<Eigen::Index>(true_support.size()));
      for (std::size_t k = 0; k < true_support.size(); ++k) {
        sub.col(static_cast<Eigen::Index>(k)) = data.x.col(true_support[k]);
      }
      const NewtonResult fit = newton_mle(config.family, sub, data.y);
      if (fit.converged) {
        Vector beta_hat = Vector::Zero(config.p);
        for (std::size_t k = 0; k < true_support.size(); ++k) {
          beta_hat[true_support[k]] = fit.beta[static_cast<Eigen::Index>(k)];
        }
        run.metrics =
            evaluate_fit(beta_hat, config.beta_true, data, config.family);
        run.metrics.pe = pe_of(beta_hat);
        run.ok = true;
      }
    }
  });

  ExperimentResult result;
  result.half_min_signal = half_min_signal(config.beta_true);
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodSummary s;
    s.method = m < config.methods.size() ? method_label(config.methods[m])
                                         : "oracle";
    std::vector<double> pe, l2, l1, dev, ns, fn;
    for (std::size_t r = 0; r < reps; ++r) {
      const MethodRun& run = runs[r][m];
      s.path_points += run.path_points;
      s.nonconverged_points += run.nonconverged;
      s.ascent_violations += run.ascent;
      s.cv_ascent_violations += run.cv_ascent;
      s.local_max_checked += run.local_checked;
      s.local_max_failures += run.local_failed;
      s.local_max_kappa_only += run.kappa_only;
      s.local_max_kappa_only_coordinatewise_ok += run.kappa_only_coordinatewise_ok;
      s.worst_stationarity = std::max(s.worst_stationarity, run.worst_stationarity);
      s.l1_kkt_checked += run.kkt_checked;
      s.l1_kkt_failures += run.kkt_failed;
      s.worst_l1_kkt = std::max(s.worst_l1_kkt, run.worst_kkt);
      if (!run.ok) {
        ++s.failures;
        continue;
      }
      s.replicates.push_back(run.metrics);
      s.replicate_index.push_back(static_cast<int>(r));
      pe.push_back(run.metrics.pe);
      l2.push_back(run.metrics.l2_loss);
      l1.push_back(run.metrics.l1_loss);
      dev.push_back(run.metrics.deviance);
      ns.push_back(run.metrics.n_selected);
      fn.push_back(run.metrics.false_negatives);
    }
    s.pe = summarize(pe);
    s.l2_loss = summarize(l2);
    s.l1_loss = summarize(l1);
    s.deviance = summarize(dev);
    s.n_selected = summarize(ns);
    s.false_negatives = summarize(fn);
    result.methods.push_back(std::move(s));
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

}  // namespace icapath
