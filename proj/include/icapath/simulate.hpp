#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "icapath/dataset.hpp"
#include "icapath/family.hpp"
#include "icapath/penalty.hpp"
#include "icapath/solver.hpp"
#include "icapath/tuning.hpp"

namespace icapath {

struct SimConfig {
  int n = 200;
  int p = 25;
  FamilySpec family = FamilySpec::logistic();
  Vector beta_true;  // length p; nonzeros first by convention
  double ar_rho = 0.5;
  int replicates = 100;
  std::uint64_t seed = 1;
  std::vector<PenaltySpec> methods;
  bool include_oracle = true;
  Criterion selection = Criterion::BIC;
  std::optional<double> sic_factor;
  int cv_folds = 5;
  int test_size = 10000;
  SolverConfig solver;
  int threads = 1;
  /// Run the local-maximizer (and, for L1, KKT) checks on every converged
  /// path point.
  bool check_optimality = true;

  void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment. Unknown keys are errors.
SimConfig parse_sim_config(std::istream& in);

/// Logistic design of the p = 25 study with β₁ = (2.5, −1.9, 2.8, −2.2, 3).
SimConfig logistic_study_config(int p = 25);
/// Poisson design with β₁ = (1.25, −0.95, 0.9, −1.1, 0.6).
SimConfig poisson_study_config(int p = 25);

struct SimMetrics {
  double pe = 0.0;
  double l2_loss = 0.0;
  double l1_loss = 0.0;
  double deviance = 0.0;
  int n_selected = 0;
  int false_negatives = 0;
  double half_min_signal = 0.0;
};

/// Seed of replicate r derived from the master seed (SplitMix64 of
/// master + (r + 1)·golden-ratio increment).
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t r);

/// Rows i.i.d. N(0, (ρ^{|i−j|})) by the AR(1) recursion, unscaled.
Matrix gen_design_raw(int n, int p, double ar_rho, std::mt19937_64& rng);

/// gen_design_raw followed by column standardization; response left zero.
Dataset gen_design(int n, int p, double ar_rho, std::mt19937_64& rng);

/// Monte Carlo estimate of E[Y − b'(Xᵀβ̂)]² on a fresh test sample.
double prediction_error(const FamilySpec& fam, const Vector& beta_hat,
                        const Vector& beta_true, double ar_rho, int test_size,
                        std::mt19937_64& rng);

/// Half the smallest nonzero |β_j|.
double half_min_signal(const Vector& beta_true);

/// Every metric except PE, which needs a test sample (left at NaN).
SimMetrics evaluate_fit(const Vector& beta_hat, const Vector& beta_true,
                        const Dataset& data, const FamilySpec& fam);

struct MetricStat {
  double median = 0.0;
  double robust_sd = 0.0;  // IQR / 1.349
};

MetricStat summarize(std::vector<double> values);

struct MethodSummary {
  std::string method;
  std::vector<SimMetrics> replicates;
  std::vector<int> replicate_index;
  int failures = 0;
  MetricStat pe, l2_loss, l1_loss, deviance, n_selected, false_negatives;

  // Optimality bookkeeping over every path point of every replicate.
  long path_points = 0;
  long nonconverged_points = 0;
  long ascent_violations = 0;
  long cv_ascent_violations = 0;  // fold refits
  long local_max_checked = 0;
  long local_max_failures = 0;
  // Failures where only the curvature condition fails, and how many of those
  // still satisfy it with per-coordinate concavity.
  long local_max_kappa_only = 0;
  long local_max_kappa_only_coordinatewise_ok = 0;
  double worst_stationarity = 0.0;
  long l1_kkt_checked = 0;
  long l1_kkt_failures = 0;
  double worst_l1_kkt = 0.0;
};

struct ExperimentResult {
  std::vector<MethodSummary> methods;
  double half_min_signal = 0.0;
  double seconds = 0.0;
};

ExperimentResult run_experiment(const SimConfig& config);

}  // namespace icapath
