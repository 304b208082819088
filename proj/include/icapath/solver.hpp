#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <optional>
#include <vector>

#include "icapath/dataset.hpp"
#include "icapath/family.hpp"
#include "icapath/penalty.hpp"

namespace icapath {

using SparseVector = Eigen::SparseVector<double>;

inline constexpr double kCurvatureFloor = 1e-10;
inline constexpr double kAscentSlack = 1e-12;

struct SolverConfig {
  /// Strictly decreasing. When empty, a geometric grid of `nlambda` points
  /// from lambda_max_proxy down to lambda_min_ratio * lambda_max is used.
  std::vector<double> lambda_grid;
  int nlambda = 100;
  double lambda_min_ratio = 0.01;
  int max_sweeps = 100;
  double tol = 1e-8;
  std::optional<int> sparsity_cap;
  bool grow_active_set = true;
  /// Rescale columns to ‖x_j‖ = √n before fitting when the data is not
  /// already standardized. Coefficients are always reported on the scale of
  /// the supplied design.
  bool standardize = true;
};

struct PathPoint {
  double lambda = 0.0;
  SparseVector coefficients;  // scale of the supplied design
  double loglik = 0.0;
  double penalized_objective = 0.0;  // on the fitted (standardized) scale
  double deviance = 0.0;
  int support_size = 0;
  int sweeps_used = 0;
  bool converged = false;
  int ascent_violations = 0;
};

struct PathResult {
  std::vector<double> lambdas;
  std::vector<PathPoint> points;  // shorter than lambdas after an early stop
  Vector column_scales;           // fitted_beta_j = beta_j * column_scales_j
  bool standardized = false;
  bool stopped_early = false;

  Eigen::Index p() const { return column_scales.size(); }
  Vector coefficients(std::size_t k) const;
  Vector fitted_coefficients(std::size_t k) const;
  int total_ascent_violations() const;
};

struct CoordQuadratic {
  double z;
  double curvature;
};

/// n⁻¹‖Xᵀ(y − μ(0))‖_∞.
double lambda_max_proxy(const Dataset& data, const FamilySpec& fam);

/// Geometric grid of `count` points from lmax down to ratio * lmax.
std::vector<double> default_grid(double lmax, int count = 100,
                                 double ratio = 0.01);

/// Second-order expansion of ℓ_n along coordinate j at beta. Maximizing the
/// penalized expansion over β_j is prox_univariate with Λ = 1/curvature.
/// Throws NumericalError when the curvature is below kCurvatureFloor.
CoordQuadratic coord_quadratic(const Dataset& data, const FamilySpec& fam,
                               const Vector& beta, Eigen::Index j);

/// Iterative coordinate ascent over a decreasing λ grid with warm starts.
PathResult ica_path(const Dataset& data, const FamilySpec& fam,
                    const PenaltySpec& penalty, const SolverConfig& config);

/// Q_n(β) = ℓ_n(β) − Σ p_λ(|β_j|).
double penalized_objective(const Dataset& data, const FamilySpec& fam,
                           const PenaltySpec& penalty, double lambda,
                           const Vector& beta);

struct NewtonResult {
  Vector beta;
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
};

/// Unpenalized maximum likelihood by damped Newton iterations.
NewtonResult newton_mle(const FamilySpec& fam, const Matrix& x, const Vector& y,
                        int max_iter = 100, double tol = 1e-10);

}  // namespace icapath
