#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "icapath/dataset.hpp"
#include "icapath/family.hpp"
#include "icapath/penalty.hpp"

namespace icapath {

// All residuals are reported on the n⁻¹ scale of ℓ_n, i.e. as components of
// the gradient of Q_n, so they compare directly with the solver tolerance.
struct LocalMaxTolerances {
  double stationarity = 1e-7;
  double strictness = 1e-8;
};

/// Numeric residuals of the three local-maximizer conditions.
struct OptimalityReport {
  double lambda = 0.0;
  int support_size = 0;
  double stationarity_residual = 0.0;  // ‖n⁻¹X₁ᵀ(y − μ) − p_λ'(|β₁|)·sgn β₁‖_∞
  double z_inf = 0.0;                  // ‖(nλ)⁻¹X₂ᵀ(y − μ)‖_∞
  double z_bound = 1.0;                // ρ'(0+)
  std::optional<double> eigen_margin;  // λ_min[n⁻¹X₁ᵀΣX₁] − λ·κ(ρ; β₁)
  // λ_min[n⁻¹X₁ᵀΣX₁ − λ·diag(κ(ρ; β_j))]: the second-order condition with
  // each coordinate's own curvature instead of the largest one. Never below
  // eigen_margin.
  std::optional<double> coordinatewise_margin;
  bool passes_strict = false;
  bool passes_nonstrict = false;
};

OptimalityReport check_local_max(const Dataset& data, const FamilySpec& fam,
                                 const PenaltySpec& penalty, double lambda,
                                 const Vector& beta_hat,
                                 const LocalMaxTolerances& tol = {});

/// Subgradient (KKT) characterization for the L1 penalty: the largest
/// violation of stationarity on the support and of |z_j| <= 1 off it.
double l1_kkt_violation(const Dataset& data, const FamilySpec& fam,
                        double lambda, const Vector& beta_hat);

/// Pointwise surrogates for the global-optimality results. The concavity
/// margin is exact only for the Gaussian family, where Σ = I.
struct GlobalCheckReport {
  double kappa = 0.0;                       // κ(p_λ)
  double min_eigenvalue = 0.0;              // λ_min[n⁻¹XᵀΣ(Xβ̂)X]
  double pointwise_convexity_margin = 0.0;  // min_eigenvalue − κ
  bool exact = false;                       // Gaussian: margin does not depend on β̂
  bool rank_deficient = false;
  bool margin_holds = false;
  // Robustness on the submodel spanned by the support (SCAD only).
  std::optional<double> c0;
  std::optional<double> scad_robustness_threshold;
  double min_abs_coef = 0.0;
  bool robustness_passes = false;
};

GlobalCheckReport check_global(const Dataset& data, const FamilySpec& fam,
                               const PenaltySpec& penalty, double lambda,
                               const Vector& beta_hat);

/// (a + 1/(2 c0))·λ.
double scad_robustness_threshold(double a, double c0, double lambda);

struct DeltaIdentifiability {
  double margin = 0.0;
  double true_loglik = 0.0;
  double best_competitor_loglik = 0.0;
  std::vector<Eigen::Index> best_competitor;
  int subspaces_checked = 0;
  int subspaces_skipped = 0;  // Newton failed to converge
};

inline constexpr Eigen::Index kDeltaMaxP = 20;
inline constexpr Eigen::Index kDeltaMaxS = 3;

/// Brute force over every s-subset of columns. Testing oracle only:
/// refuses p > 20 or s > 3.
DeltaIdentifiability delta_identifiability_margin(
    const Dataset& data, const FamilySpec& fam, Eigen::Index s,
    const std::vector<Eigen::Index>& true_support);

struct BoundedResponses {
  double lower;
  double upper;
};

struct MomentBoundedResponses {
  double m;
  double v0;
};

using ResponseTail = std::variant<BoundedResponses, MomentBoundedResponses>;

/// Upper bound on P(|aᵀ(Y − μ)| > ε), clamped to [0, 1].
double deviation_bound(const ResponseTail& kind, double a_norm2,
                       double a_norm_inf, double eps);

}  // namespace icapath
