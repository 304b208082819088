#include "icapath/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "icapath/errors.hpp"
#include "icapath/solver.hpp"

namespace icapath {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Matrix select_columns(const Matrix& x, const std::vector<Eigen::Index>& cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  }
  return out;
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be finite and > 0");
  }
}

void require_beta(const Dataset& data, const Vector& beta) {
  if (beta.size() != data.p()) {
    throw DataError("coefficient vector has " + std::to_string(beta.size()) +
                    " entries but design has " + std::to_string(data.p()) +
                    " columns");
  }
  if (!beta.allFinite()) throw DataError("coefficients must be finite");
}

}  // namespace

OptimalityReport check_local_max(const Dataset& data, const FamilySpec& fam,
                                 const PenaltySpec& penalty, double lambda,
                                 const Vector& beta_hat,
                                 const LocalMaxTolerances& tol) {
  require_lambda(lambda);
  require_beta(data, beta_hat);

  const double n = static_cast<double>(data.n());
  const auto st = predictor_state(fam, data.x, beta_hat);
  const Vector grad = data.x.transpose() * (data.y - st.mu) / n;

  OptimalityReport rep;
  rep.lambda = lambda;
  rep.z_bound = penalty_deriv(penalty, 0.0, lambda) / lambda;

  std::vector<Eigen::Index> support;
  std::vector<double> support_values;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (beta_hat[j] != 0.0) {
      support.push_back(j);
      support_values.push_back(beta_hat[j]);
      const double r =
          grad[j] - sign_of(beta_hat[j]) *
                        penalty_deriv(penalty, std::abs(beta_hat[j]), lambda);
      rep.stationarity_residual =
          std::max(rep.stationarity_residual, std::abs(r));
    } else {
      rep.z_inf = std::max(rep.z_inf, std::abs(grad[j]) / lambda);
    }
  }
  rep.support_size = static_cast<int>(support.size());

  if (!support.empty()) {
    const Matrix x1 = select_columns(data.x, support);
    const Matrix info =
        x1.transpose() * st.sigma_diag.asDiagonal() * x1 / n;
    rep.eigen_margin =
        min_eigenvalue(info) -
        lambda * local_concavity(penalty, support_values, lambda);
    Matrix adjusted = info;
    for (std::size_t k = 0; k < support_values.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      adjusted(i, i) -= lambda * local_concavity(
                                     penalty, std::span(&support_values[k], 1), lambda);
    }
    rep.coordinatewise_margin = min_eigenvalue(adjusted);
  }

  const bool stationary = rep.stationarity_residual <= tol.stationarity;
  const bool eig_strict = !rep.eigen_margin || *rep.eigen_margin > tol.strictness;
  const bool eig_relaxed =
      !rep.eigen_margin || *rep.eigen_margin >= -tol.strictness;
  rep.passes_strict =
      stationary && rep.z_inf <= rep.z_bound - tol.strictness && eig_strict;
  rep.passes_nonstrict =
      stationary && rep.z_inf <= rep.z_bound + tol.strictness && eig_relaxed;
  return rep;
}

double l1_kkt_violation(const Dataset& data, const FamilySpec& fam,
                        double lambda, const Vector& beta_hat) {
  require_lambda(lambda);
  require_beta(data, beta_hat);
  const double n = static_cast<double>(data.n());
  const auto st = predictor_state(fam, data.x, beta_hat);
  const Vector z = data.x.transpose() * (data.y - st.mu) / (n * lambda);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (beta_hat[j] != 0.0) {
      worst = std::max(worst, std::abs(z[j] - sign_of(beta_hat[j])));
    } else {
      worst = std::max(worst, std::abs(z[j]) - 1.0);
    }
  }
  return std::max(worst, 0.0);
}

double scad_robustness_threshold(double a, double c0, double lambda) {
  if (!(c0 > 0.0)) throw DomainError("c0 must be > 0");
  require_lambda(lambda);
  return (a + 1.0 / (2.0 * c0)) * lambda;
}

GlobalCheckReport check_global(const Dataset& data, const FamilySpec& fam,
                               const PenaltySpec& penalty, double lambda,
                               const Vector& beta_hat) {
  require_lambda(lambda);
  require_beta(data, beta_hat);

  GlobalCheckReport rep;
  rep.kappa = max_concavity(penalty, lambda);
  rep.exact = fam.kind() == FamilyKind::Gaussian;

  const double n = static_cast<double>(data.n());
  const auto st = predictor_state(fam, data.x, beta_hat);
  const Matrix info =
      data.x.transpose() * st.sigma_diag.asDiagonal() * data.x / n;
  if (data.p() > data.n()) {
    rep.rank_deficient = true;
    rep.min_eigenvalue = 0.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(info, Eigen::EigenvaluesOnly);
    const Vector ev = solver.eigenvalues();
    rep.min_eigenvalue = std::max(ev.minCoeff(), 0.0);
    rep.rank_deficient = rep.min_eigenvalue <= 1e-12 * ev.maxCoeff();
    if (rep.rank_deficient) rep.min_eigenvalue = 0.0;
  }
  rep.pointwise_convexity_margin = rep.min_eigenvalue - rep.kappa;
  rep.margin_holds = !rep.rank_deficient && rep.pointwise_convexity_margin >= 0.0;

  std::vector<Eigen::Index> support;
  double min_abs = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (beta_hat[j] != 0.0) {
      support.push_back(j);
      min_abs = std::min(min_abs, std::abs(beta_hat[j]));
    }
  }
  rep.min_abs_coef = support.empty() ? 0.0 : min_abs;
  if (penalty.kind() == PenaltyKind::SCAD && !support.empty()) {
    const Matrix x1 = select_columns(data.x, support);
    const double c0 =
        min_eigenvalue(x1.transpose() * st.sigma_diag.asDiagonal() * x1 / n);
    rep.c0 = c0;
    if (c0 > 0.0) {
      rep.scad_robustness_threshold =
          scad_robustness_threshold(penalty.a(), c0, lambda);
      rep.robustness_passes = rep.min_abs_coef > *rep.scad_robustness_threshold;
    }
  }
  return rep;
}

DeltaIdentifiability delta_identifiability_margin(
    const Dataset& data, const FamilySpec& fam, Eigen::Index s,
    const std::vector<Eigen::Index>& true_support) {
  const Eigen::Index p = data.p();
  if (p > kDeltaMaxP || s > kDeltaMaxS) {
    throw ScaleRefusal("delta identifiability is brute force only (p <= " +
                       std::to_string(kDeltaMaxP) + ", s <= " +
                       std::to_string(kDeltaMaxS) + ")");
  }
  if (s < 1) throw DomainError("model size s must be >= 1");
  if (s >= p) {
    throw DomainError("s = p leaves no competing subspace; margin is ill-posed");
  }
  std::vector<Eigen::Index> truth = true_support;
  std::sort(truth.begin(), truth.end());
  if (static_cast<Eigen::Index>(truth.size()) != s ||
      std::adjacent_find(truth.begin(), truth.end()) != truth.end() ||
      truth.front() < 0 || truth.back() >= p) {
    throw DomainError("true support must list s distinct column indices");
  }
  validate_response(fam, data.y);

  DeltaIdentifiability out;
  out.best_competitor_loglik = -std::numeric_limits<double>::infinity();

  const NewtonResult true_fit =
      newton_mle(fam, select_columns(data.x, truth), data.y);
  if (!true_fit.converged) {
    throw NumericalError("Newton iterations did not converge on the true support");
  }
  out.true_loglik = true_fit.loglik;

  // Lexicographic enumeration of s-subsets.
  std::vector<Eigen::Index> subset(static_cast<std::size_t>(s));
  for (Eigen::Index k = 0; k < s; ++k) subset[static_cast<std::size_t>(k)] = k;
  while (true) {
    if (subset != truth) {
      const NewtonResult fit =
          newton_mle(fam, select_columns(data.x, subset), data.y);
      if (fit.converged) {
        ++out.subspaces_checked;
        if (fit.loglik > out.best_competitor_loglik) {
          out.best_competitor_loglik = fit.loglik;
          out.best_competitor = subset;
        }
      } else {
        ++out.subspaces_skipped;
      }
    }
    Eigen::Index i = s - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == p - s + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Eigen::Index k = i + 1; k < s; ++k) {
      subset[static_cast<std::size_t>(k)] =
          subset[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  if (out.subspaces_checked == 0) {
    throw NumericalError("no competing subspace could be fitted");
  }
  out.margin = out.true_loglik - out.best_competitor_loglik;
  return out;
}

double deviation_bound(const ResponseTail& kind, double a_norm2,
                       double a_norm_inf, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be > 0");
  if (!(a_norm2 > 0.0) || !(a_norm_inf > 0.0)) {
    throw DomainError("norms of a must be > 0");
  }
  double raw = 0.0;
  if (const auto* b = std::get_if<BoundedResponses>(&kind)) {
    if (!(b->upper > b->lower)) {
      throw DomainError("bounded responses need upper > lower");
    }
    const double range = b->upper - b->lower;
    raw = 2.0 * std::exp(-2.0 * eps * eps / (a_norm2 * a_norm2 * range * range));
  } else {
    const auto& m = std::get<MomentBoundedResponses>(kind);
    if (!(m.m > 0.0) || !(m.v0 > 0.0)) {
      throw DomainError("moment constants M and v0 must be > 0");
    }
    raw = 2.0 * std::exp(-0.5 * eps * eps /
                         (a_norm2 * a_norm2 * m.v0 + a_norm_inf * m.m * eps));
  }
  return std::clamp(raw, 0.0, 1.0);
}

}  // namespace icapath
