#include "icapath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "icapath/errors.hpp"

namespace icapath {

namespace {

constexpr int kMaxHalvings = 30;

struct RowTerms {
  double b;
  double mu;
  double w;
};

// b, b' and b'' at θ sharing one exponential.
inline RowTerms row_terms(FamilyKind kind, double t) {
  constexpr double floor = std::numeric_limits<double>::min();
  switch (kind) {
    case FamilyKind::Gaussian:
      return {0.5 * t * t, t, 1.0};
    case FamilyKind::Logistic: {
      const double e = std::exp(-std::abs(t));
      const double inv = 1.0 / (1.0 + e);
      return {std::max(t, 0.0) + std::log1p(e), t >= 0.0 ? inv : e * inv,
              std::max(e * inv * inv, floor)};
    }
    case FamilyKind::Poisson: {
      const double m = std::exp(t);
      return {m, m, std::max(m, floor)};
    }
  }
  return {0.0, 0.0, 1.0};
}

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("lambda grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !std::isfinite(grid[k])) {
      throw DomainError("lambda grid entries must be finite and > 0");
    }
    if (k > 0 && !(grid[k] < grid[k - 1])) {
      throw DomainError("lambda grid must be strictly decreasing");
    }
  }
}

// Gauss-Seidel coordinate ascent on one design, carrying β across λ values.
class PathFitter {
 public:
  PathFitter(const Matrix& x, const Vector& y, const FamilySpec& fam,
             const PenaltySpec& pen, const SolverConfig& cfg)
      : x_(x),
        y_(y),
        fam_(fam),
        pen_(pen),
        cfg_(cfg),
        n_(static_cast<double>(x.rows())),
        xty_(x.transpose() * y),
        col_sq_(x.colwise().squaredNorm().transpose()),
        beta_(Vector::Zero(x.cols())),
        theta_(Vector::Zero(x.rows())),
        b_(x.rows()),
        mu_(x.rows()),
        w_(x.rows()),
        theta_t_(x.rows()),
        b_t_(x.rows()),
        mu_t_(x.rows()),
        w_t_(x.rows()) {}

  PathPoint fit(double lambda, std::size_t lambda_index);

  const Vector& beta() const { return beta_; }
  const Vector& theta() const { return theta_; }

 private:
  double resync(double lambda, std::size_t lambda_index, int sweep);
  double update_coordinate(Eigen::Index j, double lambda);
  bool try_step(Eigen::Index j, double d, double g, double h, double lambda);
  double penalty_sum(double lambda) const;

  const Matrix& x_;
  const Vector& y_;
  FamilySpec fam_;
  PenaltySpec pen_;
  const SolverConfig& cfg_;
  double n_;
  Vector xty_;
  Vector col_sq_;

  Vector beta_;
  Vector theta_, b_, mu_, w_;
  Vector theta_t_, b_t_, mu_t_, w_t_;
  double loglik_ = 0.0;
};

double PathFitter::penalty_sum(double lambda) const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < beta_.size(); ++j) {
    if (beta_[j] != 0.0) acc += penalty_value(pen_, std::abs(beta_[j]), lambda);
  }
  return acc;
}

// Recomputes θ = Xβ from scratch and returns Q_n.
double PathFitter::resync(double lambda, std::size_t lambda_index, int sweep) {
  theta_.setZero();
  for (Eigen::Index j = 0; j < beta_.size(); ++j) {
    if (beta_[j] != 0.0) theta_.noalias() += beta_[j] * x_.col(j);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < theta_.size(); ++i) {
    const RowTerms r = row_terms(fam_.kind(), theta_[i]);
    b_[i] = r.b;
    mu_[i] = r.mu;
    w_[i] = r.w;
    acc += y_[i] * theta_[i] - r.b;
  }
  loglik_ = acc / n_;
  const double q = loglik_ - penalty_sum(lambda);
  if (!std::isfinite(q)) {
    std::ostringstream msg;
    msg << "non-finite penalized objective at lambda index " << lambda_index
        << " (lambda = " << lambda << "), sweep " << sweep
        << "; support size " << (beta_.array() != 0.0).count()
        << ", max |theta| = " << theta_.cwiseAbs().maxCoeff()
        << ", max |beta| = " << beta_.cwiseAbs().maxCoeff();
    throw NumericalError(msg.str());
  }
  return q;
}

// Returns |Δβ_j| of the accepted update (0 when rejected or skipped).
double PathFitter::update_coordinate(Eigen::Index j, double lambda) {
  const auto xj = x_.col(j);
  const bool gaussian = fam_.kind() == FamilyKind::Gaussian;

  double g;
  double h;
  if (gaussian) {
    g = (xty_[j] - xj.dot(theta_)) / n_;
    h = col_sq_[j] / n_;
  } else {
    g = (xty_[j] - xj.dot(mu_)) / n_;
    h = (w_.array() * xj.array().square()).sum() / n_;
  }
  if (!(h >= kCurvatureFloor)) return 0.0;

  const double old = beta_[j];
  const double proposed =
      prox_univariate(pen_, ProxProblem{old + g / h, lambda, 1.0 / h});
  if (proposed == old) return 0.0;

  double d = proposed - old;
  if (!try_step(j, d, g, h, lambda)) {
    // The quadratic model overshot. Fall back to an ascent direction of the
    // exact coordinate objective and halve until Q_n strictly increases.
    const double slope =
        old == 0.0 ? 0.0
                   : g - (old > 0.0 ? 1.0 : -1.0) *
                             penalty_deriv(pen_, std::abs(old), lambda);
    if (old != 0.0 && d * slope <= 0.0) d = slope / h;
    if (d == 0.0) return 0.0;
    bool accepted = false;
    for (int halving = 0; halving < kMaxHalvings && !accepted; ++halving) {
      d *= 0.5;
      accepted = try_step(j, d, g, h, lambda);
    }
    if (!accepted) return 0.0;
  }
  return std::abs(d);
}

// Evaluates Q_n after β_j += d and commits the move on a strict increase.
bool PathFitter::try_step(Eigen::Index j, double d, double g, double h,
                          double lambda) {
  const auto xj = x_.col(j);
  const bool gaussian = fam_.kind() == FamilyKind::Gaussian;
  const double old = beta_[j];
  const double proposed = old + d;
  if (proposed == old) return false;

  const double d_pen = penalty_value(pen_, std::abs(proposed), lambda) -
                       penalty_value(pen_, std::abs(old), lambda);
  double d_loglik;
  if (gaussian) {
    // The quadratic expansion is exact for the Gaussian family.
    d_loglik = d * g - 0.5 * d * d * h;
  } else {
    double db = 0.0;
    for (Eigen::Index i = 0; i < theta_.size(); ++i) {
      const double t = theta_[i] + d * xj[i];
      const RowTerms r = row_terms(fam_.kind(), t);
      theta_t_[i] = t;
      b_t_[i] = r.b;
      mu_t_[i] = r.mu;
      w_t_[i] = r.w;
      db += r.b - b_[i];
    }
    d_loglik = (d * xty_[j] - db) / n_;
  }

  // Accept only a strict increase of Q_n.
  if (!(d_loglik - d_pen > 0.0)) return false;

  beta_[j] = proposed;
  if (gaussian) {
    theta_.noalias() += d * xj;
  } else {
    theta_.swap(theta_t_);
    b_.swap(b_t_);
    mu_.swap(mu_t_);
    w_.swap(w_t_);
  }
  return true;
}

PathPoint PathFitter::fit(double lambda, std::size_t lambda_index) {
  const Eigen::Index p = beta_.size();
  std::vector<Eigen::Index> active(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = j;

  PathPoint point;
  point.lambda = lambda;

  double q_prev = resync(lambda, lambda_index, 0);
  bool full_sweep = true;
  int sweeps = 0;
  while (sweeps < cfg_.max_sweeps) {
    double max_change = 0.0;
    if (full_sweep) {
      for (Eigen::Index j = 0; j < p; ++j) {
        max_change = std::max(max_change, update_coordinate(j, lambda));
      }
    } else {
      for (Eigen::Index j : active) {
        max_change = std::max(max_change, update_coordinate(j, lambda));
      }
    }
    ++sweeps;

    const double q = resync(lambda, lambda_index, sweeps);
    if (q < q_prev - kAscentSlack * std::max(1.0, std::abs(q_prev))) {
      ++point.ascent_violations;
    }
    q_prev = q;

    if (max_change <= cfg_.tol) {
      if (full_sweep) {
        point.converged = true;
        break;
      }
      // Confirm on all coordinates before declaring convergence.
      full_sweep = true;
      continue;
    }

    active.clear();
    if (cfg_.grow_active_set) {
      // z = (nλ)⁻¹Xᵀ[y − μ(Xβ)]; ρ'(0+) = 1 for every supported penalty.
      const Vector z = x_.transpose() * (y_ - mu_) / (n_ * lambda);
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta_[j] != 0.0 || std::abs(z[j]) > 1.0) active.push_back(j);
      }
    } else {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta_[j] != 0.0) active.push_back(j);
      }
    }
    full_sweep = false;
  }

  point.sweeps_used = sweeps;
  point.loglik = loglik_;
  point.penalized_objective = q_prev;
  point.deviance = deviance_from_theta(fam_, y_, theta_);
  point.support_size = static_cast<int>((beta_.array() != 0.0).count());
  return point;
}

}  // namespace

Vector PathResult::coefficients(std::size_t k) const {
  return Vector(points.at(k).coefficients);
}

Vector PathResult::fitted_coefficients(std::size_t k) const {
  return coefficients(k).cwiseProduct(column_scales);
}

int PathResult::total_ascent_violations() const {
  int total = 0;
  for (const auto& pt : points) total += pt.ascent_violations;
  return total;
}

double lambda_max_proxy(const Dataset& data, const FamilySpec& fam) {
  const double mu0 = mean(fam, 0.0);
  const Vector r = data.y.array() - mu0;
  return (data.x.transpose() * r).cwiseAbs().maxCoeff() /
         static_cast<double>(data.n());
}

std::vector<double> default_grid(double lmax, int count, double ratio) {
  if (count < 2) throw DomainError("lambda grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DomainError("lambda_min_ratio must lie in (0, 1)");
  }
  if (!(lmax > 0.0) || !std::isfinite(lmax)) {
    throw DomainError("lambda_max must be finite and > 0");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] = lmax * std::exp(step * k);
  }
  grid.front() = lmax;
  grid.back() = lmax * ratio;
  return grid;
}

CoordQuadratic coord_quadratic(const Dataset& data, const FamilySpec& fam,
                               const Vector& beta, Eigen::Index j) {
  if (j < 0 || j >= data.p()) throw DomainError("coordinate index out of range");
  const auto st = predictor_state(fam, data.x, beta);
  const double n = static_cast<double>(data.n());
  const auto xj = data.x.col(j);
  const double g = xj.dot(data.y - st.mu) / n;
  const double h = (st.sigma_diag.array() * xj.array().square()).sum() / n;
  if (!(h >= kCurvatureFloor)) {
    throw NumericalError("degenerate curvature " + std::to_string(h) +
                         " on coordinate " + std::to_string(j));
  }
  return {beta[j] + g / h, h};
}

double penalized_objective(const Dataset& data, const FamilySpec& fam,
                           const PenaltySpec& penalty, double lambda,
                           const Vector& beta) {
  double pen = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    pen += penalty_value(penalty, std::abs(beta[j]), lambda);
  }
  return log_likelihood(fam, data.y, data.x, beta) - pen;
}

PathResult ica_path(const Dataset& data, const FamilySpec& fam,
                    const PenaltySpec& penalty, const SolverConfig& config) {
  if (!(config.tol > 0.0)) throw DomainError("tolerance must be > 0");
  if (config.max_sweeps < 1) throw DomainError("max_sweeps must be >= 1");
  if (config.sparsity_cap && *config.sparsity_cap < 1) {
    throw DomainError("sparsity cap must be >= 1");
  }
  validate_response(fam, data.y);

  PathResult result;
  const bool rescale = config.standardize && !data.standardized;
  Dataset internal;
  if (rescale) internal = standardize(data);
  const Dataset& fitted = rescale ? internal : data;
  result.standardized = fitted.standardized;
  result.column_scales =
      rescale ? Vector(internal.column_scales.cwiseQuotient(data.column_scales))
              : Vector(Vector::Ones(data.p()));

  result.lambdas = config.lambda_grid.empty()
                       ? default_grid(lambda_max_proxy(fitted, fam),
                                      config.nlambda, config.lambda_min_ratio)
                       : config.lambda_grid;
  validate_grid(result.lambdas);

  PathFitter fitter(fitted.x, fitted.y, fam, penalty, config);
  for (std::size_t k = 0; k < result.lambdas.size(); ++k) {
    PathPoint pt = fitter.fit(result.lambdas[k], k);
    const Vector user = fitter.beta().cwiseQuotient(result.column_scales);
    pt.coefficients = user.sparseView(0.0, 0.0);
    result.points.push_back(std::move(pt));
    if (config.sparsity_cap &&
        result.points.back().support_size > *config.sparsity_cap) {
      result.stopped_early = k + 1 < result.lambdas.size();
      break;
    }
  }
  return result;
}

NewtonResult newton_mle(const FamilySpec& fam, const Matrix& x, const Vector& y,
                        int max_iter, double tol) {
  NewtonResult res;
  res.beta = Vector::Zero(x.cols());
  const double n = static_cast<double>(x.rows());
  auto loglik_at = [&](const Vector& b) {
    return log_likelihood_from_theta(fam, y, x * b);
  };
  res.loglik = loglik_at(res.beta);
  if (x.cols() == 0) {
    res.converged = true;
    return res;
  }
  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    const auto st = predictor_state(fam, x, res.beta);
    const Vector grad = x.transpose() * (y - st.mu) / n;
    const Matrix info = x.transpose() * st.sigma_diag.asDiagonal() * x / n;
    const Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success) break;
    const Vector step = ldlt.solve(grad);
    if (!step.allFinite()) break;

    double t = 1.0;
    Vector candidate = res.beta + step;
    double cand_ll = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 40; ++halving) {
      candidate = res.beta + t * step;
      try {
        cand_ll = loglik_at(candidate);
      } catch (const DomainError&) {
        cand_ll = -std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(cand_ll) && cand_ll >= res.loglik - 1e-14) break;
      t *= 0.5;
    }
    if (!std::isfinite(cand_ll)) break;
    const double change = (t * step).cwiseAbs().maxCoeff();
    res.beta = candidate;
    res.loglik = cand_ll;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace icapath
