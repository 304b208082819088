#include "icapath/family.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "icapath/errors.hpp"

namespace icapath {

namespace {

void require_finite(double theta) {
  if (!std::isfinite(theta)) {
    throw DomainError("natural parameter must be finite");
  }
}

void require_rows(const Matrix& x, const Vector& v, const char* what) {
  if (x.rows() != v.size()) {
    throw DataError(std::string(what) + ": design has " +
                    std::to_string(x.rows()) + " rows but vector has " +
                    std::to_string(v.size()) + " entries");
  }
}

void require_cols(const Matrix& x, const Vector& beta) {
  if (x.cols() != beta.size()) {
    throw DataError("design has " + std::to_string(x.cols()) +
                    " columns but beta has " + std::to_string(beta.size()) +
                    " entries");
  }
}

// y log(y / mu) with 0 log 0 = 0.
double xlogx_over(double y, double mu) {
  return y > 0.0 ? y * std::log(y / mu) : 0.0;
}

}  // namespace

FamilySpec::FamilySpec(FamilyKind kind, double dispersion)
    : kind_(kind), dispersion_(dispersion) {
  if (!(dispersion_ > 0.0) || !std::isfinite(dispersion_)) {
    throw DomainError("dispersion must be finite and > 0");
  }
  if (kind_ != FamilyKind::Gaussian && dispersion_ != 1.0) {
    throw DomainError(name() + " family has dispersion fixed at 1");
  }
}

FamilySpec FamilySpec::gaussian(double sigma2) {
  return FamilySpec(FamilyKind::Gaussian, sigma2);
}
FamilySpec FamilySpec::logistic() { return FamilySpec(FamilyKind::Logistic); }
FamilySpec FamilySpec::poisson() { return FamilySpec(FamilyKind::Poisson); }

std::string FamilySpec::name() const {
  switch (kind_) {
    case FamilyKind::Gaussian:
      return "gaussian";
    case FamilyKind::Logistic:
      return "logistic";
    case FamilyKind::Poisson:
      return "poisson";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "gaussian" || lower == "linear") return FamilyKind::Gaussian;
  if (lower == "logistic" || lower == "binomial") return FamilyKind::Logistic;
  if (lower == "poisson") return FamilyKind::Poisson;
  throw DomainError("unknown family '" + std::string(text) +
                    "' (expected gaussian, logistic or poisson)");
}

double cumulant(const FamilySpec& fam, double theta) {
  require_finite(theta);
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      return 0.5 * theta * theta;
    case FamilyKind::Logistic:
      return std::max(theta, 0.0) + std::log1p(std::exp(-std::abs(theta)));
    case FamilyKind::Poisson:
      return std::exp(theta);
  }
  return 0.0;
}

double mean(const FamilySpec& fam, double theta) {
  require_finite(theta);
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      return theta;
    case FamilyKind::Logistic:
      if (theta >= 0.0) return 1.0 / (1.0 + std::exp(-theta));
      return std::exp(theta) / (1.0 + std::exp(theta));
    case FamilyKind::Poisson:
      return std::exp(theta);
  }
  return 0.0;
}

double variance_fn(const FamilySpec& fam, double theta) {
  require_finite(theta);
  constexpr double floor = std::numeric_limits<double>::min();
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      return 1.0;
    case FamilyKind::Logistic: {
      const double e = std::exp(-std::abs(theta));
      return std::max(e / ((1.0 + e) * (1.0 + e)), floor);
    }
    case FamilyKind::Poisson:
      return std::max(std::exp(theta), floor);
  }
  return 1.0;
}

LinearPredictorState predictor_state(const FamilySpec& fam, const Matrix& x,
                                     const Vector& beta) {
  require_cols(x, beta);
  LinearPredictorState st;
  st.theta = x * beta;
  st.mu.resize(st.theta.size());
  st.sigma_diag.resize(st.theta.size());
  for (Eigen::Index i = 0; i < st.theta.size(); ++i) {
    st.mu[i] = mean(fam, st.theta[i]);
    st.sigma_diag[i] = variance_fn(fam, st.theta[i]);
  }
  return st;
}

void validate_response(const FamilySpec& fam, const Vector& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    if (!std::isfinite(v)) {
      throw DataError("response " + std::to_string(i + 1) + " is not finite");
    }
    if (fam.kind() == FamilyKind::Logistic && v != 0.0 && v != 1.0) {
      throw DataError("logistic response " + std::to_string(i + 1) +
                      " must be 0 or 1, got " + std::to_string(v));
    }
    if (fam.kind() == FamilyKind::Poisson &&
        (v < 0.0 || v != std::floor(v))) {
      throw DataError("poisson response " + std::to_string(i + 1) +
                      " must be a nonnegative integer, got " +
                      std::to_string(v));
    }
  }
}

double log_likelihood_from_theta(const FamilySpec& fam, const Vector& y,
                                 const Vector& theta) {
  if (y.size() != theta.size() || y.size() == 0) {
    throw DataError("response and linear predictor lengths differ");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    acc += y[i] * theta[i] - cumulant(fam, theta[i]);
  }
  return acc / static_cast<double>(y.size());
}

double log_likelihood(const FamilySpec& fam, const Vector& y, const Matrix& x,
                      const Vector& beta) {
  require_rows(x, y, "log_likelihood");
  require_cols(x, beta);
  validate_response(fam, y);
  return log_likelihood_from_theta(fam, y, x * beta);
}

Vector score(const FamilySpec& fam, const Vector& y, const Matrix& x,
             const Vector& beta) {
  require_rows(x, y, "score");
  const auto st = predictor_state(fam, x, beta);
  return x.transpose() * (y - st.mu) / static_cast<double>(x.rows());
}

Matrix fisher_information(const FamilySpec& fam, const Matrix& x,
                          const Vector& beta) {
  const auto st = predictor_state(fam, x, beta);
  return x.transpose() * st.sigma_diag.asDiagonal() * x /
         static_cast<double>(x.rows());
}

double deviance_from_theta(const FamilySpec& fam, const Vector& y,
                           const Vector& theta) {
  if (y.size() != theta.size()) {
    throw DataError("response and linear predictor lengths differ");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double t = theta[i];
    switch (fam.kind()) {
      case FamilyKind::Gaussian: {
        const double r = y[i] - t;
        acc += r * r;
        break;
      }
      case FamilyKind::Logistic:
        // Saturated binary log-likelihood is zero.
        acc += -2.0 * (y[i] * t - cumulant(fam, t));
        break;
      case FamilyKind::Poisson: {
        const double mu = mean(fam, t);
        acc += 2.0 * (xlogx_over(y[i], mu) - (y[i] - mu));
        break;
      }
    }
  }
  if (fam.kind() == FamilyKind::Gaussian) acc /= fam.dispersion();
  return std::max(acc, 0.0);
}

double deviance(const FamilySpec& fam, const Vector& y, const Matrix& x,
                const Vector& beta) {
  require_rows(x, y, "deviance");
  require_cols(x, beta);
  validate_response(fam, y);
  return deviance_from_theta(fam, y, x * beta);
}

Vector sample_response(const FamilySpec& fam, const Vector& theta,
                       std::mt19937_64& rng) {
  Vector y(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    require_finite(t);
    switch (fam.kind()) {
      case FamilyKind::Gaussian: {
        std::normal_distribution<double> noise(0.0,
                                               std::sqrt(fam.dispersion()));
        y[i] = t + noise(rng);
        break;
      }
      case FamilyKind::Logistic: {
        std::bernoulli_distribution coin(mean(fam, t));
        y[i] = coin(rng) ? 1.0 : 0.0;
        break;
      }
      case FamilyKind::Poisson: {
        if (std::abs(t) > kPoissonThetaGuard) {
          throw DataError("poisson natural parameter " + std::to_string(t) +
                          " exceeds the sampling guard of " +
                          std::to_string(kPoissonThetaGuard));
        }
        std::poisson_distribution<long long> draw(std::exp(t));
        y[i] = static_cast<double>(draw(rng));
        break;
      }
    }
  }
  return y;
}

}  // namespace icapath
