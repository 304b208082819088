#include "icapath/tuning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "icapath/errors.hpp"
#include "icapath/parallel.hpp"

namespace icapath {

namespace {

int support_size(const Vector& beta) {
  return static_cast<int>((beta.array() != 0.0).count());
}

double information_score(const Dataset& data, const FamilySpec& fam,
                         const Vector& beta_hat, double factor) {
  const double n = static_cast<double>(data.n());
  return -2.0 * n * log_likelihood(fam, data.y, data.x, beta_hat) +
         factor * support_size(beta_hat);
}

}  // namespace

Criterion parse_criterion(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "bic") return Criterion::BIC;
  if (lower == "sic") return Criterion::SIC;
  if (lower == "cv") return Criterion::CV;
  throw DomainError("unknown criterion '" + std::string(text) +
                    "' (expected bic, sic or cv)");
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::BIC:
      return "bic";
    case Criterion::SIC:
      return "sic";
    case Criterion::CV:
      return "cv";
  }
  return "unknown";
}

double bic_score(const Dataset& data, const FamilySpec& fam,
                 const Vector& beta_hat) {
  return information_score(data, fam, beta_hat,
                           std::log(static_cast<double>(data.n())));
}

double sic_score(const Dataset& data, const FamilySpec& fam,
                 const Vector& beta_hat, std::optional<double> factor) {
  const double f = factor.value_or(std::log(static_cast<double>(data.n())));
  if (!(f >= 0.0) || !std::isfinite(f)) {
    throw DomainError("SIC factor must be finite and >= 0");
  }
  return information_score(data, fam, beta_hat, f);
}

std::size_t argmin_sparsest(const std::vector<double>& scores) {
  if (scores.empty()) throw DomainError("cannot select from an empty path");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] < scores[best]) best = k;
  }
  return best;
}

SelectionResult select_lambda(const PathResult& path, Criterion criterion,
                              const Dataset& data, const FamilySpec& fam,
                              std::optional<double> sic_factor) {
  if (path.points.empty()) throw DomainError("cannot select from an empty path");
  if (criterion == Criterion::CV) {
    throw DomainError("cross-validation needs refits; use kfold_cv");
  }
  const double log_n = std::log(static_cast<double>(data.n()));
  const double factor =
      criterion == Criterion::BIC ? log_n : sic_factor.value_or(log_n);

  SelectionResult sel;
  sel.criterion = criterion;
  sel.size_penalty = factor;
  sel.scores.reserve(path.points.size());
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    sel.scores.push_back(
        criterion == Criterion::BIC
            ? bic_score(data, fam, path.coefficients(k))
            : sic_score(data, fam, path.coefficients(k), factor));
  }
  sel.chosen_index = argmin_sparsest(sel.scores);
  sel.chosen_lambda = path.points[sel.chosen_index].lambda;
  return sel;
}

std::vector<int> assign_folds(const Vector& y, const FamilySpec& fam, int folds,
                              std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(y.size());
  if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  if (n < static_cast<std::size_t>(folds)) {
    throw DomainError("more folds than observations");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order;
  order.reserve(n);
  if (fam.kind() == FamilyKind::Logistic) {
    // Stratify: deal each class round-robin so every fold sees both labels.
    std::vector<std::size_t> zeros;
    std::vector<std::size_t> ones;
    for (std::size_t i = 0; i < n; ++i) {
      (y[static_cast<Eigen::Index>(i)] != 0.0 ? ones : zeros).push_back(i);
    }
    std::shuffle(zeros.begin(), zeros.end(), rng);
    std::shuffle(ones.begin(), ones.end(), rng);
    order.insert(order.end(), zeros.begin(), zeros.end());
    order.insert(order.end(), ones.begin(), ones.end());
  } else {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

SelectionResult kfold_cv(const Dataset& data, const FamilySpec& fam,
                         const PenaltySpec& penalty, const SolverConfig& config,
                         int folds, std::uint64_t seed, int threads) {
  validate_response(fam, data.y);
  const bool rescale = config.standardize && !data.standardized;
  const Dataset full = rescale ? standardize(data) : data;

  SolverConfig fold_cfg = config;
  fold_cfg.standardize = false;
  fold_cfg.sparsity_cap.reset();
  if (fold_cfg.lambda_grid.empty()) {
    fold_cfg.lambda_grid = default_grid(lambda_max_proxy(full, fam),
                                        config.nlambda, config.lambda_min_ratio);
  }
  const std::size_t grid_size = fold_cfg.lambda_grid.size();

  const std::vector<int> fold = assign_folds(full.y, fam, folds, seed);
  std::vector<int> fold_ascent(static_cast<std::size_t>(folds), 0);
  std::vector<int> fold_nonconverged(static_cast<std::size_t>(folds), 0);
  std::vector<std::vector<double>> fold_sse(
      static_cast<std::size_t>(folds), std::vector<double>(grid_size, 0.0));

  parallel_for(static_cast<std::size_t>(folds), threads, [&](std::size_t f) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      (fold[i] == static_cast<int>(f) ? test : train)
          .push_back(static_cast<Eigen::Index>(i));
    }
    const PathResult path =
        ica_path(full.rows(train), fam, penalty, fold_cfg);
    fold_ascent[f] = path.total_ascent_violations();
    for (const auto& pt : path.points) fold_nonconverged[f] += pt.converged ? 0 : 1;
    for (std::size_t k = 0; k < path.points.size(); ++k) {
      const Vector beta = path.coefficients(k);
      double sse = 0.0;
      for (Eigen::Index i : test) {
        const double r = full.y[i] - mean(fam, full.x.row(i).dot(beta));
        sse += r * r;
      }
      fold_sse[f][k] = sse;
    }
  });

  SelectionResult sel;
  sel.criterion = Criterion::CV;
  sel.scores.assign(grid_size, 0.0);
  for (int v : fold_ascent) sel.ascent_violations += v;
  for (int v : fold_nonconverged) sel.nonconverged_points += v;
  for (const auto& per_fold : fold_sse) {
    for (std::size_t k = 0; k < grid_size; ++k) sel.scores[k] += per_fold[k];
  }
  for (double& s : sel.scores) s /= static_cast<double>(full.n());
  sel.chosen_index = argmin_sparsest(sel.scores);
  sel.chosen_lambda = fold_cfg.lambda_grid[sel.chosen_index];
  return sel;
}

}  // namespace icapath
