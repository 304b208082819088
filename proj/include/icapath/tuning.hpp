#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icapath/dataset.hpp"
#include "icapath/family.hpp"
#include "icapath/penalty.hpp"
#include "icapath/solver.hpp"

namespace icapath {

enum class Criterion { BIC, SIC, CV };

Criterion parse_criterion(std::string_view text);
std::string criterion_name(Criterion c);

struct SelectionResult {
  std::size_t chosen_index = 0;
  double chosen_lambda = 0.0;
  std::vector<double> scores;
  Criterion criterion = Criterion::BIC;
  /// Model-size penalty per selected variable (BIC/SIC only).
  std::optional<double> size_penalty;
  /// Summed over the fold refits (CV only).
  int ascent_violations = 0;
  int nonconverged_points = 0;
};

/// −2n·ℓ_n(β̂) + log(n)·‖β̂‖₀.
double bic_score(const Dataset& data, const FamilySpec& fam,
                 const Vector& beta_hat);

/// −2n·ℓ_n(β̂) + factor·‖β̂‖₀; factor defaults to log(n), which makes it
/// coincide with BIC.
double sic_score(const Dataset& data, const FamilySpec& fam,
                 const Vector& beta_hat,
                 std::optional<double> factor = std::nullopt);

/// Index of the smallest score; ties go to the smallest index (largest λ).
std::size_t argmin_sparsest(const std::vector<double>& scores);

/// Scores every point of a path with BIC or SIC and picks the minimizer.
/// `data` must be the design the path was fitted on (any column scaling).
SelectionResult select_lambda(const PathResult& path, Criterion criterion,
                              const Dataset& data, const FamilySpec& fam,
                              std::optional<double> sic_factor = std::nullopt);

/// Row assignment to folds by seeded shuffle; stratified by class for the
/// logistic family. fold[i] is the fold of row i.
std::vector<int> assign_folds(const Vector& y, const FamilySpec& fam, int folds,
                              std::uint64_t seed);

/// K-fold cross-validation on held-out squared prediction error
/// (y − b'(xᵀβ̂))². Every fold reuses the full-data λ grid.
SelectionResult kfold_cv(const Dataset& data, const FamilySpec& fam,
                         const PenaltySpec& penalty, const SolverConfig& config,
                         int folds, std::uint64_t seed, int threads = 1);

}  // namespace icapath
