#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "icapath/errors.hpp"
#include "icapath/simulate.hpp"
#include "icapath/tuning.hpp"
#include "test_util.hpp"

using namespace icapath;
using doctest::Approx;

namespace {

Dataset logistic_replicate(std::uint64_t seed, bool noise = false) {
  std::mt19937_64 rng(seed);
  Dataset d = gen_design(200, 25, 0.5, rng);
  Vector beta = Vector::Zero(25);
  if (!noise) beta.head(5) << 2.5, -1.9, 2.8, -2.2, 3.0;
  d.y = sample_response(FamilySpec::logistic(), d.x * beta, rng);
  return d;
}

}  // namespace

TEST_CASE("BIC and SIC scores") {
  const Dataset d = logistic_replicate(1);
  const auto fam = FamilySpec::logistic();
  CHECK(bic_score(d, fam, Vector::Zero(25)) == Approx(400.0 * std::log(2.0)));
  CHECK(400.0 * std::log(2.0) == Approx(277.26).epsilon(1e-4));

  Vector b5 = Vector::Zero(25);
  b5.head(5).setConstant(0.1);
  Vector b6 = b5;
  b6[10] = 1e-300;  // in the support, no effect on the likelihood
  CHECK(bic_score(d, fam, b6) - bic_score(d, fam, b5) == Approx(std::log(200.0)));
  CHECK(sic_score(d, fam, b6, 0.5 * std::log(200.0)) - sic_score(d, fam, b5, 0.5 * std::log(200.0)) ==
        Approx(0.5 * std::log(200.0)));
  CHECK(sic_score(d, fam, b5) == bic_score(d, fam, b5));
  CHECK(sic_score(d, fam, b5, std::log(200.0)) == bic_score(d, fam, b5));
  CHECK(sic_score(d, fam, Vector::Zero(25), 7.0) ==
        Approx(-2.0 * 200 * log_likelihood(fam, d.y, d.x, Vector::Zero(25))));
  CHECK_THROWS_AS(sic_score(d, fam, b5, -1.0), DomainError);

  Matrix x = Matrix::Identity(3, 3);
  Vector y(3);
  y << 1.0, -2.0, 0.5;
  const Dataset g(x, y);
  // Gaussian perfect fit: ℓ_n = n⁻¹(yᵀy − ½yᵀy); the score is −‖y‖² + log(n)·‖β‖₀.
  CHECK(bic_score(g, FamilySpec::gaussian(), y) == Approx(-y.squaredNorm() + 3 * std::log(3.0)));
}

TEST_CASE("argmin ties and scale invariance") {
  CHECK(argmin_sparsest({3.0, 1.0, 1.0, 2.0}) == 1);
  CHECK(argmin_sparsest({5.0}) == 0);
  CHECK_THROWS_AS(argmin_sparsest({}), DomainError);
  const std::vector<double> s{4.0, 2.5, 3.0, 2.5001};
  std::vector<double> scaled;
  for (double v : s) scaled.push_back(17.0 * v);
  CHECK(argmin_sparsest(s) == argmin_sparsest(scaled));
}

TEST_CASE("select_lambda on a path") {
  const Dataset d = logistic_replicate(2);
  SolverConfig cfg;
  cfg.nlambda = 50;
  const auto path = ica_path(d, FamilySpec::logistic(), PenaltySpec::scad(), cfg);
  const auto bic = select_lambda(path, Criterion::BIC, d, FamilySpec::logistic());
  const auto sic = select_lambda(path, Criterion::SIC, d, FamilySpec::logistic());
  CHECK(bic.chosen_index == sic.chosen_index);
  CHECK(bic.scores == sic.scores);
  CHECK(bic.scores.size() == path.points.size());
  CHECK(bic.chosen_lambda == path.points[bic.chosen_index].lambda);
  CHECK(path.points[bic.chosen_index].support_size >= 5);
  CHECK_THROWS_AS(select_lambda(path, Criterion::CV, d, FamilySpec::logistic()), DomainError);

  PathResult single;
  single.lambdas = {0.1};
  single.column_scales = Vector::Ones(25);
  PathPoint pt;
  pt.lambda = 0.1;
  pt.coefficients = Vector::Zero(25).sparseView();
  single.points.push_back(pt);
  CHECK(select_lambda(single, Criterion::BIC, d, FamilySpec::logistic()).chosen_index == 0);
  PathResult empty;
  CHECK_THROWS_AS(select_lambda(empty, Criterion::BIC, d, FamilySpec::logistic()), DomainError);
}

TEST_CASE("fold assignment") {
  const Dataset d = logistic_replicate(3);
  const auto f1 = assign_folds(d.y, FamilySpec::logistic(), 5, 42);
  const auto f2 = assign_folds(d.y, FamilySpec::logistic(), 5, 42);
  CHECK(f1 == f2);
  CHECK(f1 != assign_folds(d.y, FamilySpec::logistic(), 5, 43));
  for (int f = 0; f < 5; ++f) {
    std::set<double> labels;
    int count = 0;
    for (std::size_t i = 0; i < f1.size(); ++i) {
      if (f1[i] != f) continue;
      labels.insert(d.y[static_cast<Eigen::Index>(i)]);
      ++count;
    }
    CHECK(labels.size() == 2);
    CHECK(count >= 39);
    CHECK(count <= 41);
  }
  CHECK_THROWS_AS(assign_folds(d.y, FamilySpec::logistic(), 1, 0), DomainError);
  CHECK_THROWS_AS(assign_folds(d.y.head(3), FamilySpec::logistic(), 5, 0), DomainError);
}

TEST_CASE("cross-validation") {
  const Dataset d = logistic_replicate(4);
  SolverConfig cfg;
  cfg.nlambda = 30;
  const auto a = kfold_cv(d, FamilySpec::logistic(), PenaltySpec::scad(), cfg, 5, 7, 1);
  const auto b = kfold_cv(d, FamilySpec::logistic(), PenaltySpec::scad(), cfg, 5, 7, 2);
  CHECK(a.chosen_index == b.chosen_index);
  CHECK(a.scores == b.scores);
  CHECK(a.criterion == Criterion::CV);
  CHECK(a.scores.size() == 30);
  CHECK(a.scores[a.chosen_index] < a.scores[0]);

  // Leave-one-out: at a λ above every fold's λ_max each fold fits β = 0, so
  // the score is the null-model prediction error.
  Dataset small = d.rows({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  const double lmax = lambda_max_proxy(standardize(small), FamilySpec::logistic());
  SolverConfig loo_cfg;
  loo_cfg.lambda_grid = {4.0 * lmax, lmax, 0.3 * lmax};
  const auto loo = kfold_cv(small, FamilySpec::logistic(), PenaltySpec::l1(), loo_cfg, 12, 1, 1);
  double null_pe = 0.0;
  for (Eigen::Index i = 0; i < small.n(); ++i) null_pe += std::pow(small.y[i] - 0.5, 2);
  CHECK(loo.scores[0] == Approx(null_pe / small.n()));
}

TEST_CASE("pure noise selects a near-empty model") {
  std::vector<int> sizes;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = logistic_replicate(100 + seed, true);
    SolverConfig cfg;
    cfg.nlambda = 30;
    const auto sel = kfold_cv(d, FamilySpec::logistic(), PenaltySpec::scad(), cfg, 5, seed, 1);
    const auto path = ica_path(d, FamilySpec::logistic(), PenaltySpec::scad(), cfg);
    const std::size_t k = std::min(sel.chosen_index, path.points.size() - 1);
    sizes.push_back(path.points[k].support_size);
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes[sizes.size() / 2] <= 2);
}

TEST_CASE("criterion parsing") {
  CHECK(parse_criterion("BIC") == Criterion::BIC);
  CHECK(parse_criterion("cv") == Criterion::CV);
  CHECK(criterion_name(Criterion::SIC) == "sic");
  CHECK_THROWS_AS(parse_criterion("aic"), DomainError);
}
