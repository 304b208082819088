#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "icapath/errors.hpp"
#include "icapath/simulate.hpp"

using namespace icapath;
using doctest::Approx;

namespace {

double corr(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / (ac.norm() * bc.norm());
}

SimConfig small_config() {
  SimConfig cfg = logistic_study_config();
  cfg.replicates = 3;
  cfg.test_size = 500;
  cfg.solver.nlambda = 30;
  return cfg;
}

}  // namespace

TEST_CASE("design generation") {
  std::mt19937_64 rng(1);
  const Matrix x = gen_design_raw(100000, 4, 0.5, rng);
  CHECK(corr(x.col(0), x.col(1)) == Approx(0.5).epsilon(0.02));
  CHECK(std::abs(corr(x.col(0), x.col(2)) - 0.25) < 0.01);
  const Matrix z = gen_design_raw(5000, 3, 0.0, rng);
  CHECK(std::abs(corr(z.col(0), z.col(1))) < 4.0 / std::sqrt(5000.0));

  const Dataset d = gen_design(50, 6, 0.5, rng);
  CHECK(d.standardized);
  for (Eigen::Index j = 0; j < 6; ++j) CHECK(d.x.col(j).norm() == Approx(std::sqrt(50.0)));
  CHECK_THROWS_AS(gen_design_raw(10, 3, 1.0, rng), DomainError);
}

TEST_CASE("prediction error") {
  std::mt19937_64 rng(2);
  Vector beta = Vector::Zero(10);
  beta.head(2) << 1.0, -1.0;
  CHECK(prediction_error(FamilySpec::gaussian(), beta, beta, 0.5, 100000, rng) ==
        Approx(1.0).epsilon(0.02));
  Vector logistic_beta = Vector::Zero(25);
  logistic_beta.head(5) << 2.5, -1.9, 2.8, -2.2, 3.0;
  CHECK(prediction_error(FamilySpec::logistic(), Vector::Zero(25), logistic_beta, 0.5, 100000,
                         rng) == Approx(0.25).epsilon(0.01));
  CHECK_THROWS_AS(prediction_error(FamilySpec::gaussian(), beta, beta, 0.5, 0, rng), DataError);
}

TEST_CASE("fit metrics") {
  std::mt19937_64 rng(3);
  Vector beta = Vector::Zero(25);
  beta.head(5) << 2.5, -1.9, 2.8, -2.2, 3.0;
  Dataset d = gen_design(40, 25, 0.5, rng);
  d.y = sample_response(FamilySpec::logistic(), d.x * beta, rng);
  const auto exact = evaluate_fit(beta, beta, d, FamilySpec::logistic());
  CHECK(exact.l2_loss == 0.0);
  CHECK(exact.l1_loss == 0.0);
  CHECK(exact.false_negatives == 0);
  CHECK(exact.n_selected == 5);
  CHECK(exact.half_min_signal == Approx(0.95));
  const auto zero = evaluate_fit(Vector::Zero(25), beta, d, FamilySpec::logistic());
  CHECK(zero.false_negatives == 5);
  CHECK(zero.n_selected == 0);
  CHECK(zero.l2_loss == Approx(beta.norm()));
  CHECK(zero.l2_loss <= zero.l1_loss);
}

TEST_CASE("robust summaries") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(s.median == 3.0);
  CHECK(s.robust_sd == Approx(2.0 / 1.349));
  const auto one = summarize({7.0});
  CHECK(one.median == 7.0);
  CHECK(one.robust_sd == 0.0);
}

TEST_CASE("replicate seeds are distinct and reproducible") {
  CHECK(replicate_seed(1, 0) == replicate_seed(1, 0));
  CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
  CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
}

TEST_CASE("configuration file") {
  std::istringstream in(
      "# poisson design\n"
      "n = 100\n"
      "p = 8\n"
      "family = poisson\n"
      "beta_true = 1, -0.5  # rest zero\n"
      "methods = l1, scad\n"
      "scad_a = 3.0\n"
      "replicates = 4\n"
      "criterion = cv\n"
      "folds = 4\n"
      "seed = 9\n");
  const SimConfig cfg = parse_sim_config(in);
  CHECK(cfg.n == 100);
  CHECK(cfg.p == 8);
  CHECK(cfg.family.kind() == FamilyKind::Poisson);
  CHECK(cfg.beta_true.size() == 8);
  CHECK(cfg.beta_true[1] == -0.5);
  CHECK(cfg.beta_true[2] == 0.0);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1].a() == 3.0);
  CHECK(cfg.selection == Criterion::CV);
  CHECK(cfg.cv_folds == 4);
  CHECK(cfg.seed == 9);

  std::istringstream unknown("n = 10\nwidth = 3\n");
  CHECK_THROWS_WITH_AS(parse_sim_config(unknown), doctest::Contains("unknown key"), DataError);
  std::istringstream bad("n = ten\n");
  CHECK_THROWS_AS(parse_sim_config(bad), DataError);
  std::istringstream too_many("p = 2\nbeta_true = 1,2,3\n");
  CHECK_THROWS_AS(parse_sim_config(too_many), DataError);
  std::istringstream bad_a("methods = scad\nscad_a = 1.5\n");
  CHECK_THROWS_AS(parse_sim_config(bad_a), DomainError);
}

TEST_CASE("experiments are reproducible") {
  const SimConfig cfg = small_config();
  const auto a = run_experiment(cfg);
  SimConfig threaded = cfg;
  threaded.threads = 3;
  const auto b = run_experiment(threaded);
  REQUIRE(a.methods.size() == 4);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    CHECK(a.methods[m].method == b.methods[m].method);
    REQUIRE(a.methods[m].replicates.size() == b.methods[m].replicates.size());
    for (std::size_t r = 0; r < a.methods[m].replicates.size(); ++r) {
      CHECK(a.methods[m].replicates[r].l2_loss == b.methods[m].replicates[r].l2_loss);
      CHECK(a.methods[m].replicates[r].pe == b.methods[m].replicates[r].pe);
    }
    CHECK(a.methods[m].ascent_violations == 0);
    CHECK(a.methods[m].local_max_failures == 0);
    for (const auto& rep : a.methods[m].replicates) CHECK(rep.l2_loss <= rep.l1_loss);
  }
  const auto& oracle = a.methods.back();
  CHECK(oracle.method == "oracle");
  for (const auto& rep : oracle.replicates) {
    CHECK(rep.false_negatives == 0);
    CHECK(rep.n_selected == 5);
  }
}

TEST_CASE("single replicate has zero spread") {
  SimConfig cfg = small_config();
  cfg.replicates = 1;
  const auto res = run_experiment(cfg);
  for (const auto& m : res.methods) {
    CHECK(m.l2_loss.robust_sd == 0.0);
    CHECK(m.l2_loss.median == m.replicates[0].l2_loss);
  }
}
