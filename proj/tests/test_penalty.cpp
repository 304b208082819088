#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "icapath/errors.hpp"
#include "icapath/penalty.hpp"

using namespace icapath;
using doctest::Approx;

namespace {

// Brute-force minimizer of the prox objective on a uniform grid over [lo, hi].
double grid_min(const PenaltySpec& spec, const ProxProblem& prob, double lo,
                double hi, double step, double* arg = nullptr) {
  double best = prox_objective(spec, prob, 0.0);
  double best_b = 0.0;
  const long count = static_cast<long>(std::ceil((hi - lo) / step));
  for (long k = 0; k <= count; ++k) {
    const double b = std::min(lo + static_cast<double>(k) * step, hi);
    const double v = prox_objective(spec, prob, b);
    if (v < best) {
      best = v;
      best_b = b;
    }
  }
  if (arg) *arg = best_b;
  return best;
}

double trapezoid_deriv(const PenaltySpec& spec, double t, double lambda) {
  const int steps = 200000;
  const double h = t / steps;
  double sum = 0.5 * (penalty_deriv(spec, 0.0, lambda) + penalty_deriv(spec, t, lambda));
  for (int k = 1; k < steps; ++k) sum += penalty_deriv(spec, k * h, lambda);
  return sum * h;
}

}  // namespace

TEST_CASE("construction enforces shape constraints") {
  CHECK_THROWS_AS(PenaltySpec::scad(2.0), DomainError);
  CHECK_THROWS_WITH_AS(PenaltySpec::scad(1.5), doctest::Contains("SCAD requires a > 2"),
                       DomainError);
  CHECK_THROWS_AS(PenaltySpec::mcp(0.9), DomainError);
  CHECK_NOTHROW(PenaltySpec::mcp(1.0));
  CHECK(PenaltySpec::scad().a() == 3.7);
  CHECK(parse_penalty_kind("LASSO") == PenaltyKind::L1);
  CHECK(parse_penalty_kind("Scad") == PenaltyKind::SCAD);
  CHECK_THROWS_AS(parse_penalty_kind("bridge"), DomainError);
}

TEST_CASE("penalty values") {
  CHECK(penalty_value(PenaltySpec::scad(3.7), 0.5, 1.0) == Approx(0.5));
  CHECK(penalty_value(PenaltySpec::scad(3.7), 10.0, 1.0) == Approx(2.35));
  CHECK(penalty_value(PenaltySpec::l1(), 2.0, 0.5) == Approx(1.0));
  CHECK(penalty_value(PenaltySpec::mcp(2.0), 5.0, 1.0) == Approx(1.0));
  CHECK_THROWS_AS(penalty_value(PenaltySpec::l1(), -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(penalty_value(PenaltySpec::l1(), 1.0, 0.0), DomainError);
}

TEST_CASE("penalty derivatives") {
  const auto scad = PenaltySpec::scad(3.7);
  CHECK(penalty_deriv(scad, 0.2, 0.5) == Approx(0.5));
  CHECK(penalty_deriv(scad, 2.0, 0.5) == Approx(0.0));
  CHECK(penalty_deriv(scad, 1.0, 0.5) == Approx(0.85 / 2.7).epsilon(1e-12));
  CHECK(penalty_deriv(PenaltySpec::mcp(2.0), 1.0, 1.0) == Approx(0.5));
  CHECK_THROWS_AS(penalty_deriv(scad, -0.1, 1.0), DomainError);
}

TEST_CASE("local and maximum concavity") {
  const auto scad = PenaltySpec::scad(3.7);
  const std::vector<double> small{0.5};
  const std::vector<double> mid{2.0};
  const std::vector<double> mixed{0.3, -7.0};
  CHECK(local_concavity(scad, small, 1.0) == 0.0);
  CHECK(local_concavity(scad, mid, 1.0) == Approx(1.0 / 2.7));
  CHECK(local_concavity(PenaltySpec::l1(), mixed, 0.2) == 0.0);
  const std::vector<double> at_lambda{1.0};
  const std::vector<double> at_a_lambda{3.7};
  CHECK(local_concavity(scad, at_lambda, 1.0) == Approx(1.0 / 2.7));
  CHECK(local_concavity(scad, at_a_lambda, 1.0) == Approx(1.0 / 2.7));
  const std::vector<double> with_zero{1.0, 0.0};
  CHECK_THROWS_AS(local_concavity(scad, with_zero, 1.0), DomainError);
  const std::vector<double> mcp_in{1.5};
  const std::vector<double> mcp_out{2.5};
  CHECK(local_concavity(PenaltySpec::mcp(2.0), mcp_in, 1.0) == Approx(0.5));
  CHECK(local_concavity(PenaltySpec::mcp(2.0), mcp_out, 1.0) == 0.0);

  CHECK(max_concavity(PenaltySpec::l1(), 1.0) == 0.0);
  CHECK(max_concavity(scad, 0.5) == Approx(1.0 / 2.7));
  CHECK(max_concavity(PenaltySpec::mcp(2.0), 5.0) == Approx(0.5));
}

TEST_CASE("prox closed forms") {
  const auto scad = PenaltySpec::scad(3.7);
  CHECK(prox_univariate(scad, {0.8, 1.0, 1.0}) == 0.0);
  CHECK(prox_univariate(scad, {1.5, 1.0, 1.0}) == Approx(0.5));
  CHECK(prox_univariate(scad, {5.0, 1.0, 1.0}) == Approx(5.0));
  CHECK(prox_univariate(PenaltySpec::l1(), {2.0, 0.5, 1.0}) == Approx(1.5));

  // Middle SCAD branch: the objective's stationary point solves
  // β − z + (aλ − β)/(a − 1) = 0, i.e. β = ((a − 1)z − aλ)/(a − 2).
  const double got = prox_univariate(scad, {2.5, 1.0, 1.0});
  CHECK(got == Approx((2.7 * 2.5 - 3.7) / 1.7).epsilon(1e-12));
  double arg = 0.0;
  grid_min(scad, {2.5, 1.0, 1.0}, 0.0, 2.5, 1e-5, &arg);
  CHECK(got == Approx(arg).epsilon(2e-5));
  CHECK(got == Approx(1.794118).epsilon(1e-6));
}

TEST_CASE("MCP prox in both curvature regimes") {
  const auto mcp = PenaltySpec::mcp(3.0);
  // Λ < a: firm thresholding.
  CHECK(prox_univariate(mcp, {0.5, 1.0, 1.0}) == 0.0);
  CHECK(prox_univariate(mcp, {2.0, 1.0, 1.0}) == Approx((2.0 - 1.0) / (1.0 - 1.0 / 3.0)));
  CHECK(prox_univariate(mcp, {4.0, 1.0, 1.0}) == Approx(4.0));
  // Λ ≥ a: the answer is 0 or z, whichever has the smaller objective.
  for (double z : {1.0, 2.0, 2.4, 2.5, 3.0, 5.0}) {
    const ProxProblem prob{z, 1.0, 4.0};
    const double b = prox_univariate(mcp, prob);
    CHECK((b == 0.0 || b == Approx(z)));
    const double lo = std::min(prox_objective(mcp, prob, 0.0), prox_objective(mcp, prob, z));
    CHECK(prox_objective(mcp, prob, b) <= lo + 1e-12);
  }
}

TEST_CASE("prox ties go to the smaller magnitude") {
  // MCP with Λ ≥ a: R(0) = R(z) when ½z² = Λ·aλ²/2. With a = Λ = 2 and
  // λ = 1 both sides equal 2 exactly at z = 2.
  const auto mcp = PenaltySpec::mcp(2.0);
  CHECK(prox_objective(mcp, {2.0, 1.0, 2.0}, 0.0) == prox_objective(mcp, {2.0, 1.0, 2.0}, 2.0));
  CHECK(prox_univariate(mcp, {2.0, 1.0, 2.0}) == 0.0);
}

TEST_CASE("prox symmetry and zero input") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<PenaltySpec> specs{PenaltySpec::l1(), PenaltySpec::scad(3.7),
                                       PenaltySpec::mcp(2.5)};
  for (const auto& spec : specs) {
    CHECK(prox_univariate(spec, {0.0, 0.7, 1.3}) == 0.0);
    for (int k = 0; k < 200; ++k) {
      const ProxProblem prob{-5.0 + 10.0 * u(rng), 0.1 + 2.0 * u(rng), 0.1 + 3.0 * u(rng)};
      const double b = prox_univariate(spec, prob);
      const double mb = prox_univariate(spec, {-prob.z, prob.lambda, prob.capital_lambda});
      CHECK(mb == -b);
      CHECK(std::abs(b) <= std::abs(prob.z));
      CHECK((b == 0.0 || (b > 0) == (prob.z > 0)));
    }
  }
}

TEST_CASE("prox agrees with a grid oracle on random problems") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double a_scad = 2.05 + 3.0 * u(rng);
    const double a_mcp = 1.0 + 4.0 * u(rng);
    const std::vector<PenaltySpec> specs{PenaltySpec::l1(), PenaltySpec::scad(a_scad),
                                         PenaltySpec::mcp(a_mcp)};
    const ProxProblem prob{-4.0 + 8.0 * u(rng), 0.05 + 1.5 * u(rng), 0.1 + 5.0 * u(rng)};
    for (const auto& spec : specs) {
      const double b = prox_univariate(spec, prob);
      const double lo = std::min(0.0, prob.z);
      const double hi = std::max(0.0, prob.z);
      const double best = grid_min(spec, prob, lo, hi, 1e-4);
      CHECK(prox_objective(spec, prob, b) <= best + 1e-9);
    }
  }
}

TEST_CASE("derivative invariants") {
  const std::vector<PenaltySpec> specs{PenaltySpec::l1(), PenaltySpec::scad(3.7),
                                       PenaltySpec::mcp(2.0)};
  for (const auto& spec : specs) {
    for (double lambda : {0.1, 1.0, 3.0}) {
      CHECK(penalty_deriv(spec, 0.0, lambda) / lambda == Approx(1.0));
      double prev = penalty_deriv(spec, 0.0, lambda);
      for (double t = 0.01; t < 15.0; t += 0.01) {
        const double d = penalty_deriv(spec, t, lambda);
        CHECK(d <= prev + 1e-15);
        prev = d;
      }
    }
  }
}

TEST_CASE("penalty value integrates the derivative") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<PenaltySpec> specs{PenaltySpec::l1(), PenaltySpec::scad(3.7),
                                       PenaltySpec::mcp(2.0)};
  for (const auto& spec : specs) {
    for (int k = 0; k < 20; ++k) {
      const double lambda = 0.2 + 1.5 * u(rng);
      const double t = 6.0 * lambda * u(rng);
      CHECK(std::abs(trapezoid_deriv(spec, t, lambda) - penalty_value(spec, t, lambda)) <
            1e-8);
    }
  }
}
