#include "icapath/penalty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "icapath/errors.hpp"

namespace icapath {

namespace {

void require_domain(double t, double lambda) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("penalty argument t must be finite and >= 0, got " +
                      std::to_string(t));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be finite and > 0, got " +
                      std::to_string(lambda));
  }
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

PenaltySpec::PenaltySpec(PenaltyKind kind, double a) : kind_(kind), a_(a) {
  switch (kind_) {
    case PenaltyKind::L1:
      break;
    case PenaltyKind::SCAD:
      if (!(a_ > 2.0) || !std::isfinite(a_)) {
        throw DomainError("SCAD requires a > 2 (got a = " + std::to_string(a_) +
                          ")");
      }
      break;
    case PenaltyKind::MCP:
      if (!(a_ >= 1.0) || !std::isfinite(a_)) {
        throw DomainError("MCP requires a >= 1 (got a = " + std::to_string(a_) +
                          ")");
      }
      break;
  }
}

PenaltySpec PenaltySpec::l1() { return PenaltySpec(PenaltyKind::L1, 0.0); }
PenaltySpec PenaltySpec::scad(double a) {
  return PenaltySpec(PenaltyKind::SCAD, a);
}
PenaltySpec PenaltySpec::mcp(double a) { return PenaltySpec(PenaltyKind::MCP, a); }

std::string PenaltySpec::name() const {
  switch (kind_) {
    case PenaltyKind::L1:
      return "l1";
    case PenaltyKind::SCAD:
      return "scad";
    case PenaltyKind::MCP:
      return "mcp";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "l1" || lower == "lasso") return PenaltyKind::L1;
  if (lower == "scad") return PenaltyKind::SCAD;
  if (lower == "mcp") return PenaltyKind::MCP;
  throw DomainError("unknown penalty '" + std::string(text) +
                    "' (expected l1, scad or mcp)");
}

double penalty_value(const PenaltySpec& spec, double t, double lambda) {
  require_domain(t, lambda);
  const double a = spec.a();
  switch (spec.kind()) {
    case PenaltyKind::L1:
      return lambda * t;
    case PenaltyKind::SCAD:
      if (t <= lambda) return lambda * t;
      if (t <= a * lambda) {
        return (2.0 * a * lambda * t - t * t - lambda * lambda) /
               (2.0 * (a - 1.0));
      }
      return 0.5 * (a + 1.0) * lambda * lambda;
    case PenaltyKind::MCP:
      if (t <= a * lambda) return lambda * t - 0.5 * t * t / a;
      return 0.5 * a * lambda * lambda;
  }
  return 0.0;
}

double penalty_deriv(const PenaltySpec& spec, double t, double lambda) {
  require_domain(t, lambda);
  const double a = spec.a();
  switch (spec.kind()) {
    case PenaltyKind::L1:
      return lambda;
    case PenaltyKind::SCAD:
      if (t <= lambda) return lambda;
      return std::max(a * lambda - t, 0.0) / (a - 1.0);
    case PenaltyKind::MCP:
      return std::max(a * lambda - t, 0.0) / a;
  }
  return 0.0;
}

double local_concavity(const PenaltySpec& spec, std::span<const double> v,
                       double lambda) {
  require_domain(0.0, lambda);
  for (double vj : v) {
    if (vj == 0.0 || !std::isfinite(vj)) {
      throw DomainError("local_concavity requires every component nonzero");
    }
  }
  const double a = spec.a();
  switch (spec.kind()) {
    case PenaltyKind::L1:
      return 0.0;
    case PenaltyKind::SCAD:
      for (double vj : v) {
        const double t = std::abs(vj);
        if (t >= lambda && t <= a * lambda) return 1.0 / ((a - 1.0) * lambda);
      }
      return 0.0;
    case PenaltyKind::MCP:
      for (double vj : v) {
        if (std::abs(vj) <= a * lambda) return 1.0 / (a * lambda);
      }
      return 0.0;
  }
  return 0.0;
}

double max_concavity(const PenaltySpec& spec, double lambda) {
  require_domain(0.0, lambda);
  switch (spec.kind()) {
    case PenaltyKind::L1:
      return 0.0;
    case PenaltyKind::SCAD:
      return 1.0 / (spec.a() - 1.0);
    case PenaltyKind::MCP:
      return 1.0 / spec.a();
  }
  return 0.0;
}

double prox_objective(const PenaltySpec& spec, const ProxProblem& prob,
                      double beta) {
  const double r = prob.z - beta;
  return 0.5 * r * r +
         prob.capital_lambda * penalty_value(spec, std::abs(beta), prob.lambda);
}

double prox_univariate(const PenaltySpec& spec, const ProxProblem& prob) {
  if (!std::isfinite(prob.z)) throw DomainError("prox target z must be finite");
  require_domain(0.0, prob.lambda);
  if (!(prob.capital_lambda > 0.0) || !std::isfinite(prob.capital_lambda)) {
    throw DomainError("prox curvature weight must be finite and > 0");
  }

  const double z = prob.z;
  const double az = std::abs(z);
  const double s = sign_of(z);
  const double lam = prob.lambda;
  const double cap = prob.capital_lambda;
  const double a = spec.a();
  const double z0 = s * std::max(az - cap * lam, 0.0);

  switch (spec.kind()) {
    case PenaltyKind::L1:
      return z0;

    case PenaltyKind::SCAD: {
      if (az <= lam) return z0;
      if (az <= a * lam) {
        if (az <= (cap + 1.0) * lam) return z0;
        // Here cap < a - 1, so the middle piece is strictly convex.
        return s * (az - cap * lam * a / (a - 1.0)) / (1.0 - cap / (a - 1.0));
      }
      if (az <= (cap + 1.0) * lam) {
        return prox_objective(spec, prob, z0) <= prox_objective(spec, prob, z)
                   ? z0
                   : z;
      }
      return z;
    }

    case PenaltyKind::MCP: {
      if (cap < a) {
        if (az <= cap * lam) return 0.0;
        if (az <= a * lam) return s * (az - cap * lam) / (1.0 - cap / a);
        return z;
      }
      // cap >= a: the objective is concave on [0, aλ] and any interior
      // stationary point there is a maximum, so only 0 and z compete.
      return prox_objective(spec, prob, 0.0) <= prox_objective(spec, prob, z)
                 ? 0.0
                 : z;
    }
  }
  return 0.0;
}

}  // namespace icapath
