#pragma once

#include <span>
#include <string>
#include <string_view>

namespace icapath {

enum class PenaltyKind { L1, SCAD, MCP };

/// A folded-concave penalty p_λ(t) together with its shape parameter.
///
/// SCAD requires a > 2 and MCP requires a >= 1; the shape parameter is
/// ignored for L1. All members are evaluated on t >= 0 (the penalty is
/// applied to |β_j|).
class PenaltySpec {
 public:
  static constexpr double kDefaultScadA = 3.7;

  PenaltySpec(PenaltyKind kind, double a);

  static PenaltySpec l1();
  static PenaltySpec scad(double a = kDefaultScadA);
  static PenaltySpec mcp(double a);

  PenaltyKind kind() const { return kind_; }
  double a() const { return a_; }

  std::string name() const;

  bool operator==(const PenaltySpec&) const = default;

 private:
  PenaltyKind kind_;
  double a_;
};

/// Parses "l1" | "lasso" | "scad" | "mcp" (case-insensitive).
PenaltyKind parse_penalty_kind(std::string_view text);

/// The univariate problem min_β ½(z − β)² + Λ·p_λ(|β|).
struct ProxProblem {
  double z;
  double lambda;
  double capital_lambda;  // curvature weight Λ
};

double penalty_value(const PenaltySpec& spec, double t, double lambda);

/// p_λ'(t); right derivative at t = 0.
double penalty_deriv(const PenaltySpec& spec, double t, double lambda);

/// κ(ρ; v) for ρ = p_λ/λ. Closed intervals at the kinks.
double local_concavity(const PenaltySpec& spec, std::span<const double> v,
                       double lambda);

/// κ(p_λ) = sup of the negative secant slope of p_λ'.
double max_concavity(const PenaltySpec& spec, double lambda);

/// Global minimizer of ½(z − β)² + Λ·p_λ(|β|). When two minimizers tie,
/// returns the one of smaller magnitude.
double prox_univariate(const PenaltySpec& spec, const ProxProblem& prob);

/// The scalar objective minimized by prox_univariate.
double prox_objective(const PenaltySpec& spec, const ProxProblem& prob,
                      double beta);

}  // namespace icapath
