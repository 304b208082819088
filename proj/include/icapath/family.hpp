#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <string_view>

namespace icapath {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class FamilyKind { Gaussian, Logistic, Poisson };

/// Canonical exponential family with cumulant b(θ) and dispersion φ.
/// Logistic and Poisson fix φ = 1.
class FamilySpec {
 public:
  explicit FamilySpec(FamilyKind kind, double dispersion = 1.0);

  static FamilySpec gaussian(double sigma2 = 1.0);
  static FamilySpec logistic();
  static FamilySpec poisson();

  FamilyKind kind() const { return kind_; }
  double dispersion() const { return dispersion_; }
  std::string name() const;

  bool operator==(const FamilySpec&) const = default;

 private:
  FamilyKind kind_;
  double dispersion_;
};

FamilyKind parse_family_kind(std::string_view text);

// Rates above exp(30) are refused when sampling Poisson responses.
inline constexpr double kPoissonThetaGuard = 30.0;

double cumulant(const FamilySpec& fam, double theta);     // b(θ)
double mean(const FamilySpec& fam, double theta);         // b'(θ)
double variance_fn(const FamilySpec& fam, double theta);  // b''(θ) > 0

/// θ = Xβ with μ(θ) and diag Σ(θ) evaluated componentwise.
struct LinearPredictorState {
  Vector theta;
  Vector mu;
  Vector sigma_diag;
};

LinearPredictorState predictor_state(const FamilySpec& fam, const Matrix& x,
                                     const Vector& beta);

/// Throws DataError unless every response lies in the family's support.
void validate_response(const FamilySpec& fam, const Vector& y);

/// ℓ_n(β) = n⁻¹[yᵀXβ − 1ᵀb(Xβ)].
double log_likelihood(const FamilySpec& fam, const Vector& y, const Matrix& x,
                      const Vector& beta);
double log_likelihood_from_theta(const FamilySpec& fam, const Vector& y,
                                 const Vector& theta);

/// ∇ℓ_n(β) = n⁻¹Xᵀ(y − μ(Xβ)).
Vector score(const FamilySpec& fam, const Vector& y, const Matrix& x,
             const Vector& beta);

/// −∇²ℓ_n(β) = n⁻¹XᵀΣ(Xβ)X.
Matrix fisher_information(const FamilySpec& fam, const Matrix& x,
                          const Vector& beta);

/// Standard GLM deviance: Gaussian ‖y − Xβ‖²/φ, binomial and Poisson
/// deviances with 0·log 0 = 0.
double deviance(const FamilySpec& fam, const Vector& y, const Matrix& x,
                const Vector& beta);
double deviance_from_theta(const FamilySpec& fam, const Vector& y,
                           const Vector& theta);

/// Draws y_i from the family at natural parameter θ_i.
Vector sample_response(const FamilySpec& fam, const Vector& theta,
                       std::mt19937_64& rng);

}  // namespace icapath
