#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mixreg/model.hpp"
#include "mixreg/quadrature.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

/// Scalars of the two-variable reduction
///   W <theta, X> / sigma^2  =D  Lambda Z1 |Z2| + Gamma Z2^2,   W = <theta*, X> + eps.
struct Reduced2D {
  double Lambda = 0.0;
  double Gamma = 0.0;
  /// ||theta*|| / sigma
  double eta = 0.0;
  /// ||theta|| / sigma
  double eta_prime = 0.0;
  double cos_alpha = 0.0;
  /// <theta_perp_0, theta*> with theta_perp_0 the unit vector of span{theta, theta*}
  /// orthogonal to theta, oriented so this is >= 0.
  double theta_perp_inner = 0.0;
  /// Lambda^2 via (||theta||^2 / sigma^4)(sigma^2 + ||theta*||^2) - Gamma^2. Lambda
  /// itself uses the cancellation-free perpendicular form.
  double lambda_sq_direct = 0.0;
};

/// Throws ZeroVector if theta or theta_star is zero.
Reduced2D reduce_2d(const Vector& theta, const Vector& theta_star, double sigma);

/// M(theta) = A theta* + B theta.
struct PopulationCoefficients {
  double A = 0.0;
  double B = 0.0;
};

/// A = E[2 phi(S) + 2 S phi'(S) - 1],  B = 2 (1 + eta^2) E[Z2^2 phi'(S)],
/// S = Lambda Z1 |Z2| + Gamma Z2^2.
PopulationCoefficients population_coefficients(const Reduced2D& r, const QuadratureSpec& quad = {});

/// Population EM operator. M(0) = 0.
Vector population_em(const Vector& theta, const Vector& theta_star, double sigma,
                     const QuadratureSpec& quad = {});

/// Closed-form contraction constants, defined only when <theta, theta*> > 0.
struct ContractionConstants {
  double kappa = 0.0;
  /// sqrt(kappa) sqrt(1 + 4((|<theta_perp, theta*>| + sigma^2) / <theta, theta*>)^2)
  double gamma = 0.0;
  /// The same constant rewritten through eta', eta and cos(alpha).
  double gamma_snr = 0.0;
  /// Cone-expansion factor: the cosine between M(theta) and theta* is at
  /// least (1 + Delta) cos(alpha).
  double Delta = 0.0;
};

std::optional<ContractionConstants> contraction_constants(const Vector& theta, const Vector& theta_star,
                                                          double sigma);
/// Same constants from (eta', eta, cos alpha) directly; requires cos_alpha > 0.
ContractionConstants contraction_constants_snr(double eta_prime, double eta, double cos_alpha);

struct ContractivityReport {
  double A = 0.0;
  double B = 0.0;
  std::optional<double> kappa;
  std::optional<double> gamma;
  std::optional<double> gamma_snr;
  std::optional<double> Delta;
  double cos_alpha = 0.0;
  double eta = 0.0;
  double eta_prime = 0.0;
  /// ||theta - theta*|| and ||M(theta) - theta*||
  double error_before = 0.0;
  double error_after = 0.0;
  /// gamma < 1 (absent when gamma is)
  std::optional<bool> contracts_formula;
  bool contracts_numeric = false;
};

ContractivityReport contractivity(const Vector& theta, const Vector& theta_star, double sigma,
                                  const QuadratureSpec& quad = {});

std::string contractivity_csv_header();
void write_contractivity_row(std::ostream& os, const ContractivityReport& report);

/// One-dimensional population EM operator of this model (theta* = beta, sigma = 1):
///   h(alpha, beta) = E[(2 phi(alpha |Z2| (Z1 + beta |Z2|)) - 1) |Z2| (Z1 + beta |Z2|)].
double h_operator(double alpha, double beta, const QuadratureSpec& quad = {});
/// Population EM operator of the symmetric two-Gaussian mixture:
///   g(alpha, beta) = E[(2 phi(alpha (Z1 + beta)) - 1)(Z1 + beta)].
double g_operator(double alpha, double beta, const QuadratureSpec& quad = {});

struct MonteCarloEstimate {
  Vector estimate;
  /// Per-coordinate standard error.
  Vector se;
};

/// Requires n_samples >= 10^4. Plain Monte-Carlo average of 2 phi(Y <theta, X> / sigma^2) X Y over fresh
/// draws of the Gaussian model. Work is split into fixed 65536-sample chunks,
/// each on its own sub-stream, so the result does not depend on thread count.
MonteCarloEstimate mc_population_em(const Vector& theta, const Vector& theta_star, double sigma,
                                    long long n_samples, Seed seed);

struct AntiContractiveWitness {
  Vector theta;
  /// ||M(theta) - theta*|| - ||theta - theta*||, > 0
  double margin = 0.0;
  double A = 0.0;
  double B = 0.0;
  int evaluations = 0;
};

/// Searches for theta with <theta, theta*> > 0 that the population operator
/// pushes away from theta*. Candidates are r (c u* + sqrt(1 - c^2) e) with
/// u* = theta*/||theta*||, e a fixed unit vector orthogonal to theta*,
/// r = sigma 2^-k and c = 10^-(j+1), visited in order of k + j. Every candidate
/// costs one quadrature evaluation of M; throws NotFoundWithinBudget when
/// `search_budget` evaluations find no margin above `min_margin`.
AntiContractiveWitness find_anti_contractive(const Vector& theta_star, double sigma,
                                             const QuadratureSpec& quad = {}, int search_budget = 64,
                                             double min_margin = 1e-6);

}  // namespace mixreg
