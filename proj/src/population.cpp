#include "mixreg/population.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "mixreg/csv.hpp"
#include "mixreg/error.hpp"

namespace mixreg {
namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidInput, "sigma must be finite and > 0");
}

void check_pair(const Vector& theta, const Vector& theta_star) {
  if (theta.size() != theta_star.size() || theta.size() < 1)
    throw Error(ErrorCode::InvalidInput, "theta and theta_star must have the same length d >= 1");
  if (!theta.allFinite() || !theta_star.allFinite())
    throw Error(ErrorCode::NonFiniteInput, "theta / theta_star");
}

// tanh(u) and sech^2(u) from a single exponential, safe for any |u|.
struct Sigmoid {
  double tanh;
  double sech2;
};

inline Sigmoid sigmoid_parts(double u) {
  const double e = std::exp(-2.0 * std::abs(u));
  const double t = (1.0 - e) / (1.0 + e);
  return {u < 0.0 ? -t : t, 4.0 * e / ((1.0 + e) * (1.0 + e))};
}

}  // namespace

Reduced2D reduce_2d(const Vector& theta, const Vector& theta_star, double sigma) {
  check_pair(theta, theta_star);
  check_sigma(sigma);
  const double tn = theta.norm();
  const double sn = theta_star.norm();
  if (tn == 0.0) throw Error(ErrorCode::ZeroVector, "theta is the zero vector");
  if (sn == 0.0) throw Error(ErrorCode::ZeroVector, "theta_star is the zero vector");

  const Vector u = theta / tn;
  const double along = u.dot(theta_star);
  Vector perp = theta_star - along * u;
  perp -= u.dot(perp) * u;  // second Gram-Schmidt pass

  const double s2 = sigma * sigma;
  Reduced2D r;
  r.theta_perp_inner = perp.norm();
  r.Gamma = theta.dot(theta_star) / s2;
  r.Lambda = (tn / s2) * std::sqrt(s2 + r.theta_perp_inner * r.theta_perp_inner);
  r.lambda_sq_direct = (tn * tn / (s2 * s2)) * (s2 + sn * sn) - r.Gamma * r.Gamma;
  r.eta = sn / sigma;
  r.eta_prime = tn / sigma;
  r.cos_alpha = std::clamp(along / sn, -1.0, 1.0);
  return r;
}

PopulationCoefficients population_coefficients(const Reduced2D& r, const QuadratureSpec& quad) {
  const auto v = expect_reduced<2>(
      r.Lambda, r.Gamma,
      [](double s, double z2) {
        const Sigmoid p = sigmoid_parts(s);
        return quad::Values<2>{p.tanh + s * p.sech2, z2 * z2 * p.sech2};
      },
      quad);
  // 2 phi(s) - 1 = tanh(s) and 2 phi'(s) = sech^2(s).
  return {v[0], (1.0 + r.eta * r.eta) * v[1]};
}

Vector population_em(const Vector& theta, const Vector& theta_star, double sigma,
                     const QuadratureSpec& quad) {
  check_pair(theta, theta_star);
  check_sigma(sigma);
  if (theta.norm() == 0.0) return Vector::Zero(theta.size());
  const auto c = population_coefficients(reduce_2d(theta, theta_star, sigma), quad);
  return c.A * theta_star + c.B * theta;
}

ContractionConstants contraction_constants_snr(double eta_prime, double eta, double cos_alpha) {
  if (!(cos_alpha > 0.0) || cos_alpha > 1.0 || !(eta > 0.0) || !(eta_prime > 0.0))
    throw Error(ErrorCode::InvalidInput, "need eta, eta' > 0 and cos(alpha) in (0, 1]");
  const double c = cos_alpha;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double prod = eta_prime * eta * c;
  const double k1 = 1.0 - eta * eta * c * c / (1.0 + eta * eta);
  const double k2 = 1.0 - prod / (1.0 + prod);

  ContractionConstants out;
  out.kappa = std::sqrt(std::max(k1, k2));
  const double lead = std::max(std::pow(k1, 0.25), std::pow(k2, 0.25));
  const double tail = s / c + 1.0 / prod;
  out.gamma_snr = lead * std::sqrt(1.0 + 4.0 * tail * tail);
  // theta* = eta e1, theta = eta' (c e1 + s e2), sigma = 1
  const double ratio = (eta_prime * eta * s + 1.0) / prod;
  out.gamma = std::sqrt(out.kappa) * std::sqrt(1.0 + 4.0 * ratio * ratio);
  const double k3 = out.kappa * out.kappa * out.kappa;
  const double tau = eta * (1.0 - out.kappa) / (2.0 * eta_prime * (1.0 + eta * eta) * k3);
  out.Delta = 0.5 * (1.0 - c * c) * tau / (tau + c);
  return out;
}

std::optional<ContractionConstants> contraction_constants(const Vector& theta, const Vector& theta_star,
                                                          double sigma) {
  check_pair(theta, theta_star);
  check_sigma(sigma);
  const double inner = theta.dot(theta_star);
  if (!(inner > 0.0)) return std::nullopt;
  const Reduced2D r = reduce_2d(theta, theta_star, sigma);
  const double s2 = sigma * sigma;
  const double tn = theta.norm();
  const double sn = theta_star.norm();
  const double along = inner / tn;  // <theta_0, theta*>

  ContractionConstants out;
  const double k1 = 1.0 - along * along / (s2 + sn * sn);
  const double k2 = 1.0 - inner / (s2 + inner);
  out.kappa = std::sqrt(std::max(k1, k2));
  // |<theta_perp, theta*>| with theta_perp = ||theta|| theta_perp_0
  const double ratio = (tn * r.theta_perp_inner + s2) / inner;
  out.gamma = std::sqrt(out.kappa) * std::sqrt(1.0 + 4.0 * ratio * ratio);
  out.gamma_snr = contraction_constants_snr(r.eta_prime, r.eta, r.cos_alpha).gamma_snr;
  const double k3 = out.kappa * out.kappa * out.kappa;
  const double tau = s2 * sn * (1.0 - out.kappa) / (2.0 * tn * (s2 + sn * sn) * k3);
  const double rho = r.cos_alpha;
  out.Delta = 0.5 * (1.0 - rho * rho) * tau / (tau + rho);
  return out;
}

ContractivityReport contractivity(const Vector& theta, const Vector& theta_star, double sigma,
                                  const QuadratureSpec& quad) {
  const Reduced2D r = reduce_2d(theta, theta_star, sigma);
  const auto coef = population_coefficients(r, quad);
  const Vector m = coef.A * theta_star + coef.B * theta;

  ContractivityReport rep;
  rep.A = coef.A;
  rep.B = coef.B;
  rep.cos_alpha = r.cos_alpha;
  rep.eta = r.eta;
  rep.eta_prime = r.eta_prime;
  rep.error_before = (theta - theta_star).norm();
  rep.error_after = (m - theta_star).norm();
  rep.contracts_numeric = rep.error_after < rep.error_before;
  if (const auto k = contraction_constants(theta, theta_star, sigma)) {
    rep.kappa = k->kappa;
    rep.gamma = k->gamma;
    rep.gamma_snr = k->gamma_snr;
    rep.Delta = k->Delta;
    rep.contracts_formula = k->gamma < 1.0;
  }
  return rep;
}

std::string contractivity_csv_header() {
  return "cos_alpha,eta,eta_prime,A,B,kappa,gamma,gamma_snr,Delta,error_before,error_after,"
         "contracts_formula,contracts_numeric";
}

void write_contractivity_row(std::ostream& os, const ContractivityReport& r) {
  os << csv::format(r.cos_alpha) << ',' << csv::format(r.eta) << ',' << csv::format(r.eta_prime) << ','
     << csv::format(r.A) << ',' << csv::format(r.B) << ',' << csv::format(r.kappa) << ','
     << csv::format(r.gamma) << ',' << csv::format(r.gamma_snr) << ',' << csv::format(r.Delta) << ','
     << csv::format(r.error_before) << ',' << csv::format(r.error_after) << ','
     << (r.contracts_formula ? (*r.contracts_formula ? "1" : "0") : "") << ','
     << (r.contracts_numeric ? "1" : "0") << '\n';
}

double h_operator(double alpha, double beta, const QuadratureSpec& quad) {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw Error(ErrorCode::NonFiniteInput, "h_operator arguments");
  if (alpha == 0.0) return 0.0;
  // With S = alpha |Z2| (Z1 + beta |Z2|), the integrand is tanh(S) S / alpha.
  const auto v = expect_reduced<1>(
      alpha, alpha * beta,
      [](double s, double) { return quad::Values<1>{sigmoid_parts(s).tanh * s}; }, quad);
  return v[0] / alpha;
}

double g_operator(double alpha, double beta, const QuadratureSpec& quad) {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw Error(ErrorCode::NonFiniteInput, "g_operator arguments");
  if (alpha == 0.0) return 0.0;
  const auto v = expect_affine<1>(
      alpha, alpha * beta, [](double s) { return quad::Values<1>{sigmoid_parts(s).tanh * s}; }, quad);
  return v[0] / alpha;
}

MonteCarloEstimate mc_population_em(const Vector& theta, const Vector& theta_star, double sigma,
                                    long long n_samples, Seed seed) {
  check_pair(theta, theta_star);
  check_sigma(sigma);
  if (n_samples < 10000) throw Error(ErrorCode::InvalidInput, "n_samples must be >= 10000");
  constexpr long long kChunk = 65536;
  const Eigen::Index d = theta.size();
  const long long chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<Vector> sums(static_cast<std::size_t>(chunks), Vector::Zero(d));
  std::vector<Vector> squares(static_cast<std::size_t>(chunks), Vector::Zero(d));
  const double inv_s2 = 1.0 / (sigma * sigma);

#pragma omp parallel for schedule(static)
  for (long long c = 0; c < chunks; ++c) {
    Rng rng(seed, static_cast<std::uint64_t>(c));
    const long long count = std::min(kChunk, n_samples - c * kChunk);
    Vector x(d);
    Vector& sum = sums[static_cast<std::size_t>(c)];
    Vector& sq = squares[static_cast<std::size_t>(c)];
    for (long long i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) x(j) = rng.normal();
      const double label = rng.rademacher();
      const double y = label * x.dot(theta_star) + sigma * rng.normal();
      const double weight = 1.0 + std::tanh(y * x.dot(theta) * inv_s2);  // 2 phi(z)
      const double wy = weight * y;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double v = wy * x(j);
        sum(j) += v;
        sq(j) += v * v;
      }
    }
  }

  Vector total = Vector::Zero(d), total_sq = Vector::Zero(d);
  for (long long c = 0; c < chunks; ++c) {
    total += sums[static_cast<std::size_t>(c)];
    total_sq += squares[static_cast<std::size_t>(c)];
  }
  const double n = static_cast<double>(n_samples);
  MonteCarloEstimate out{total / n, Vector(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = std::max(0.0, (total_sq(j) - n * out.estimate(j) * out.estimate(j)) / (n - 1.0));
    out.se(j) = std::sqrt(var / n);
  }
  return out;
}

AntiContractiveWitness find_anti_contractive(const Vector& theta_star, double sigma,
                                             const QuadratureSpec& quad, int search_budget,
                                             double min_margin) {
  check_sigma(sigma);
  if (theta_star.size() < 1 || !theta_star.allFinite())
    throw Error(ErrorCode::InvalidInput, "theta_star must be a finite vector");
  const double sn = theta_star.norm();
  if (sn == 0.0) throw Error(ErrorCode::ZeroVector, "theta_star is the zero vector");
  const Eigen::Index d = theta_star.size();
  const Vector u = theta_star / sn;

  // Unit vector orthogonal to theta*, built from the least aligned axis.
  Vector e = Vector::Zero(d);
  if (d > 1) {
    Eigen::Index axis = 0;
    u.cwiseAbs().minCoeff(&axis);
    e(axis) = 1.0;
    e -= u.dot(e) * u;
    e -= u.dot(e) * u;
    e.normalize();
  }

  int evaluations = 0;
  for (int diag = 0; diag < 64 && evaluations < search_budget; ++diag) {
    for (int k = 0; k <= diag && evaluations < search_budget; ++k) {
      const int j = diag - k;
      if (d == 1 && j > 0) continue;
      const double radius = sigma * std::ldexp(1.0, -k);
      const double c = d == 1 ? 1.0 : std::pow(10.0, -(j + 1));
      const Vector theta = radius * (c * u + std::sqrt(1.0 - c * c) * e);
      if (!(theta.dot(theta_star) > 0.0)) continue;
      ++evaluations;
      const auto coef = population_coefficients(reduce_2d(theta, theta_star, sigma), quad);
      const Vector m = coef.A * theta_star + coef.B * theta;
      const double margin = (m - theta_star).norm() - (theta - theta_star).norm();
      if (margin > min_margin) return {theta, margin, coef.A, coef.B, evaluations};
    }
  }
  throw Error(ErrorCode::NotFoundWithinBudget,
              "no anti-contractive point after " + std::to_string(evaluations) + " evaluations");
}

}  // namespace mixreg
