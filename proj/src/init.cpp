#include "mixreg/init.hpp"

#include <cmath>
#include <string>

#include "mixreg/csv.hpp"
#include "mixreg/error.hpp"
#include "mixreg/kernels.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

PhaseData phase_transform(const Dataset& data, double sigma) {
  data.validate();
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidInput, "sigma must be finite and > 0");
  return {data.X, (data.Y.array().square() - sigma * sigma).matrix()};
}

EigenPair dominant_eigenpair(const Eigen::MatrixXd& S, int max_iters, double tol) {
  const Eigen::Index d = S.rows();
  if (d < 1 || S.cols() != d) throw Error(ErrorCode::InvalidInput, "matrix must be square and nonempty");
  if (!S.allFinite()) throw Error(ErrorCode::NonFiniteInput, "matrix");
  if (max_iters < 1) throw Error(ErrorCode::InitializationFailure, "power_iters must be >= 1");

  const double shift = S.norm();  // Frobenius norm bounds every |eigenvalue|
  EigenPair out;
  if (shift == 0.0) {
    out.vector = Vector::Unit(d, 0);
    return out;
  }

  // Start from the column of largest norm (it mixes eigenvectors in
  // proportion to their eigenvalues) plus a fixed pseudo-random component, so
  // the start is never exactly a non-dominant eigenvector.
  Eigen::Index col = 0;
  S.colwise().norm().maxCoeff(&col);
  Vector v = S.col(col) + shift * Vector::Unit(d, col);
  if (v.norm() > 0.0) v.normalize();
  Rng rng(Seed{0x5eed, static_cast<std::uint64_t>(d)});
  Vector jitter(d);
  for (Eigen::Index j = 0; j < d; ++j) jitter(j) = rng.normal();
  v += 0.1 * jitter.normalized();
  v.normalize();

  for (int it = 1; it <= max_iters; ++it) {
    const Vector sv = S * v;
    const double mu = v.dot(sv);
    const double residual = (sv - mu * v).norm();
    out.iterations = it;
    if (residual <= tol * std::abs(mu)) {
      out.value = mu;
      out.residual = residual;
      out.vector = v;
      break;
    }
    v = sv + shift * v;
    v.normalize();
    if (it == max_iters)
      throw Error(ErrorCode::InitializationFailure,
                  "power iteration did not converge in " + std::to_string(max_iters) +
                      " iterations (residual " + csv::format(residual) + ")");
  }
  Eigen::Index lead = 0;
  const double top = out.vector.cwiseAbs().maxCoeff();
  while (std::abs(out.vector(lead)) != top) ++lead;
  if (out.vector(lead) < 0.0) out.vector = -out.vector;
  return out;
}

SpectralInit spectral_init(const Dataset& data, double sigma, int power_iters, double tol) {
  const PhaseData phase = phase_transform(data, sigma);
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.dim();
  if (n < d) throw Error(ErrorCode::InvalidInput, "spectral init needs n >= d");
  const double xnorm = data.X.squaredNorm();
  if (!(xnorm > 0.0)) throw Error(ErrorCode::InvalidInput, "all covariates are zero");

  SpectralInit out;
  out.lambda_sq = static_cast<double>(d) * phase.Yprime.sum() / xnorm;
  if (!(out.lambda_sq > 0.0))
    throw Error(ErrorCode::InitializationFailure,
                "lambda^2 = " + csv::format(out.lambda_sq) + " <= 0; noise dominates the signal");
  out.lambda = std::sqrt(out.lambda_sq);
  out.top = dominant_eigenpair(kernels::weighted_gram(phase.X, phase.Yprime), power_iters, tol);
  out.theta0 = out.lambda * out.top.vector;
  return out;
}

}  // namespace mixreg
