#pragma once

#include <Eigen/Dense>

#include "mixreg/model.hpp"

namespace mixreg {

/// Magnitude-only view of the data: Y'_i = Y_i^2 - sigma^2.
struct PhaseData {
  RowMatrix X;
  Vector Yprime;
};

PhaseData phase_transform(const Dataset& data, double sigma);

struct EigenPair {
  Vector vector;
  double value = 0.0;
  int iterations = 0;
  /// ||S v - mu v|| at exit
  double residual = 0.0;
};

/// Algebraically largest eigenpair of a symmetric matrix by power iteration on
/// S + ||S||_F I (the shift makes every eigenvalue nonnegative without changing
/// the eigenvectors). Stops when ||S v - mu v|| <= tol |mu|; throws
/// InitializationFailure after max_iters. The returned vector is unit length
/// with its first largest-magnitude coordinate positive.
EigenPair dominant_eigenpair(const Eigen::MatrixXd& S, int max_iters = 10000, double tol = 1e-10);

struct SpectralInit {
  Vector theta0;
  /// lambda^2 = d sum Y'_i / sum ||X_i||^2
  double lambda_sq = 0.0;
  double lambda = 0.0;
  EigenPair top;
};

/// theta0 = lambda * top eigenvector of (1/n) sum Y'_i X_i X_i^T.
SpectralInit spectral_init(const Dataset& data, double sigma, int power_iters = 10000, double tol = 1e-10);

}  // namespace mixreg
