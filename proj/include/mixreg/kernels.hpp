#pragma once

// Row-reduction kernels behind the EM operator, the likelihood and the
// spectral initializer. Each comes in two flavours:
//
//   *_serial : one straight pass over the rows; the reference used by tests.
//   plain    : OpenMP over fixed 2048-row chunks whose partial sums are
//              combined in chunk order, so the result is bit-identical for
//              any thread count (and to the serial pass when n <= 2048).

#include <Eigen/Dense>

#include "mixreg/model.hpp"

namespace mixreg::kernels {

inline constexpr Eigen::Index kChunkRows = 2048;

/// (1/n) sum_i x_i x_i^T
Eigen::MatrixXd gram_serial(const RowMatrix& X);
Eigen::MatrixXd gram(const RowMatrix& X);

/// (1/n) sum_i tanh(y_i <theta, x_i> / sigma^2) x_i y_i, i.e. the bracketed
/// term of the empirical EM operator (2 phi(z) - 1 == tanh z).
Vector em_moment_serial(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma);
Vector em_moment(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma);

/// sum_i log(psi_sigma(y - m) / 2 + psi_sigma(y + m) / 2) with m = <theta, x_i>.
double mixture_loglik_serial(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma);
double mixture_loglik(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma);

/// (1/n) sum_i w_i x_i x_i^T
Eigen::MatrixXd weighted_gram_serial(const RowMatrix& X, const Vector& w);
Eigen::MatrixXd weighted_gram(const RowMatrix& X, const Vector& w);

}  // namespace mixreg::kernels
