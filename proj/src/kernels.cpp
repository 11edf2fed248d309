#include "mixreg/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace mixreg::kernels {
namespace {

using Index = Eigen::Index;

template <class Acc, class Body>
Acc chunked_reduce(Index n, const Acc& zero, Body body) {
  const Index chunks = (n + kChunkRows - 1) / kChunkRows;
  std::vector<Acc> parts(static_cast<std::size_t>(chunks), zero);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    const Index end = std::min(n, begin + kChunkRows);
    body(begin, end, parts[static_cast<std::size_t>(c)]);
  }
  Acc total = zero;
  for (const auto& p : parts) total += p;
  return total;
}

void gram_rows(const RowMatrix& X, Index begin, Index end, Eigen::MatrixXd& acc) {
  const Index d = X.cols();
  for (Index i = begin; i < end; ++i) {
    for (Index a = 0; a < d; ++a) {
      const double xa = X(i, a);
      for (Index b = 0; b <= a; ++b) acc(a, b) += xa * X(i, b);
    }
  }
}

void weighted_gram_rows(const RowMatrix& X, const Vector& w, Index begin, Index end,
                        Eigen::MatrixXd& acc) {
  const Index d = X.cols();
  for (Index i = begin; i < end; ++i) {
    const double wi = w(i);
    for (Index a = 0; a < d; ++a) {
      const double wxa = wi * X(i, a);
      for (Index b = 0; b <= a; ++b) acc(a, b) += wxa * X(i, b);
    }
  }
}

Eigen::MatrixXd finish_symmetric(Eigen::MatrixXd lower, Index n) {
  lower /= static_cast<double>(n);
  for (Index a = 0; a < lower.rows(); ++a)
    for (Index b = 0; b < a; ++b) lower(b, a) = lower(a, b);
  return lower;
}

void em_moment_rows(const RowMatrix& X, const Vector& Y, const Vector& theta, double inv_s2,
                    Index begin, Index end, Vector& acc) {
  for (Index i = begin; i < end; ++i) {
    const double y = Y(i);
    const double proj = X.row(i).dot(theta);
    const double w = std::tanh(y * proj * inv_s2) * y;
    acc.noalias() += w * X.row(i).transpose();
  }
}

// log(psi_s(y - m)/2 + psi_s(y + m)/2), written so that swapping m -> -m
// swaps the two exponents exactly.
double mixture_term(double y, double m, double sigma) {
  const double inv2s2 = 0.5 / (sigma * sigma);
  const double a = -(y - m) * (y - m) * inv2s2;
  const double b = -(y + m) * (y + m) * inv2s2;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi)) - std::numbers::ln2 -
         0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma);
}

void loglik_rows(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma,
                 Index begin, Index end, double& acc) {
  for (Index i = begin; i < end; ++i) acc += mixture_term(Y(i), X.row(i).dot(theta), sigma);
}

}  // namespace

Eigen::MatrixXd gram_serial(const RowMatrix& X) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  gram_rows(X, 0, X.rows(), acc);
  return finish_symmetric(std::move(acc), X.rows());
}

Eigen::MatrixXd gram(const RowMatrix& X) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  auto acc = chunked_reduce(X.rows(), zero, [&](Index b, Index e, Eigen::MatrixXd& part) {
    gram_rows(X, b, e, part);
  });
  return finish_symmetric(std::move(acc), X.rows());
}

Vector em_moment_serial(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma) {
  Vector acc = Vector::Zero(X.cols());
  em_moment_rows(X, Y, theta, 1.0 / (sigma * sigma), 0, X.rows(), acc);
  return acc / static_cast<double>(X.rows());
}

Vector em_moment(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma) {
  const double inv_s2 = 1.0 / (sigma * sigma);
  const Vector zero = Vector::Zero(X.cols());
  Vector acc = chunked_reduce(X.rows(), zero, [&](Index b, Index e, Vector& part) {
    em_moment_rows(X, Y, theta, inv_s2, b, e, part);
  });
  return acc / static_cast<double>(X.rows());
}

double mixture_loglik_serial(const RowMatrix& X, const Vector& Y, const Vector& theta,
                             double sigma) {
  double acc = 0.0;
  loglik_rows(X, Y, theta, sigma, 0, X.rows(), acc);
  return acc;
}

double mixture_loglik(const RowMatrix& X, const Vector& Y, const Vector& theta, double sigma) {
  return chunked_reduce(X.rows(), 0.0, [&](Index b, Index e, double& part) {
    loglik_rows(X, Y, theta, sigma, b, e, part);
  });
}

Eigen::MatrixXd weighted_gram_serial(const RowMatrix& X, const Vector& w) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  weighted_gram_rows(X, w, 0, X.rows(), acc);
  return finish_symmetric(std::move(acc), X.rows());
}

Eigen::MatrixXd weighted_gram(const RowMatrix& X, const Vector& w) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  auto acc = chunked_reduce(X.rows(), zero, [&](Index b, Index e, Eigen::MatrixXd& part) {
    weighted_gram_rows(X, w, b, e, part);
  });
  return finish_symmetric(std::move(acc), X.rows());
}

}  // namespace mixreg::kernels
