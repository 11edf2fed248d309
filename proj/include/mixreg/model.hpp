#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "mixreg/rng.hpp"

namespace mixreg {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class CovariateDist { StandardGaussian, UniformUnitVariance };
enum class NoiseDist { Gaussian, UniformUnitVariance, Laplace };

std::string to_string(CovariateDist dist);
std::string to_string(NoiseDist dist);
CovariateDist parse_covariate_dist(const std::string& name);
NoiseDist parse_noise_dist(const std::string& name);

/// Symmetric two-component mixture of linear regressions:
///   Y = R <theta_star, X> + eps,  R = +-1 w.p. 1/2.
/// Uniform covariates live on [-sqrt3, sqrt3] per coordinate and uniform
/// noise on [-sigma sqrt3, sigma sqrt3], so every kind has unit (resp. sigma^2)
/// variance. Laplace noise has scale sigma / sqrt2.
struct ModelConfig {
  Vector theta_star;
  double sigma = 1.0;
  CovariateDist covariate_dist = CovariateDist::StandardGaussian;
  NoiseDist noise_dist = NoiseDist::Gaussian;

  Eigen::Index dim() const { return theta_star.size(); }
  /// Throws InvalidInput unless d >= 1 and sigma > 0 (and everything finite).
  void validate() const;
};

/// Observed data; the mixture labels are never stored.
struct Dataset {
  RowMatrix X;
  Vector Y;

  Eigen::Index n() const { return Y.size(); }
  Eigen::Index dim() const { return X.cols(); }
  /// Throws NonFiniteInput / InvalidInput on malformed data.
  void validate() const;
  /// Rows [begin, begin + count).
  Dataset rows(Eigen::Index begin, Eigen::Index count) const;
};

Dataset generate_dataset(const ModelConfig& config, Eigen::Index n, Seed seed);

/// Mixture log-likelihood, including the covariate density term, evaluated
/// with log-sum-exp. Exactly symmetric under theta -> -theta.
double log_likelihood(const Dataset& data, const Vector& theta, double sigma);

/// CSV with header x1,...,xd,y and 17 significant digits per value.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

}  // namespace mixreg
