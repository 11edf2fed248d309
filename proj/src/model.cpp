#include "mixreg/model.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "mixreg/csv.hpp"
#include "mixreg/error.hpp"
#include "mixreg/kernels.hpp"

namespace mixreg {
namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

double draw_covariate(Rng& rng, CovariateDist dist) {
  switch (dist) {
    case CovariateDist::StandardGaussian: return rng.normal();
    case CovariateDist::UniformUnitVariance: return rng.uniform(-kSqrt3, kSqrt3);
  }
  return 0.0;
}

double draw_noise(Rng& rng, NoiseDist dist, double sigma) {
  switch (dist) {
    case NoiseDist::Gaussian: return sigma * rng.normal();
    case NoiseDist::UniformUnitVariance: return rng.uniform(-sigma * kSqrt3, sigma * kSqrt3);
    case NoiseDist::Laplace: return rng.laplace(sigma / std::numbers::sqrt2);
  }
  return 0.0;
}

}  // namespace

std::string to_string(CovariateDist dist) {
  return dist == CovariateDist::StandardGaussian ? "gaussian" : "uniform";
}

std::string to_string(NoiseDist dist) {
  switch (dist) {
    case NoiseDist::Gaussian: return "gaussian";
    case NoiseDist::UniformUnitVariance: return "uniform";
    case NoiseDist::Laplace: return "laplace";
  }
  return "?";
}

CovariateDist parse_covariate_dist(const std::string& name) {
  if (name == "gaussian") return CovariateDist::StandardGaussian;
  if (name == "uniform") return CovariateDist::UniformUnitVariance;
  throw Error(ErrorCode::InvalidInput, "unknown covariate distribution '" + name + "'");
}

NoiseDist parse_noise_dist(const std::string& name) {
  if (name == "gaussian") return NoiseDist::Gaussian;
  if (name == "uniform") return NoiseDist::UniformUnitVariance;
  if (name == "laplace") return NoiseDist::Laplace;
  throw Error(ErrorCode::InvalidInput, "unknown noise distribution '" + name + "'");
}

void ModelConfig::validate() const {
  if (theta_star.size() < 1) throw Error(ErrorCode::InvalidInput, "theta_star must have d >= 1");
  if (!theta_star.allFinite()) throw Error(ErrorCode::NonFiniteInput, "theta_star");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidInput, "sigma must be finite and > 0");
}

void Dataset::validate() const {
  if (Y.size() < 1) throw Error(ErrorCode::InvalidInput, "dataset is empty");
  if (X.rows() != Y.size()) throw Error(ErrorCode::InvalidInput, "X rows != length of Y");
  if (X.cols() < 1) throw Error(ErrorCode::InvalidInput, "dataset has no covariates");
  if (!X.allFinite() || !Y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "dataset");
}

Dataset Dataset::rows(Eigen::Index begin, Eigen::Index count) const {
  return Dataset{X.middleRows(begin, count), Y.segment(begin, count)};
}

Dataset generate_dataset(const ModelConfig& config, Eigen::Index n, Seed seed) {
  config.validate();
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1");
  const Eigen::Index d = config.dim();
  Dataset data{RowMatrix(n, d), Vector(n)};
  Rng rng(seed);
  // Per row: d covariates, then the label, then the noise.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = draw_covariate(rng, config.covariate_dist);
    const double label = rng.rademacher();
    const double noise = draw_noise(rng, config.noise_dist, config.sigma);
    data.Y(i) = label * data.X.row(i).dot(config.theta_star) + noise;
  }
  return data;
}

double log_likelihood(const Dataset& data, const Vector& theta, double sigma) {
  data.validate();
  if (theta.size() != data.dim()) throw Error(ErrorCode::InvalidInput, "theta has wrong length");
  if (!theta.allFinite()) throw Error(ErrorCode::NonFiniteInput, "theta");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidInput, "sigma must be > 0");
  const double d = static_cast<double>(data.dim());
  const double covariate_term =
      -0.5 * d * std::log(2.0 * std::numbers::pi) * static_cast<double>(data.n()) -
      0.5 * data.X.squaredNorm();
  return covariate_term + kernels::mixture_loglik(data.X, data.Y, theta, sigma);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (Eigen::Index j = 0; j < data.dim(); ++j) os << 'x' << (j + 1) << ',';
  os << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) os << csv::format(data.X(i, j)) << ',';
    os << csv::format(data.Y(i)) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
  }
  const auto header = csv::split(line);
  if (header.size() < 2 || header.back() != "y")
    throw Error(ErrorCode::InvalidInput, "dataset CSV header must be x1,...,xd,y");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  for (Eigen::Index j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1))
      throw Error(ErrorCode::InvalidInput, "unexpected column '" + header[static_cast<std::size_t>(j)] + "'");

  std::vector<double> values;
  Eigen::Index n = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = csv::split(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1)
      throw Error(ErrorCode::InvalidInput, "row " + std::to_string(n + 1) + " has wrong field count");
    for (const auto& f : fields) values.push_back(csv::parse_double(f));
    ++n;
  }
  Dataset data{RowMatrix(n, d), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = values[static_cast<std::size_t>(i * (d + 1) + j)];
    data.Y(i) = values[static_cast<std::size_t>(i * (d + 1) + d)];
  }
  data.validate();
  return data;
}

}  // namespace mixreg
