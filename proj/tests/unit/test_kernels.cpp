#include <doctest.h>

#include <omp.h>

#include <mixreg/kernels.hpp>
#include <mixreg/model.hpp>

using namespace mixreg;

namespace {

Dataset sample(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  ModelConfig m;
  m.theta_star = Vector::LinSpaced(d, -1.0, 2.0);
  return generate_dataset(m, n, Seed{seed, 0});
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("chunked kernels agree with the serial reference") {
  const Dataset data = sample(20000, 4, 1);
  const Vector th = Vector::LinSpaced(4, 0.5, -0.5);
  const Vector w = data.Y.array().square() - 1.0;
  CHECK(rel(kernels::gram(data.X), kernels::gram_serial(data.X)) < 1e-13);
  CHECK(rel(kernels::em_moment(data.X, data.Y, th, 0.7), kernels::em_moment_serial(data.X, data.Y, th, 0.7)) < 1e-13);
  CHECK(rel(kernels::weighted_gram(data.X, w), kernels::weighted_gram_serial(data.X, w)) < 1e-13);
  const double a = kernels::mixture_loglik(data.X, data.Y, th, 0.7);
  const double b = kernels::mixture_loglik_serial(data.X, data.Y, th, 0.7);
  CHECK(std::abs(a - b) <= 1e-13 * std::abs(b));
}

TEST_CASE("a single chunk is bit-identical to the serial pass") {
  const Dataset data = sample(kernels::kChunkRows, 3, 2);
  const Vector th = Vector::Ones(3);
  CHECK(kernels::gram(data.X) == kernels::gram_serial(data.X));
  CHECK(kernels::em_moment(data.X, data.Y, th, 1.0) == kernels::em_moment_serial(data.X, data.Y, th, 1.0));
  CHECK(kernels::mixture_loglik(data.X, data.Y, th, 1.0) == kernels::mixture_loglik_serial(data.X, data.Y, th, 1.0));
}

TEST_CASE("results do not depend on the thread count") {
  const Dataset data = sample(30001, 3, 3);
  const Vector th = Vector::Ones(3);
  const Vector w = data.Y;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Eigen::MatrixXd g1 = kernels::gram(data.X);
  const Vector m1 = kernels::em_moment(data.X, data.Y, th, 1.0);
  const double l1 = kernels::mixture_loglik(data.X, data.Y, th, 1.0);
  const Eigen::MatrixXd s1 = kernels::weighted_gram(data.X, w);
  omp_set_num_threads(4);
  CHECK(kernels::gram(data.X) == g1);
  CHECK(kernels::em_moment(data.X, data.Y, th, 1.0) == m1);
  CHECK(kernels::mixture_loglik(data.X, data.Y, th, 1.0) == l1);
  CHECK(kernels::weighted_gram(data.X, w) == s1);
  omp_set_num_threads(saved);
}

TEST_CASE("em_moment weight saturates without overflow") {
  Dataset data{RowMatrix::Ones(2, 1), Vector(2)};
  data.Y << 1.0, -1.0;
  const Vector th = Vector::Constant(1, 1e6);
  const Vector m = kernels::em_moment(data.X, data.Y, th, 1e-3);
  CHECK(m(0) == doctest::Approx(1.0));
}
