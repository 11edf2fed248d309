#include <doctest.h>

#include <cmath>
#include <numbers>

#include <mixreg/error.hpp>
#include <mixreg/population.hpp>
#include <mixreg/quadrature.hpp>

using namespace mixreg;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Independent 1-D oracle: composite Simpson on [0, 10] against the
// half-normal density of |Z2|.
template <class F>
double half_normal_simpson(F&& f, int panels = 200000) {
  const double h = 10.0 / panels;
  const auto density = [](double r) { return 2.0 * std::exp(-0.5 * r * r) / std::sqrt(2.0 * std::numbers::pi); };
  double acc = f(0.0) * density(0.0) + f(10.0) * density(10.0);
  for (int k = 1; k < panels; ++k) {
    const double r = k * h;
    acc += (k % 2 ? 4.0 : 2.0) * f(r) * density(r);
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int n : {8, 20, 40}) {
    const auto& rule = quad::gauss_legendre(n);
    double w = 0.0, x2 = 0.0, x2n1 = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      w += rule.weights[k];
      x2 += rule.weights[k] * rule.nodes[k] * rule.nodes[k];
      x2n1 += rule.weights[k] * std::pow(rule.nodes[k], 2 * n - 2);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(x2n1 == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-12));
  }
}

TEST_CASE("Gauss-Hermite reproduces normal moments") {
  const auto& rule = quad::gauss_hermite(40);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double z = rule.nodes[k], w = rule.weights[k];
    m0 += w;
    m2 += w * z * z;
    m4 += w * std::pow(z, 4);
    m6 += w * std::pow(z, 6);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("affine expectations match closed forms") {
  for (double a : {0.1, 1.0, 7.0, 300.0})
    for (double b : {-2.0, 0.0, 0.5, 40.0}) {
      const auto sq = expect_affine<1>(a, b, [](double u) { return quad::Values<1>{u * u}; });
      CHECK(sq[0] == doctest::Approx(a * a + b * b).epsilon(1e-10));
      // E[Phi(aZ + b)] = Phi(b / sqrt(1 + a^2)); a sharp step for large a.
      const auto cdf = expect_affine<1>(a, b, [](double u) { return quad::Values<1>{normal_cdf(u)}; });
      CHECK(std::abs(cdf[0] - normal_cdf(b / std::sqrt(1.0 + a * a))) < 1e-10);
    }
  const auto ex = expect_affine<1>(0.5, 0.3, [](double u) { return quad::Values<1>{std::exp(u)}; });
  CHECK(ex[0] == doctest::Approx(std::exp(0.3 + 0.125)).epsilon(1e-12));
}

TEST_CASE("reduced expectations match closed forms and a 1-D oracle") {
  for (double L : {0.0, 0.3, 2.0, 40.0})
    for (double G : {-1.0, 0.0, 1.0, 1600.0}) {
      const auto v = expect_reduced<1>(L, G, [](double s, double) { return quad::Values<1>{s * s}; });
      CHECK(v[0] == doctest::Approx(L * L + 3.0 * G * G).epsilon(1e-10));
    }
  // E[Phi(L Z1 r + G r^2)] = E_r[Phi(G r^2 / sqrt(1 + L^2 r^2))].
  for (double L : {0.5, 5.0, 60.0})
    for (double G : {-3.0, 0.2, 25.0, 2500.0}) {
      const auto v = expect_reduced<1>(L, G, [](double s, double) { return quad::Values<1>{normal_cdf(s)}; });
      const double oracle =
          half_normal_simpson([&](double r) { return normal_cdf(G * r * r / std::sqrt(1.0 + L * L * r * r)); });
      CHECK(std::abs(v[0] - oracle) < 1e-9);
    }
}

TEST_CASE("doubling the nodes moves A and B by less than 1e-9 relative") {
  QuadratureSpec fine;
  fine.nodes_per_axis = 2 * QuadratureSpec{}.nodes_per_axis;
  for (double eta : {0.5, 1.0, 5.0, 40.0, 100.0})
    for (double eta_p : {0.01, 1.0, 20.0})
      for (double c : {-0.9, 0.0, 0.3, 0.99}) {
        Vector ts(2), th(2);
        ts << eta, 0.0;
        th << eta_p * c, eta_p * std::sqrt(1.0 - c * c);
        const auto r = reduce_2d(th, ts, 1.0);
        const auto a = population_coefficients(r);
        const auto b = population_coefficients(r, fine);
        CHECK(std::abs(a.A - b.A) <= 1e-9 * std::max(1.0, std::abs(b.A)));
        CHECK(std::abs(a.B - b.B) <= 1e-9 * std::max(1.0, std::abs(b.B)));
      }
}

TEST_CASE("tensor Gauss-Hermite cannot resolve the high-SNR sigmoid step") {
  // Documents why the graded rule is the default: at theta = theta* the
  // transition of tanh(S) sits at |Z2| ~ 1/eta^2, inside the first node.
  Vector ts(2);
  ts << 10.0, 0.0;
  const auto r = reduce_2d(ts, ts, 1.0);
  CHECK_THROWS_AS(population_coefficients(r, QuadratureSpec::hermite(80)), Error);
  try {
    population_coefficients(r, QuadratureSpec::hermite(80));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureNotConverged);
  }
  const auto g = population_coefficients(r);
  CHECK(std::abs(g.A + g.B - 1.0) < 1e-12);
}

TEST_CASE("Gauss-Hermite agrees with the graded rule on smooth low-SNR integrands") {
  const auto smooth = [](double u) { return quad::Values<1>{std::exp(-u * u)}; };
  const auto gh = expect_affine<1>(0.7, 0.2, smooth, QuadratureSpec::hermite(40));
  const auto gl = expect_affine<1>(0.7, 0.2, smooth);
  CHECK(gh[0] == doctest::Approx(gl[0]).epsilon(1e-12));
  // Exact: E[exp(-(aZ+b)^2)] = exp(-b^2 / (1 + 2a^2)) / sqrt(1 + 2a^2).
  CHECK(gl[0] == doctest::Approx(std::exp(-0.04 / 1.98) / std::sqrt(1.98)).epsilon(1e-12));
}

TEST_CASE("quadrature spec validation") {
  QuadratureSpec bad;
  bad.nodes_per_axis = 4;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(QuadratureSpec::hermite(8).validate(), Error);
  QuadratureSpec neg;
  neg.tolerance = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
  CHECK_NOTHROW(QuadratureSpec{}.validate());
}
