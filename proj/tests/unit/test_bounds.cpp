#include <doctest.h>

#include <checks.hpp>

using namespace mixreg;
using namespace mixreg::testing;

TEST_CASE("scalar sigmoid inequalities hold on the whole grid") { CHECK(sigmoid_inequality_violations() == 0); }

TEST_CASE("E[u phi'(u)] is nonnegative for nonnegative affine parameters") {
  CHECK(affine_positivity_violations() == 0);
}

TEST_CASE("tail expectation of 2(1 - phi) obeys the mgf bound") { CHECK(tail_bound_violations(10) == 0); }

TEST_CASE("derivative of h in alpha obeys its bound") { CHECK(h_slope_violations(10) == 0); }

TEST_CASE("A, B and norm bounds hold whenever <theta, theta*> > 0") {
  CHECK(coefficient_bound_violations(40, 11) == 0);
}

TEST_CASE("contraction certificate holds with gamma from the closed form") {
  CHECK(certificate_violations(40, 12) == 0);
}

TEST_CASE("the checks detect a violated bound") {
  // Sanity check of the harness itself: a bound shifted below the true value fails.
  const auto v = expect_reduced<1>(1.0, 1.0, [](double s, double) { return quad::Values<1>{2.0 * phi(-s)}; });
  CHECK(v[0] > 0.0);
  CHECK(v[0] < std::pow(2.0, -0.5));
  CHECK_FALSE(v[0] < 0.5 * std::pow(2.0, -0.5));
}
