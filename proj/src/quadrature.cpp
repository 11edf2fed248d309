#include "mixreg/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

namespace mixreg {

void QuadratureSpec::validate() const {
  const int min_nodes = kind == QuadratureKind::GradedLegendre ? 8 : 16;
  if (nodes_per_axis < min_nodes)
    throw Error(ErrorCode::InvalidInput, "nodes_per_axis must be >= " + std::to_string(min_nodes));
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidInput, "quadrature tolerance must be > 0");
  if (max_doublings < 1) throw Error(ErrorCode::InvalidInput, "max_doublings must be >= 1");
}

namespace quad {
namespace {

Rule make_legendre(int n) {
  Rule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

// Probabilists' Hermite recurrence: Jacobi matrix with off-diagonal sqrt(k).
Rule make_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  Rule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v * v;
  }
  return rule;
}

template <class Make>
const Rule& cached(std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mu, int n, Make make) {
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(make(n));
  return *slot;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  if (n < 1) throw Error(ErrorCode::InvalidInput, "Gauss-Legendre order must be >= 1");
  return cached(cache, mu, n, make_legendre);
}

const Rule& gauss_hermite(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  if (n < 1) throw Error(ErrorCode::InvalidInput, "Gauss-Hermite order must be >= 1");
  return cached(cache, mu, n, make_hermite);
}

void Breaks::finish(double lo, double hi) {
  std::size_t m = 0;
  for (std::size_t i = 0; i < size; ++i)
    if (pts[i] > lo && pts[i] < hi) pts[m++] = pts[i];
  size = m;
  push(lo);
  push(hi);
  std::sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(size));
  const double eps = 1e-13 * (hi - lo);
  m = 1;
  for (std::size_t i = 1; i < size; ++i)
    if (pts[i] - pts[m - 1] > eps) pts[m++] = pts[i];
  // Keep the upper end exact.
  pts[m - 1] = hi;
  size = m;
}

Breaks normal_breaks(double center, double width) {
  Breaks br;
  const double L = kTruncation;
  for (double z = -L + kMaxPanel; z < L; z += kMaxPanel) br.push(z);
  if (width < kMaxPanel) {
    const double c = std::clamp(center, -L, L);
    br.push(c);
    for (double h = width; h < 2.0 * L; h *= 2.0) {
      br.push(c - h);
      br.push(c + h);
    }
  }
  br.finish(-L, L);
  return br;
}

Breaks radial_breaks(double smallest_scale) {
  Breaks br;
  const double L = kTruncation;
  for (double r = kMaxPanel; r < L; r += kMaxPanel) br.push(r);
  const double rmin = std::clamp(smallest_scale / 32.0, 1e-9, 1.0 / 32.0);
  for (double r = rmin; r < kMaxPanel; r *= 2.0) br.push(r);
  br.finish(0.0, L);
  return br;
}

}  // namespace quad
}  // namespace mixreg
