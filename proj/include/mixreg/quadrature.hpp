#pragma once

// Gaussian expectations of sigmoid-type integrands.
//
// Two shapes cover every expectation in the library:
//
//   expect_affine : E[f(a Z + b)],                      Z ~ N(0, 1)
//   expect_reduced: E[f(L Z1 |Z2| + G Z2^2, |Z2|)],     Z1, Z2 iid N(0, 1)
//
// The default rule is a composite Gauss-Legendre scheme on [-10, 10] (Z) and
// [0, 10] (|Z2|). In Z the panels are graded geometrically away from the
// sigmoid transition z = -b/a, starting at its width 1/|a|; in |Z2| they are
// graded geometrically from a length scale below every feature of the inner
// integral (1/L, L/|G|, 1/sqrt|G|). A tensor Gauss-Hermite rule is kept as an
// alternative; it is exact for smooth integrands but cannot resolve the
// transition once L or G is large.
//
// Every public evaluation doubles the node count until two consecutive
// results agree to `tolerance` (relative, with a floor of 1) and throws
// QuadratureNotConverged if `max_doublings` doublings are not enough.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "mixreg/error.hpp"

namespace mixreg {

enum class QuadratureKind { GradedLegendre, HermiteTensor };

struct QuadratureSpec {
  QuadratureKind kind = QuadratureKind::GradedLegendre;
  /// Gauss-Legendre nodes per panel (graded) or Gauss-Hermite nodes per axis.
  int nodes_per_axis = 20;
  double tolerance = 1e-10;
  int max_doublings = 2;

  static QuadratureSpec hermite(int nodes = 80) {
    return QuadratureSpec{QuadratureKind::HermiteTensor, nodes, 1e-10, 1};
  }
  void validate() const;
};

namespace quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights on [-1, 1]. Cached; safe to call concurrently.
const Rule& gauss_legendre(int n);
/// Nodes and weights for E[f(Z)], Z ~ N(0, 1) (Golub-Welsch). Cached.
const Rule& gauss_hermite(int n);

inline constexpr double kTruncation = 10.0;
inline constexpr double kMaxPanel = 2.0;
inline constexpr std::size_t kMaxBreaks = 192;

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

struct Breaks {
  std::array<double, kMaxBreaks> pts{};
  std::size_t size = 0;
  void push(double x) {
    if (size < kMaxBreaks) pts[size++] = x;
  }
  void finish(double lo, double hi);
};

/// Panel edges on [-10, 10] graded around `center` starting at `width`.
Breaks normal_breaks(double center, double width);
/// Panel edges on [0, 10] graded from the smallest of `scales`.
Breaks radial_breaks(double smallest_scale);

template <std::size_t K>
using Values = std::array<double, K>;

template <std::size_t K>
inline void axpy(Values<K>& acc, double w, const Values<K>& v) {
  for (std::size_t k = 0; k < K; ++k) acc[k] += w * v[k];
}

/// E[f(aZ + b)] on the graded Legendre rule with n nodes per panel.
template <std::size_t K, class F>
Values<K> affine_legendre(double a, double b, F&& f, const Rule& rule) {
  if (a == 0.0) return f(b);
  const double width = std::max(1.0 / std::abs(a), 1e-9);
  const Breaks br = normal_breaks(-b / a, width);
  Values<K> acc{};
  for (std::size_t p = 0; p + 1 < br.size; ++p) {
    const double half = 0.5 * (br.pts[p + 1] - br.pts[p]);
    const double mid = 0.5 * (br.pts[p + 1] + br.pts[p]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double z = mid + half * rule.nodes[k];
      axpy(acc, half * rule.weights[k] * normal_pdf(z), f(a * z + b));
    }
  }
  return acc;
}

/// Smallest length scale in |Z2| at which E_{Z1}[f(L Z1 r + G r^2, r)] varies.
inline double reduced_scale(double Lambda, double Gamma) {
  double s = 1.0;
  const double L = std::abs(Lambda), G = std::abs(Gamma);
  if (L > 0.0) s = std::min(s, 1.0 / L);
  if (G > 0.0) {
    s = std::min(s, 1.0 / std::sqrt(G));
    if (L > 0.0) s = std::min(s, L / G);
  }
  return s;
}

template <std::size_t K, class F>
Values<K> reduced_legendre(double Lambda, double Gamma, F&& f, int n) {
  const Breaks br = radial_breaks(reduced_scale(Lambda, Gamma));
  const Rule& rule = gauss_legendre(n);
  Values<K> acc{};
  for (std::size_t p = 0; p + 1 < br.size; ++p) {
    const double half = 0.5 * (br.pts[p + 1] - br.pts[p]);
    const double mid = 0.5 * (br.pts[p + 1] + br.pts[p]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double r = mid + half * rule.nodes[k];
      const auto inner = affine_legendre<K>(Lambda * r, Gamma * r * r,
                                            [&](double u) { return f(u, r); }, rule);
      axpy(acc, 2.0 * half * rule.weights[k] * normal_pdf(r), inner);
    }
  }
  return acc;
}

template <std::size_t K, class F>
Values<K> affine_hermite(double a, double b, F&& f, int n) {
  const Rule& rule = gauss_hermite(n);
  Values<K> acc{};
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) axpy(acc, rule.weights[k], f(a * rule.nodes[k] + b));
  return acc;
}

template <std::size_t K, class F>
Values<K> reduced_hermite(double Lambda, double Gamma, F&& f, int n) {
  const Rule& rule = gauss_hermite(n);
  Values<K> acc{};
  // Integrands are even in Z2: use the nonnegative half of the rule, doubled.
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double r = rule.nodes[j];
    if (r < 0.0) continue;
    const double wr = r > 0.0 ? 2.0 * rule.weights[j] : rule.weights[j];
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      axpy(acc, wr * rule.weights[i], f(Lambda * rule.nodes[i] * r + Gamma * r * r, r));
  }
  return acc;
}

template <std::size_t K>
bool agree(const Values<K>& coarse, const Values<K>& fine, double tol) {
  for (std::size_t k = 0; k < K; ++k)
    if (!(std::abs(fine[k] - coarse[k]) <= tol * std::max(1.0, std::abs(fine[k])))) return false;
  return true;
}

template <std::size_t K, class Eval>
Values<K> refine(const QuadratureSpec& spec, Eval&& eval, const char* what) {
  spec.validate();
  int n = spec.nodes_per_axis;
  Values<K> coarse = eval(n);
  for (int k = 0; k < spec.max_doublings; ++k) {
    n *= 2;
    const Values<K> fine = eval(n);
    if (agree(coarse, fine, spec.tolerance)) return fine;
    coarse = fine;
  }
  throw Error(ErrorCode::QuadratureNotConverged,
              std::string(what) + ": node doubling up to " + std::to_string(n) +
                  " did not reach tolerance");
}

}  // namespace quad

/// E[f(a Z + b)] with f: double -> std::array<double, K>.
template <std::size_t K, class F>
quad::Values<K> expect_affine(double a, double b, F&& f, const QuadratureSpec& spec = {}) {
  return quad::refine<K>(
      spec,
      [&](int n) {
        return spec.kind == QuadratureKind::GradedLegendre ? quad::affine_legendre<K>(a, b, f, quad::gauss_legendre(n))
                                                           : quad::affine_hermite<K>(a, b, f, n);
      },
      "expect_affine");
}

/// E[f(Lambda Z1 |Z2| + Gamma Z2^2, |Z2|)] with f: (double, double) -> std::array<double, K>.
template <std::size_t K, class F>
quad::Values<K> expect_reduced(double Lambda, double Gamma, F&& f, const QuadratureSpec& spec = {}) {
  return quad::refine<K>(
      spec,
      [&](int n) {
        return spec.kind == QuadratureKind::GradedLegendre
                   ? quad::reduced_legendre<K>(Lambda, Gamma, f, n)
                   : quad::reduced_hermite<K>(Lambda, Gamma, f, n);
      },
      "expect_reduced");
}

}  // namespace mixreg
