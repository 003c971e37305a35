#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "llfisher/errors.hpp"

namespace llfisher {

using cdouble = std::complex<double>;

// ---------------------------------------------------------------------------
// Exponential-polynomial terms  coeff * x^power * exp(-i wavenumber x)
// ---------------------------------------------------------------------------

struct ExpPolyTerm {
  cdouble coeff = 1.0;
  int power = 0;
  double wavenumber = 0.0;
};

// Relative threshold below which a wavenumber counts as exactly zero.
inline constexpr double kDegeneracyThreshold = 1e-9;

// Indefinite antiderivative as a list of terms: for |mu| >= threshold
//   int x^p e^{-i mu x} dx = -sum_{s=0}^p (p!/s!) (i mu)^{-(p+1-s)} x^s e^{-i mu x},
// and x^{p+1}/(p+1) otherwise.
std::vector<ExpPolyTerm> antiderivative_terms(const ExpPolyTerm& term, double threshold = kDegeneracyThreshold);
cdouble antiderivative(const ExpPolyTerm& term, double x, double threshold = kDegeneracyThreshold);

// int_a^b of the term, accurate for every wavenumber (series branch when
// |mu| max(|a|,|b|) is small).
cdouble definite_integral(const ExpPolyTerm& term, double a, double b);

cdouble evaluate(const ExpPolyTerm& term, double x);

// ---------------------------------------------------------------------------
// Ordered-simplex integrals
//   I^{alpha beta}_{mn}(lambda) = int_{0<x_1<...<x_N<L} x_m^alpha x_n^beta exp(-i sum_j lambda_j x_j)
// ---------------------------------------------------------------------------

struct SimplexIntegralRequest {
  std::vector<double> lambda;
  int alpha = 0;
  int beta = 0;
  int m = 0;  // 1-based, ignored when alpha == 0
  int n = 0;  // 1-based, ignored when beta == 0
  double length = 1.0;
};

struct IntegralDiagnostics {
  double error_estimate = 0.0;  // rounding bound from the largest intermediate term
  std::size_t peak_terms = 0;
};

inline constexpr std::size_t kMaxRecursionTerms = 1u << 20;

enum class IntegralMethod { automatic, recursion, divided_difference };

std::string to_string(IntegralMethod method);

// Innermost-to-outermost symbolic recursion over exp-polynomial terms.
cdouble simplex_exp_integral(const SimplexIntegralRequest& request, IntegralDiagnostics* diagnostics = nullptr);

// Same integral through divided differences of exp at the tail sums of
// lambda (Hermite-Genocchi), evaluated with a bidiagonal matrix exponential.
// Supports alpha, beta <= 1.
cdouble simplex_exp_integral_dd(const SimplexIntegralRequest& request);

// Method dispatch; automatic falls back to divided differences when the
// recursion's estimate exceeds fallback_tolerance * L^{N+alpha+beta}/N!.
cdouble simplex_exp_integral(const SimplexIntegralRequest& request, IntegralMethod method,
                             double fallback_tolerance = 1e-12);

// f[z_0, ..., z_n] for f = exp.
cdouble exp_divided_difference(std::span<const cdouble> nodes);


// All moments needed by the Fisher-information sums for one lambda:
//   base = I(lambda), first(l) = I^1_l(lambda), second(m, n) = I^{11}_{mn}(lambda).
struct SimplexMoments {
  cdouble base;
  Eigen::VectorXcd first;
  Eigen::MatrixXcd second;
  IntegralMethod used = IntegralMethod::recursion;
  double relative_error_estimate = 0.0;

  SimplexMoments conjugate() const;  // moments at -lambda
};

// automatic: recursion, falling back to divided differences when the
// recursion's rounding estimate exceeds fallback_tolerance relative to the
// natural scale L^{N+r}/N!.
SimplexMoments simplex_moments(const Eigen::VectorXd& lambda, double length,
                               IntegralMethod method = IntegralMethod::automatic,
                               double fallback_tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Golub-Welsch followed by a Newton polish of each node.
GaussLegendreRule gauss_legendre(int order);

inline int default_quadrature_order(int n) { return n <= 3 ? 48 : 24; }

// Iterated Gauss-Legendre over 0 <= x_1 <= ... <= x_N <= L; f receives the
// ordered point as a span and may return a real or complex value.
template <typename F>
auto simplex_quadrature(F&& f, int n, double length, int order) {
  using Result = std::decay_t<std::invoke_result_t<F&, std::span<const double>>>;
  if (n < 1) throw InvalidArgument("simplex_quadrature: dimension must be >= 1");
  if (order < 2) throw InvalidArgument("simplex_quadrature: order must be >= 2");
  const GaussLegendreRule rule = gauss_legendre(order);
  std::vector<double> x(n);
  Result total{};
  auto level = [&](auto&& self, int j, double upper, double weight) -> void {
    const double half = 0.5 * upper;
    for (int q = 0; q < order; ++q) {
      x[j] = half * (rule.nodes[q] + 1.0);
      const double w = weight * half * rule.weights[q];
      if (j == 0) {
        total += w * f(std::span<const double>(x.data(), x.size()));
      } else {
        self(self, j - 1, x[j], w);
      }
    }
  };
  level(level, n - 1, length, 1.0);
  return total;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Tensor Gauss-Legendre over a box. Coordinates sharing an identical interval
// are integrated over their ordered sub-simplex and multiplied by the
// block-size factorial, so f must be symmetric under exchanging them.
template <typename F>
auto box_quadrature(F&& f, std::span<const Interval> box, int order) {
  using Result = std::decay_t<std::invoke_result_t<F&, std::span<const double>>>;
  if (order < 2) throw InvalidArgument("box_quadrature: order must be >= 2");
  const int n = static_cast<int>(box.size());
  for (const auto& iv : box)
    if (!(iv.hi >= iv.lo)) return Result{};
  for (const auto& iv : box)
    if (iv.hi == iv.lo) return Result{};

  // Group identical intervals.
  std::vector<Interval> groups;
  std::vector<std::vector<int>> members;
  for (int j = 0; j < n; ++j) {
    auto it = std::find(groups.begin(), groups.end(), box[j]);
    if (it == groups.end()) {
      groups.push_back(box[j]);
      members.push_back({j});
    } else {
      members[it - groups.begin()].push_back(j);
    }
  }

  const GaussLegendreRule rule = gauss_legendre(order);
  // Nodes of the ordered m-simplex inside each group interval.
  struct Node {
    std::vector<double> x;
    double w;
  };
  std::vector<std::vector<Node>> group_nodes(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const int m = static_cast<int>(members[g].size());
    const double lo = groups[g].lo;
    const double width = groups[g].width();
    double factorial = 1.0;
    for (int i = 2; i <= m; ++i) factorial *= i;
    std::vector<double> y(m);
    auto level = [&](auto&& self, int j, double upper, double weight) -> void {
      const double half = 0.5 * upper;
      for (int q = 0; q < order; ++q) {
        y[j] = half * (rule.nodes[q] + 1.0);
        const double w = weight * half * rule.weights[q];
        if (j == 0) {
          Node node{std::vector<double>(m), w * factorial};
          for (int i = 0; i < m; ++i) node.x[i] = lo + y[i];
          group_nodes[g].push_back(std::move(node));
        } else {
          self(self, j - 1, y[j], w);
        }
      }
    };
    level(level, m - 1, width, 1.0);
  }

  std::vector<double> x(n);
  Result total{};
  auto tensor = [&](auto&& self, std::size_t g, double weight) -> void {
    if (g == groups.size()) {
      total += weight * f(std::span<const double>(x.data(), x.size()));
      return;
    }
    for (const Node& node : group_nodes[g]) {
      for (std::size_t i = 0; i < members[g].size(); ++i) x[members[g][i]] = node.x[i];
      self(self, g + 1, weight * node.w);
    }
  };
  tensor(tensor, 0, 1.0);
  return total;
}

}  // namespace llfisher
