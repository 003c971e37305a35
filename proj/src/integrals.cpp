#include "llfisher/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace llfisher {

namespace {

const cdouble I(0.0, 1.0);

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double wavenumber_threshold(std::span<const double> lambda) {
  double m = 1.0;
  for (double l : lambda) m = std::max(m, std::abs(l));
  return kDegeneracyThreshold * m;
}

void merge_into(std::vector<ExpPolyTerm>& terms, const ExpPolyTerm& t, double threshold) {
  for (auto& u : terms) {
    if (u.power == t.power && std::abs(u.wavenumber - t.wavenumber) < threshold) {
      u.coeff += t.coeff;
      return;
    }
  }
  terms.push_back(t);
}

std::vector<int> exponents(const SimplexIntegralRequest& r) {
  const int n = static_cast<int>(r.lambda.size());
  if (n < 1) throw InvalidArgument("simplex integral: lambda must be non-empty");
  if (!(r.length > 0.0)) throw InvalidArgument("simplex integral: length must be positive");
  if (r.alpha < 0 || r.beta < 0) throw InvalidArgument("simplex integral: powers must be non-negative");
  std::vector<int> e(n, 0);
  if (r.alpha > 0) {
    if (r.m < 1 || r.m > n) throw InvalidArgument("simplex integral: index m out of range");
    e[r.m - 1] += r.alpha;
  }
  if (r.beta > 0) {
    if (r.n < 1 || r.n > n) throw InvalidArgument("simplex integral: index n out of range");
    e[r.n - 1] += r.beta;
  }
  return e;
}

// Divided-difference bundle in units where L = 1: nodes z_i = -i L T_i with
// T_i the tail sums of lambda and T_N = 0. Entry (0, n) of exp(J) for the
// bidiagonal J (diag = nodes, superdiag = 1) is exp[z_0..z_n].
struct DividedDifferences {
  cdouble base;
  std::vector<cdouble> single;               // D_i: z_i repeated
  std::vector<std::vector<cdouble>> pairs;   // E_ik: z_i and z_k repeated (E_ii: 2 f[z_i thrice])
};

Eigen::MatrixXcd exp_bidiagonal(std::span<const cdouble> nodes) {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    j(a, a) = nodes[a];
    if (a + 1 < n) j(a, a + 1) = 1.0;
  }
  return j.exp();
}

DividedDifferences divided_differences(const Eigen::VectorXd& lambda, double length) {
  const int n = static_cast<int>(lambda.size());
  std::vector<cdouble> z(n + 1, 0.0);
  double tail = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    tail += lambda(i);
    z[i] = -I * length * tail;
  }
  DividedDifferences dd;
  dd.single.assign(n, 0.0);
  dd.pairs.assign(n, std::vector<cdouble>(n, 0.0));
  std::vector<cdouble> nodes(n + 3);
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      if (i < k) {
        nodes[0] = z[i];
        for (int a = 0; a <= n; ++a) nodes[a + 1] = z[a];
        nodes[n + 2] = z[k];
        const Eigen::MatrixXcd e = exp_bidiagonal(nodes);
        if (k == i + 1) dd.single[i] = e(0, n + 1);
        if (i == 0 && k == 1) dd.base = e(1, n + 1);
        dd.single[k] = e(1, n + 2);
        dd.pairs[i][k] = dd.pairs[k][i] = e(0, n + 2);
      } else {
        nodes[0] = z[i];
        nodes[1] = z[i];
        for (int a = 0; a <= n; ++a) nodes[a + 2] = z[a];
        const Eigen::MatrixXcd e = exp_bidiagonal(nodes);
        dd.pairs[i][i] = 2.0 * e(0, n + 2);
        dd.single[i] = e(1, n + 2);
        dd.base = e(2, n + 2);
      }
    }
  }
  return dd;
}

SimplexMoments moments_from_dd(const Eigen::VectorXd& lambda, double length) {
  const int n = static_cast<int>(lambda.size());
  const DividedDifferences dd = divided_differences(lambda, length);
  SimplexMoments out;
  out.used = IntegralMethod::divided_difference;
  const double ln = std::pow(length, n);
  out.base = ln * dd.base;
  out.first.resize(n);
  cdouble running = 0.0;
  for (int l = 0; l < n; ++l) {
    running += dd.single[l];
    out.first(l) = ln * length * running;
  }
  // second(m, n) = L^{N+2} sum_{i<=m, k<=n} E_ik via a 2-D prefix sum.
  out.second.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      cdouble v = dd.pairs[a][b];
      if (a > 0) v += out.second(a - 1, b);
      if (b > 0) v += out.second(a, b - 1);
      if (a > 0 && b > 0) v -= out.second(a - 1, b - 1);
      out.second(a, b) = v;
    }
  }
  out.second *= ln * length * length;
  return out;
}

}  // namespace

cdouble evaluate(const ExpPolyTerm& t, double x) {
  return t.coeff * std::pow(x, t.power) * std::exp(-I * t.wavenumber * x);
}

std::vector<ExpPolyTerm> antiderivative_terms(const ExpPolyTerm& t, double threshold) {
  if (t.power < 0) throw InvalidArgument("antiderivative: negative power");
  if (std::abs(t.wavenumber) < threshold) return {{t.coeff / static_cast<double>(t.power + 1), t.power + 1, 0.0}};
  const cdouble z = 1.0 / (I * t.wavenumber);
  std::vector<ExpPolyTerm> out;
  out.reserve(t.power + 1);
  // -(p!/s!) z^{p+1-s}, built from s = p downwards.
  cdouble c = -z;
  for (int s = t.power; s >= 0; --s) {
    out.push_back({t.coeff * c, s, t.wavenumber});
    c *= static_cast<double>(s) * z;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

cdouble antiderivative(const ExpPolyTerm& t, double x, double threshold) {
  cdouble v = 0.0;
  for (const auto& u : antiderivative_terms(t, threshold)) v += evaluate(u, x);
  return v;
}

cdouble definite_integral(const ExpPolyTerm& t, double a, double b) {
  if (t.power < 0) throw InvalidArgument("definite_integral: negative power");
  const double reach = std::abs(t.wavenumber) * std::max(std::abs(a), std::abs(b));
  if (reach >= 1.0) return antiderivative(t, b, 0.0) - antiderivative(t, a, 0.0);
  // sum_s (-i mu)^s / s! (b^{p+s+1} - a^{p+s+1}) / (p+s+1)
  cdouble sum = 0.0;
  cdouble factor = 1.0;
  for (int s = 0; s < 60; ++s) {
    const int q = t.power + s + 1;
    const cdouble term = factor * (std::pow(b, q) - std::pow(a, q)) / static_cast<double>(q);
    sum += term;
    if (s > 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    factor *= -I * t.wavenumber / static_cast<double>(s + 1);
  }
  return t.coeff * sum;
}

cdouble simplex_exp_integral(const SimplexIntegralRequest& r, IntegralDiagnostics* diagnostics) {
  const std::vector<int> e = exponents(r);
  const int n = static_cast<int>(r.lambda.size());
  const double threshold = wavenumber_threshold(r.lambda);
  const double length = r.length;

  int remaining_power = 0;
  for (int p : e) remaining_power += p;

  std::vector<ExpPolyTerm> terms{{1.0, e[0], r.lambda[0]}};
  remaining_power -= e[0];
  double peak = 0.0;
  std::size_t peak_terms = 1;
  cdouble result = 0.0;

  for (int j = 0; j < n; ++j) {
    std::vector<ExpPolyTerm> next;
    for (const auto& t : terms) {
      const auto anti = antiderivative_terms(t, threshold);
      for (const auto& u : anti) merge_into(next, u, threshold);
      if (anti.front().power == 0) merge_into(next, {-anti.front().coeff, 0, 0.0}, threshold);
    }
    double magnitude = 0.0;
    for (const auto& u : next) magnitude += std::abs(u.coeff) * std::pow(length, u.power);
    // Bound on what the remaining integrations can amplify this level by.
    const int left = n - 1 - j;
    peak = std::max(peak, magnitude * std::pow(length, left + remaining_power) / factorial(left));
    peak_terms = std::max(peak_terms, next.size());
    if (next.size() > kMaxRecursionTerms)
      throw ResourceLimit("simplex_exp_integral: term count exceeded " + std::to_string(kMaxRecursionTerms));

    if (j == n - 1) {
      for (const auto& u : next) result += evaluate(u, length);
      break;
    }
    terms.clear();
    for (auto u : next) {
      u.power += e[j + 1];
      u.wavenumber += r.lambda[j + 1];
      merge_into(terms, u, threshold);
    }
    remaining_power -= e[j + 1];
  }
  if (diagnostics) {
    diagnostics->error_estimate = 8.0 * std::numeric_limits<double>::epsilon() * peak;
    diagnostics->peak_terms = peak_terms;
  }
  return result;
}

cdouble exp_divided_difference(std::span<const cdouble> nodes) {
  if (nodes.empty()) throw InvalidArgument("exp_divided_difference: no nodes");
  return exp_bidiagonal(nodes)(0, static_cast<Eigen::Index>(nodes.size()) - 1);
}

cdouble simplex_exp_integral_dd(const SimplexIntegralRequest& r) {
  exponents(r);
  if (r.alpha > 1 || r.beta > 1)
    throw InvalidArgument("simplex_exp_integral_dd: only powers 0 and 1 are supported");
  if (r.alpha == 0 && r.beta == 0) {
    const int n = static_cast<int>(r.lambda.size());
    std::vector<cdouble> z(n + 1, 0.0);
    double tail = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      tail += r.lambda[i];
      z[i] = -I * r.length * tail;
    }
    return std::pow(r.length, n) * exp_divided_difference(z);
  }
  const Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(r.lambda.data(), r.lambda.size());
  const SimplexMoments mom = moments_from_dd(lambda, r.length);
  if (r.alpha == 1 && r.beta == 1) return mom.second(r.m - 1, r.n - 1);
  if (r.alpha == 1) return mom.first(r.m - 1);
  if (r.beta == 1) return mom.first(r.n - 1);
  return mom.base;
}

cdouble simplex_exp_integral(const SimplexIntegralRequest& r, IntegralMethod method, double fallback_tolerance) {
  if (method == IntegralMethod::recursion) return simplex_exp_integral(r);
  if (method == IntegralMethod::divided_difference) return simplex_exp_integral_dd(r);
  IntegralDiagnostics diag;
  const cdouble v = simplex_exp_integral(r, &diag);
  const int n = static_cast<int>(r.lambda.size());
  const double scale = std::pow(r.length, n + r.alpha + r.beta) / factorial(n);
  if (diag.error_estimate <= fallback_tolerance * scale || r.alpha > 1 || r.beta > 1) return v;
  return simplex_exp_integral_dd(r);
}

std::string to_string(IntegralMethod method) {
  switch (method) {
    case IntegralMethod::recursion: return "recursion";
    case IntegralMethod::divided_difference: return "divided-difference";
    default: return "automatic";
  }
}

SimplexMoments SimplexMoments::conjugate() const {
  SimplexMoments out = *this;
  out.base = std::conj(base);
  out.first = first.conjugate();
  out.second = second.conjugate();
  return out;
}

SimplexMoments simplex_moments(const Eigen::VectorXd& lambda, double length, IntegralMethod method,
                               double fallback_tolerance) {
  const int n = static_cast<int>(lambda.size());
  if (n < 1) throw InvalidArgument("simplex_moments: lambda must be non-empty");
  if (!(length > 0.0)) throw InvalidArgument("simplex_moments: length must be positive");
  if (method == IntegralMethod::divided_difference) return moments_from_dd(lambda, length);

  SimplexMoments out;
  out.used = IntegralMethod::recursion;
  out.first.resize(n);
  out.second.resize(n, n);
  const double volume = std::pow(length, n) / factorial(n);
  double worst = 0.0;
  SimplexIntegralRequest req;
  req.lambda.assign(lambda.data(), lambda.data() + n);
  req.length = length;
  IntegralDiagnostics diag;

  out.base = simplex_exp_integral(req, &diag);
  worst = std::max(worst, diag.error_estimate / volume);
  req.alpha = 1;
  for (int m = 1; m <= n; ++m) {
    req.m = m;
    req.beta = 0;
    out.first(m - 1) = simplex_exp_integral(req, &diag);
    worst = std::max(worst, diag.error_estimate / (volume * length));
    req.beta = 1;
    for (int k = m; k <= n; ++k) {
      req.n = k;
      out.second(m - 1, k - 1) = out.second(k - 1, m - 1) = simplex_exp_integral(req, &diag);
      worst = std::max(worst, diag.error_estimate / (volume * length * length));
    }
  }
  out.relative_error_estimate = worst;
  if (method == IntegralMethod::automatic && worst > fallback_tolerance) return moments_from_dd(lambda, length);
  return out;
}

GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw InvalidArgument("gauss_legendre: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k - 1, k) = jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int q = 0; q < order; ++q) {
    double x = es.eigenvalues()(q);
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = order == 1 ? x : p1;
      const double pm = order == 1 ? 1.0 : p0;
      dp = order * (x * pn - pm) / (x * x - 1.0);
      x -= pn / dp;
    }
    rule.nodes[q] = x;
    rule.weights[q] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace llfisher
