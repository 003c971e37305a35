#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "llfisher/integrals.hpp"
#include "oracles.hpp"

using namespace llfisher;

namespace {

cdouble brute_force(const SimplexIntegralRequest& r) {
  const int n = static_cast<int>(r.lambda.size());
  return oracle::simplex(
      [&](const std::vector<double>& x) {
        double phase = 0.0;
        for (int j = 0; j < n; ++j) phase += r.lambda[j] * x[j];
        double poly = 1.0;
        if (r.alpha > 0) poly *= std::pow(x[r.m - 1], r.alpha);
        if (r.beta > 0) poly *= std::pow(x[r.n - 1], r.beta);
        return poly * std::polar(1.0, -phase);
      },
      n, r.length, 1e-12);
}

double rel(cdouble a, cdouble b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(ExpPoly, AntiderivativeDifferentiatesBack) {
  for (int p = 0; p <= 4; ++p) {
    for (double mu : {0.0, 1e-12, 0.3, -2.5, 11.0}) {
      const ExpPolyTerm t{cdouble(0.7, -0.2), p, mu};
      const double x = 0.83, h = 1e-5;
      const cdouble fd = oracle::five_point([&](double y) { return antiderivative(t, y); }, x, h);
      const double scale = std::max(1.0, std::abs(antiderivative(t, x)));
      EXPECT_LT(std::abs(fd - evaluate(t, x)), 1e-8 * scale) << "p=" << p << " mu=" << mu;
    }
  }
}

TEST(ExpPoly, DefiniteIntegralMatchesAdaptiveQuadrature) {
  for (int p = 0; p <= 5; ++p) {
    for (double mu : {0.0, 1e-10, 1e-7, 1e-3, 0.5, -3.0, 40.0}) {
      const ExpPolyTerm t{1.0, p, mu};
      const cdouble ref = oracle::gk_complex([&](double x) { return evaluate(t, x); }, 0.2, 2.3);
      EXPECT_LT(std::abs(definite_integral(t, 0.2, 2.3) - ref), 1e-11 * std::max(1.0, std::abs(ref)))
          << "p=" << p << " mu=" << mu;
    }
  }
}

TEST(ExpPoly, ContinuousThroughDegeneracy) {
  for (int p = 0; p <= 3; ++p) {
    const cdouble at_zero = definite_integral({1.0, p, 0.0}, 0.0, 1.5);
    for (double mu : {1e-13, 1e-10, 1e-8, 1e-6}) {
      EXPECT_LT(std::abs(definite_integral({1.0, p, mu}, 0.0, 1.5) - at_zero), 10 * mu * std::pow(1.5, p + 2));
    }
  }
}

TEST(SimplexIntegral, ClosedForms) {
  // Volume L^N / N!.
  SimplexIntegralRequest r{{0.0, 0.0, 0.0}, 0, 0, 0, 0, 2.0};
  EXPECT_NEAR(simplex_exp_integral(r).real(), 8.0 / 6.0, 1e-14);
  // int_0^L e^{-i mu x} dx
  r = {{1.7}, 0, 0, 0, 0, 1.3};
  const cdouble expected = (1.0 - std::polar(1.0, -1.7 * 1.3)) / cdouble(0.0, 1.7);
  EXPECT_LT(std::abs(simplex_exp_integral(r) - expected), 1e-14);
  // int_{x1<x2<L} x1 x2 = L^4 / 8
  r = {{0.0, 0.0}, 1, 1, 1, 2, 1.5};
  EXPECT_NEAR(simplex_exp_integral(r).real(), std::pow(1.5, 4) / 8.0, 1e-13);
}

TEST(SimplexIntegral, MatchesNestedQuadratureOnRandomInput) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam(-6.0, 6.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    SimplexIntegralRequest r;
    r.length = 1.0 + 0.1 * trial;
    for (int j = 0; j < n; ++j) r.lambda.push_back(lam(rng));
    r.alpha = trial % 2;
    r.beta = (trial / 2) % 2;
    r.m = 1 + trial % n;
    r.n = 1 + (trial / 3) % n;
    const cdouble ref = brute_force(r);
    IntegralDiagnostics diag;
    const cdouble rec = simplex_exp_integral(r, &diag);
    // The bare recursion may lose digits to cancellation, but never beyond its own estimate.
    EXPECT_LT(std::abs(rec - ref), std::max(1e-8 * std::abs(ref), diag.error_estimate)) << "trial " << trial;
    EXPECT_LT(rel(simplex_exp_integral(r, IntegralMethod::automatic), ref), 1e-8) << "trial " << trial;
    EXPECT_LT(rel(simplex_exp_integral_dd(r), ref), 1e-8) << "trial " << trial;
  }
}

TEST(SimplexIntegral, DegenerateTailSums) {
  // lambda summing to zero in the tails and exact coincidences.
  const std::vector<std::vector<double>> cases = {{1.0, -1.0}, {2.0, 0.0, -2.0}, {0.0, 3.0, 0.0}, {1.0, 1.0, -2.0}};
  for (const auto& lambda : cases) {
    for (int a = 0; a <= 1; ++a) {
      SimplexIntegralRequest r{lambda, a, a, 1, static_cast<int>(lambda.size()), 1.4};
      const cdouble ref = brute_force(r);
      EXPECT_LT(rel(simplex_exp_integral(r, IntegralMethod::recursion), ref), 1e-9);
      EXPECT_LT(rel(simplex_exp_integral_dd(r), ref), 1e-9);
    }
  }
}

TEST(SimplexIntegral, AutomaticFallbackForTinyWavenumbers) {
  // Nearly degenerate lambda defeats the term recursion; the automatic path
  // must still agree with quadrature.
  SimplexIntegralRequest r{{3e-5, -1e-5, 2e-5}, 1, 1, 1, 3, 20.0};
  IntegralDiagnostics diag;
  const cdouble naive = simplex_exp_integral(r, &diag);
  const cdouble ref = brute_force(r);
  const cdouble autom = simplex_exp_integral(r, IntegralMethod::automatic);
  EXPECT_LT(rel(autom, ref), 1e-9);
  // The estimate must cover the actual error of the recursion.
  EXPECT_GE(diag.error_estimate, 0.5 * std::abs(naive - ref));
}

TEST(SimplexIntegral, ConjugateSymmetry) {
  const Eigen::VectorXd lambda = (Eigen::VectorXd(3) << 0.4, -1.9, 2.2).finished();
  const auto m = simplex_moments(lambda, 1.7);
  const auto c = simplex_moments(-lambda, 1.7);
  const auto mc = m.conjugate();
  EXPECT_LT(std::abs(mc.base - c.base), 1e-14);
  EXPECT_LT((mc.first - c.first).norm(), 1e-13);
  EXPECT_LT((mc.second - c.second).norm(), 1e-13);
}

TEST(SimplexIntegral, MomentsMatchSingleIntegrals) {
  const Eigen::VectorXd lambda = (Eigen::VectorXd(3) << 1.1, 0.0, -2.7).finished();
  for (auto method : {IntegralMethod::recursion, IntegralMethod::divided_difference}) {
    const auto mom = simplex_moments(lambda, 2.1, method);
    std::vector<double> lv(lambda.data(), lambda.data() + 3);
    EXPECT_LT(rel(mom.base, simplex_exp_integral({lv, 0, 0, 0, 0, 2.1})), 1e-12);
    for (int l = 0; l < 3; ++l) EXPECT_LT(rel(mom.first(l), simplex_exp_integral({lv, 1, 0, l + 1, 0, 2.1})), 1e-11);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        EXPECT_LT(rel(mom.second(a, b), simplex_exp_integral({lv, 1, 1, a + 1, b + 1, 2.1})), 1e-11);
  }
}

TEST(SimplexIntegral, DividedDifferencesOfExp) {
  const std::vector<cdouble> one = {cdouble(0.3, 1.0)};
  EXPECT_LT(std::abs(exp_divided_difference(one) - std::exp(one[0])), 1e-15);
  const std::vector<cdouble> two = {cdouble(0.3, 1.0), cdouble(-0.2, 0.5)};
  EXPECT_LT(std::abs(exp_divided_difference(two) - (std::exp(two[0]) - std::exp(two[1])) / (two[0] - two[1])), 1e-14);
  const std::vector<cdouble> triple = {0.5, 0.5, 0.5};
  EXPECT_LT(std::abs(exp_divided_difference(triple) - std::exp(0.5) / 2.0), 1e-14);
}

TEST(SimplexIntegral, InvalidRequests) {
  EXPECT_THROW(simplex_exp_integral(SimplexIntegralRequest{{}, 0, 0, 0, 0, 1.0}), InvalidArgument);
  EXPECT_THROW(simplex_exp_integral(SimplexIntegralRequest{{1.0}, 1, 0, 2, 0, 1.0}), InvalidArgument);
  EXPECT_THROW(simplex_exp_integral(SimplexIntegralRequest{{1.0}, 0, 0, 0, 0, -1.0}), InvalidArgument);
  EXPECT_THROW(simplex_exp_integral_dd(SimplexIntegralRequest{{1.0}, 2, 0, 1, 0, 1.0}), InvalidArgument);
}

TEST(GaussLegendre, PolynomialExactness) {
  for (int order : {2, 5, 12, 48}) {
    const auto rule = gauss_legendre(order);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(order));
    for (int p = 0; p <= 2 * order - 1; ++p) {
      double s = 0.0;
      for (int q = 0; q < order; ++q) s += rule.weights[q] * std::pow(rule.nodes[q], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-13) << order << " " << p;
    }
  }
}

TEST(Quadrature, SimplexVolumeAndMoments) {
  const double v = simplex_quadrature([](std::span<const double>) { return 1.0; }, 3, 2.0, 8);
  EXPECT_NEAR(v, 8.0 / 6.0, 1e-13);
  const cdouble z = simplex_quadrature(
      [](std::span<const double> x) { return std::polar(1.0, -(0.5 * x[0] - 1.2 * x[1])); }, 2, 1.3, 24);
  EXPECT_LT(rel(z, simplex_exp_integral({{0.5, -1.2}, 0, 0, 0, 0, 1.3})), 1e-13);
}

TEST(Quadrature, BoxWithRepeatedIntervals) {
  // Symmetric integrand x1 x2 x3 over [0,1]^2 x [1,2]: (1/2)^2 * 3/2.
  const std::vector<Interval> box = {{0, 1}, {1, 2}, {0, 1}};
  const double v = box_quadrature([](std::span<const double> x) { return x[0] * x[1] * x[2]; }, box, 6);
  EXPECT_NEAR(v, 0.375, 1e-14);
  const std::vector<Interval> empty = {{0, 1}, {1, 1}};
  EXPECT_EQ(box_quadrature([](std::span<const double>) { return 1.0; }, empty, 4), 0.0);
}
