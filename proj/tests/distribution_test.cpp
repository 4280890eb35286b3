#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spd/distribution.hpp"
#include "spd/errors.hpp"
#include "spd/quadrature.hpp"

namespace spd {
namespace {

// Independent log-density per family, written from the textbook formulas.
double oracle_log_pdf(Family family, std::array<double, 2> p, double x) {
  const double pi = std::numbers::pi;
  switch (family) {
    case Family::normal: {
      const double z = (x - p[0]) / p[1];
      return -0.5 * z * z - std::log(p[1] * std::sqrt(2.0 * pi));
    }
    case Family::lognormal: {
      const double z = (std::log(x) - p[0]) / p[1];
      return -0.5 * z * z - std::log(x * p[1] * std::sqrt(2.0 * pi));
    }
    case Family::exponential: return std::log(p[0]) - p[0] * x;
    case Family::gamma:
      return (p[0] - 1.0) * std::log(x) - x / p[1] - std::lgamma(p[0]) - p[0] * std::log(p[1]);
    case Family::weibull:
      return std::log(p[0] / p[1]) + (p[0] - 1.0) * std::log(x / p[1]) - std::pow(x / p[1], p[0]);
    case Family::logistic: {
      const double z = (x - p[0]) / p[1];
      return -z - std::log(p[1]) - 2.0 * std::log1p(std::exp(-z));
    }
    case Family::gumbel: {
      const double z = (x - p[0]) / p[1];
      return -z - std::exp(-z) - std::log(p[1]);
    }
  }
  return 0.0;
}

double oracle_log_likelihood(Family family, std::array<double, 2> p, std::span<const double> xs) {
  double ll = 0.0;
  for (double x : xs) ll += oracle_log_pdf(family, p, x);
  return ll;
}

std::vector<double> gamma_sample(std::uint64_t seed, int n, double shape, double scale) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> d(shape, scale);
  std::vector<double> xs(n);
  for (double& x : xs) x = d(rng);
  return xs;
}

double integrate_pdf(const Density& d) {
  double hi = d.quantile(1.0 - 1e-9);
  while (d.cdf(hi) < 1.0 - 1e-8) hi *= 1.5;
  QuadratureOptions opt;
  opt.abs_tolerance = 1e-10;
  // Split at the quantiles so the adaptive rule sees every mode.
  double total = 0.0;
  double a = d.support_low();
  for (double p : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const double b = std::max(a, d.quantile(p));
    total += adaptive_simpson([&](double y) { return d.pdf(y); }, a, b, opt).value;
    a = b;
  }
  total += adaptive_simpson([&](double y) { return d.pdf(y); }, a, hi, opt).value;
  return total;
}

TEST(KernelDensityTest, SingleCenterIsSymmetric) {
  const double xs[] = {100.0};
  const auto d = fit_kde(xs, 10.0);
  EXPECT_NEAR(d.cdf(100.0), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(d.pdf(90.0), d.pdf(110.0));
  EXPECT_NEAR(d.pdf(100.0), 1.0 / (10.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-12);
}

TEST(KernelDensityTest, TwoCentersGiveTwoEqualModes) {
  const double xs[] = {100.0, 200.0};
  const auto d = fit_kde(xs, 5.0);
  EXPECT_NEAR(d.pdf(100.0), d.pdf(200.0), 1e-12);
  EXPECT_GT(d.pdf(100.0), 100.0 * d.pdf(150.0));
  EXPECT_GT(d.pdf(100.0), d.pdf(99.0));
  EXPECT_GT(d.pdf(100.0), d.pdf(101.0));
}

TEST(KernelDensityTest, TruncationRenormalizesMassBelowZero) {
  const double xs[] = {1.0};
  const auto d = fit_kde(xs, 2.0);
  EXPECT_EQ(d.cdf(0.0), 0.0);
  EXPECT_EQ(d.pdf(-1.0), 0.0);
  // Oracle: a normal(1, 2) conditioned on being positive.
  const double keep = 0.5 * std::erfc(-0.5 / std::sqrt(2.0));
  const double at3 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  EXPECT_NEAR(d.cdf(3.0), (at3 - (1.0 - keep)) / keep, 1e-12);
  EXPECT_NEAR(integrate_pdf(d), 1.0, 1e-6);
}

TEST(KernelDensityTest, PrinterCdfIsIncreasing) {
  const auto d = fit_kde(builtin_dataset(Product::printer));
  EXPECT_LT(d.cdf(297.0), d.cdf(310.0));
  EXPECT_GT(d.pdf(310.0), 0.0);
}

TEST(KernelDensityTest, SilvermanMatchesHandComputation) {
  const std::vector<double> xs = {3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0};
  // mean 3.875, sample sd, type-7 quartiles 1.75 and 5.25.
  double ss = 0.0;
  for (double x : xs) ss += (x - 3.875) * (x - 3.875);
  const double sd = std::sqrt(ss / 7.0);
  const double iqr = 5.25 - 1.75;
  const double expected = 0.9 * std::min(sd, iqr / 1.34) * std::pow(8.0, -0.2);
  EXPECT_NEAR(silverman_bandwidth(xs), expected, 1e-12);
  auto shuffled = xs;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(silverman_bandwidth(shuffled), silverman_bandwidth(xs));
}

TEST(KernelDensityTest, DegenerateSpreadFallsBack) {
  const std::vector<double> same = {50.0, 50.0, 50.0};
  EXPECT_NEAR(silverman_bandwidth(same), 0.5, 1e-12);
  const std::vector<double> one = {0.2};
  EXPECT_NEAR(silverman_bandwidth(one), 0.01, 1e-12);
  // IQR zero but sd positive: the zero measure is ignored.
  const std::vector<double> mostly = {10, 10, 10, 10, 10, 10, 10, 20};
  EXPECT_GT(silverman_bandwidth(mostly), 0.0);
  EXPECT_THROW(fit_kde(same, 0.0), ValidationError);
  EXPECT_THROW(fit_kde(std::span<const double>{}), ValidationError);
}

TEST(UniformStubTest, PdfCdfQuantile) {
  const auto u = Density::uniform(0.0, 1.0);
  EXPECT_EQ(u.pdf(0.5), 1.0);
  EXPECT_EQ(u.pdf(-1.0), 0.0);
  EXPECT_EQ(u.cdf(u.support_low()), 0.0);
  EXPECT_EQ(u.cdf(0.25), 0.25);
  EXPECT_NEAR(u.cdf(1e9), 1.0, 1e-6);
  EXPECT_NEAR(u.quantile(0.5), 0.5, 1e-6);
  EXPECT_EQ(u.quantile(0.0), u.support_low());
  EXPECT_THROW(u.quantile(1.5), ValidationError);
  EXPECT_THROW(u.quantile(-0.1), ValidationError);
}

TEST(ParametricTest, MaximumLikelihoodIsALocalMaximum) {
  const auto xs = gamma_sample(11, 400, 9.0, 20.0);
  for (Family family : kAllFamilies) {
    std::string reason;
    const auto fit = fit_family(xs, family, &reason);
    ASSERT_TRUE(fit) << to_string(family) << ": " << reason;
    const double ll = oracle_log_likelihood(family, fit->parameters, xs);
    EXPECT_NEAR(fit->log_likelihood, ll, 1e-6 * std::abs(ll)) << to_string(family);
    EXPECT_NEAR(fit->bic, parameter_count(family) * std::log(400.0) - 2.0 * ll, 1e-6 * std::abs(ll));
    for (int i = 0; i < parameter_count(family); ++i) {
      for (double step : {-1e-3, 1e-3}) {
        auto p = fit->parameters;
        p[i] += step * std::max(1.0, std::abs(p[i]));
        EXPECT_LE(oracle_log_likelihood(family, p, xs), ll + 1e-7) << to_string(family) << " param " << i;
      }
    }
  }
}

TEST(ParametricTest, ClosedFormEstimators) {
  const auto xs = gamma_sample(3, 200, 4.0, 10.0);
  double mean = 0.0, lmean = 0.0;
  for (double x : xs) mean += x / 200.0, lmean += std::log(x) / 200.0;
  double var = 0.0, lvar = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean) / 200.0, lvar += std::pow(std::log(x) - lmean, 2) / 200.0;
  const auto normal = fit_family(xs, Family::normal);
  EXPECT_NEAR(normal->parameters[0], mean, 1e-9);
  EXPECT_NEAR(normal->parameters[1], std::sqrt(var), 1e-9);
  const auto lognormal = fit_family(xs, Family::lognormal);
  EXPECT_NEAR(lognormal->parameters[0], lmean, 1e-9);
  EXPECT_NEAR(lognormal->parameters[1], std::sqrt(lvar), 1e-9);
  EXPECT_NEAR(fit_family(xs, Family::exponential)->parameters[0], 1.0 / mean, 1e-12);
}

TEST(ParametricTest, BicRecoversExponentialOverNormal) {
  const Family families[] = {Family::normal, Family::exponential};
  int hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(1000 + t);
    std::exponential_distribution<double> d(1.0 / 100.0);
    std::vector<double> xs(500);
    for (double& x : xs) x = d(rng);
    hits += fit_parametric(xs, families).best().family == Family::exponential;
  }
  EXPECT_GE(hits, 95);
}

TEST(ParametricTest, BicSeparatesNormalAndGumbel) {
  const Family families[] = {Family::normal, Family::gumbel};
  int normal_hits = 0;
  int gumbel_hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(5000 + t);
    std::normal_distribution<double> nd(300.0, 30.0);
    std::extreme_value_distribution<double> gd(300.0, 30.0);
    std::vector<double> a(500), b(500);
    for (double& x : a) x = nd(rng);
    for (double& x : b) x = gd(rng);
    normal_hits += fit_parametric(a, families).best().family == Family::normal;
    gumbel_hits += fit_parametric(b, families).best().family == Family::gumbel;
  }
  EXPECT_GE(normal_hits, 95);
  EXPECT_GE(gumbel_hits, 95);
}

TEST(ParametricTest, DegenerateAndSingleFamilyCases) {
  const std::vector<double> twins = {100.0, 100.0};
  const Family normal_only[] = {Family::normal};
  EXPECT_THROW(fit_parametric(twins, normal_only), FitError);
  const auto xs = gamma_sample(5, 50, 3.0, 5.0);
  EXPECT_EQ(fit_parametric(xs, normal_only).best().family, Family::normal);
  // Only the one-parameter exponential can describe a zero-variance sample.
  const auto report = fit_parametric(twins);
  ASSERT_EQ(report.ranking.size(), 1u);
  EXPECT_EQ(report.best().family, Family::exponential);
  EXPECT_EQ(report.skipped.size(), kAllFamilies.size() - 1);
  for (const auto& s : report.skipped) EXPECT_FALSE(s.reason.empty());
}

TEST(ParametricTest, RankingIsSortedByBic) {
  const auto report = fit_parametric(builtin_dataset(Product::printer));
  ASSERT_FALSE(report.ranking.empty());
  for (std::size_t i = 1; i < report.ranking.size(); ++i) {
    EXPECT_LE(report.ranking[i - 1].bic, report.ranking[i].bic);
  }
  ASSERT_TRUE(report.chosen.parametric_model());
  EXPECT_EQ(report.chosen.parametric_model()->family, report.best().family);
}

TEST(DensityPropertyTest, EveryFittedDensityIntegratesToOne) {
  const auto printer = builtin_dataset(Product::printer).dollars();
  EXPECT_NEAR(integrate_pdf(fit_kde(printer)), 1.0, 1e-6);
  for (Family family : kAllFamilies) {
    const Family one[] = {family};
    const auto d = fit_parametric(printer, one).chosen;
    EXPECT_NEAR(integrate_pdf(d), 1.0, 1e-6) << to_string(family);
    for (double y = 0.0; y < 800.0; y += 7.3) EXPECT_GE(d.pdf(y), 0.0);
  }
}

TEST(DensityPropertyTest, QuantileInvertsCdf) {
  const auto printer = builtin_dataset(Product::printer);
  const auto d = fit_kde(printer);
  for (double p : {0.001, 0.1, 0.37, 0.5, 0.9, 0.999}) {
    const double y = d.quantile(p);
    EXPECT_NEAR(d.cdf(y), p, 1e-6) << p;
  }
  double prev = -1.0;
  for (double y = 0.0; y < 1000.0; y += 3.1) {
    const double c = d.cdf(y);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(EqualMassTest, UniformThreePoints) {
  const auto u = Density::uniform(0.0, 1.0);
  const auto xs = equal_mass_prices(u, 3, 0.0);
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_NEAR(xs[0], 0.0, 1e-12);
  EXPECT_NEAR(xs[1], 0.5, 1e-6);
  EXPECT_NEAR(xs[2], 1.0, 1e-6);
}

TEST(EqualMassTest, TwoPointsReachTheTail) {
  const auto d = fit_kde(builtin_dataset(Product::printer));
  const auto xs = equal_mass_prices(d, 2, d.support_low());
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_EQ(xs[0], d.support_low());
  EXPECT_NEAR(xs[1], d.quantile(1.0 - kEqualMassTailTolerance), 1e-5);
}

TEST(EqualMassTest, PrinterThirtyPricesHaveEqualGaps) {
  const auto d = fit_kde(builtin_dataset(Product::printer));
  const auto xs = equal_mass_prices(d, 30, 297.0);
  ASSERT_EQ(xs.size(), 30u);
  EXPECT_EQ(xs.front(), 297.0);
  const double step = (1.0 - d.cdf(297.0)) / 29.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    EXPECT_GT(xs[i], xs[i - 1]);
    // The last point stops short of the unbounded tail by the tail tolerance.
    const double expected = i + 1 == xs.size() ? step - kEqualMassTailTolerance : step;
    EXPECT_NEAR(d.cdf(xs[i]) - d.cdf(xs[i - 1]), expected, 1e-7) << i;
  }
  EXPECT_NEAR(d.cdf(xs.back()), 1.0 - kEqualMassTailTolerance, 1e-8);
}

TEST(EqualMassTest, RejectsImpossibleRequests) {
  const auto u = Density::uniform(0.0, 1.0);
  EXPECT_THROW(equal_mass_prices(u, 3, 1.0), GenerationError);
  EXPECT_THROW(equal_mass_prices(u, 1, 0.0), ValidationError);
}

TEST(FamilyNamesTest, RoundTrip) {
  for (Family f : kAllFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_THROW(parse_family("cauchy"), ValidationError);
}

}  // namespace
}  // namespace spd
