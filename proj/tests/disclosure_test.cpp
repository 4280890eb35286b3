#include <algorithm>
#include <bit>
#include <random>

#include <gtest/gtest.h>

#include "spd/disclosure.hpp"
#include "spd/errors.hpp"

namespace spd {
namespace {

PriceList list_of(std::vector<double> dollars) { return make_price_list("t", "s", dollars); }

PriceList random_list(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> spread(2.0, 30.0);
  std::vector<double> xs(n);
  for (double& x : xs) x = 100.0 + spread(rng);
  return list_of(xs);
}

PriceList protocol_printer_set() {
  const auto d = fit_kde(builtin_dataset(Product::printer).filter_source("Amazon"));
  return list_of(equal_mass_prices(d, 30, 297.0));
}

// Independent enumeration: every subset containing the designated minimum with size >= rho.
struct Optimum {
  double cost = 0.0;
  std::vector<double> all_costs;
};

Optimum exhaustive(const PriceList& prices, int rho, int n_new) {
  const auto n = static_cast<int>(prices.size());
  const auto minimum = prices.min_index();
  Optimum best{1e300, {}};
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> minimum & 1u) || std::popcount(mask) < rho) continue;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1u) xs.push_back(prices[i].price.dollars());
    }
    const double c = evaluate_prices(xs, n_new).value;
    best.all_costs.push_back(c);
    best.cost = std::min(best.cost, c);
  }
  return best;
}

TEST(EvaluateTest, SubsetsAreScoredByTheirMultiset) {
  const auto prices = random_list(1, 10);
  const std::vector<std::size_t> a = {0, 3, 5, 7};
  const std::vector<std::size_t> b = {7, 5, 0, 3};
  EXPECT_EQ(evaluate_subset(prices.subset(a), 18).value, evaluate_subset(prices.subset(b), 18).value);
  std::vector<double> xs = prices.dollars();
  const double forward = evaluate_prices(xs, 18).value;
  std::reverse(xs.begin(), xs.end());
  EXPECT_EQ(evaluate_prices(xs, 18).value, forward);
}

TEST(EvaluateTest, SingletonAndFullSet) {
  const auto prices = random_list(2, 8);
  const std::size_t only_min[] = {prices.min_index()};
  EXPECT_GT(evaluate_subset(prices.subset(only_min), 18).value, 0.0);
  EXPECT_EQ(evaluate_subset(prices, 18).value, full_disclose(prices, 18).critical_cost.value);
  EXPECT_THROW(evaluate_prices({}, 18), ValidationError);
}

TEST(BruteForceTest, OnlyTheFullSetWhenRhoIsN) {
  const auto prices = random_list(3, 6);
  const auto r = brute_force_disclose(prices, {6, std::nullopt}, 18);
  EXPECT_EQ(r.subset.size(), 6u);
  EXPECT_EQ(r.subsets_evaluated, 1);
}

TEST(BruteForceTest, FivePricesAgainstEnumeration) {
  const auto prices = list_of({1, 2, 3, 4, 5});
  const auto r = brute_force_disclose(prices, {3, std::nullopt}, 5);
  const auto oracle = exhaustive(prices, 3, 5);
  EXPECT_EQ(r.subsets_evaluated, static_cast<std::int64_t>(oracle.all_costs.size()));
  for (double c : oracle.all_costs) EXPECT_LE(r.critical_cost.value, c);
  EXPECT_EQ(r.critical_cost.value, oracle.cost);
}

TEST(BruteForceTest, MatchesEnumerationOnRandomInstances) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto prices = random_list(seed, 9);
    const auto r = brute_force_disclose(prices, {4, std::nullopt}, 12);
    EXPECT_EQ(r.critical_cost.value, exhaustive(prices, 4, 12).cost) << seed;
  }
}

TEST(BruteForceTest, EqualCostsPreferLexicographicallySmallestPrices) {
  // Duplicate prices make distinct index sets with identical multisets and costs.
  const auto prices = list_of({10, 20, 20, 30, 30, 40});
  const auto r = brute_force_disclose(prices, {2, std::nullopt}, 4);
  const auto again = brute_force_disclose(prices, {2, std::nullopt}, 4, {.workers = 3});
  EXPECT_EQ(r.indices, again.indices);
  EXPECT_EQ(r.critical_cost.value, exhaustive(prices, 2, 4).cost);
  for (std::size_t i = 1; i < r.indices.size(); ++i) {
    // The first of equal prices wins: indices ascend within each tied group.
    if (prices[r.indices[i]].price == prices[r.indices[i - 1]].price) {
      EXPECT_LT(r.indices[i - 1], r.indices[i]);
    }
  }
}

TEST(BruteForceTest, RefusesHugeInstances) {
  const auto prices = protocol_printer_set();
  try {
    brute_force_disclose(prices, {10, std::nullopt}, 18);
    FAIL() << "expected RefusalError";
  } catch (const RefusalError& e) {
    EXPECT_NE(std::string(e.what()).find("530396371"), std::string::npos) << e.what();
  }
}

TEST(MonteCarloTest, BudgetOneNeverWorseThanFullSet) {
  const auto prices = random_list(4, 12);
  EXPECT_THROW(monte_carlo_disclose(prices, {5, std::nullopt}, 18, 0, 1), ValidationError);
  const double full = full_disclose(prices, 18).critical_cost.value;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 1, seed);
    EXPECT_LE(r.critical_cost.value, full);
    EXPECT_EQ(r.subsets_evaluated, 1);
    EXPECT_EQ(r.seed, seed);
  }
}

TEST(MonteCarloTest, SameSeedReproducesEverything) {
  const auto prices = random_list(5, 15);
  const auto a = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 300, 99);
  const auto b = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 300, 99);
  const auto c = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 300, 99, {.workers = 4});
  for (const auto* other : {&b, &c}) {
    EXPECT_EQ(a.indices, other->indices);
    EXPECT_EQ(a.critical_cost.value, other->critical_cost.value);
    EXPECT_EQ(a.trace, other->trace);
    EXPECT_EQ(a.improvements, other->improvements);
  }
  EXPECT_EQ(a.trace.size(), 301u);
  EXPECT_EQ(a.trace.front().evaluation_index, 0);
  const auto d = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 300, 100);
  EXPECT_NE(a.trace, d.trace);
}

TEST(MonteCarloTest, TraceIsNonIncreasing) {
  const auto prices = random_list(6, 14);
  const auto r = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 200, 3);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].best_cost, r.trace[i - 1].best_cost);
  EXPECT_EQ(r.best_after(200).cost, r.critical_cost.value);
  EXPECT_EQ(r.best_after(0).evaluation_index, 0);
}

TEST(MonteCarloTest, NearExhaustiveBudgetFindsTheOptimum) {
  const auto prices = random_list(7, 12);
  const double optimum = brute_force_disclose(prices, {5, std::nullopt}, 18).critical_cost.value;
  CostCache cache;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SearchOptions options;
    options.cache = &cache;
    options.record_trace = false;
    const auto r = monte_carlo_disclose(prices, {5, std::nullopt}, 18, 200'000, seed, options);
    EXPECT_EQ(r.critical_cost.value, optimum) << seed;
  }
}

TEST(MonteCarloTest, NoSizesLeftReturnsTheFullSet) {
  const auto prices = random_list(8, 6);
  const auto r = monte_carlo_disclose(prices, {6, std::nullopt}, 18, 10, 0);
  EXPECT_TRUE(r.empty_draw_range);
  EXPECT_EQ(r.subset.size(), 6u);
}

TEST(IntervalTest, FivePricesCandidateSequence) {
  const auto prices = list_of({3, 1, 5, 2, 4});
  const auto r = interval_disclose(prices, {3, std::nullopt}, 5);
  ASSERT_EQ(r.subsets_evaluated, 6);
  // Full set, then runs {2,3},{3,4},{4,5} and {2,3,4},{3,4,5}, each with the minimum 1.
  const std::vector<std::vector<double>> candidates = {
      {1, 2, 3, 4, 5}, {1, 2, 3}, {1, 3, 4}, {1, 4, 5}, {1, 2, 3, 4}, {1, 3, 4, 5}};
  double best = 1e300;
  ASSERT_EQ(r.trace.size(), candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    best = std::min(best, evaluate_prices(candidates[i], 5).value);
    EXPECT_EQ(r.trace[i].best_cost, best) << i;
    EXPECT_EQ(r.trace[i].evaluation_index, static_cast<std::int64_t>(i + 1));
  }
  EXPECT_EQ(r.critical_cost.value, best);
}

TEST(IntervalTest, ProtocolInstanceEvaluates231) {
  const auto prices = protocol_printer_set();
  const auto r = interval_disclose(prices, {10, std::nullopt}, 18);
  EXPECT_EQ(r.subsets_evaluated, 231);
  EXPECT_GE(r.subset.size(), 10u);
  EXPECT_EQ(r.subset[0].price, prices.min_price());
  const auto m = minimal_disclose(prices, {10, std::nullopt}, 18);
  EXPECT_EQ(m.subsets_evaluated, 21);
  EXPECT_GE(m.critical_cost.value, r.critical_cost.value);
  EXPECT_LE(r.critical_cost.value, full_disclose(prices, 18).critical_cost.value);
}

TEST(IntervalTest, WorkerCountDoesNotChangeTheResult) {
  const auto prices = random_list(9, 20);
  const auto a = interval_disclose(prices, {5, std::nullopt}, 18);
  const auto b = interval_disclose(prices, {5, std::nullopt}, 18, {.workers = 3});
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(MinimalTest, OneAboveRhoGivesTwoCandidates) {
  const auto prices = random_list(10, 11);
  const auto r = minimal_disclose(prices, {10, std::nullopt}, 18);
  EXPECT_EQ(r.subsets_evaluated, 2);
}

TEST(MinimalTest, NeverBeatsInterval) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto prices = random_list(seed, 14);
    const auto i = interval_disclose(prices, {5, std::nullopt}, 18);
    const auto m = minimal_disclose(prices, {5, std::nullopt}, 18);
    EXPECT_GE(m.critical_cost.value, i.critical_cost.value) << seed;
  }
}

TEST(ConstraintTest, EveryMethodKeepsTheMinimumAndSizeBounds) {
  const auto prices = random_list(31, 12);
  const DisclosureConstraints c{4, 7};
  for (Method method : {Method::brute_force, Method::monte_carlo, Method::interval, Method::minimal}) {
    const auto r = disclose(method, prices, c, 18, 500, 1);
    EXPECT_GE(r.subset.size(), 4u) << to_string(method);
    EXPECT_LE(r.subset.size(), 7u) << to_string(method);
    EXPECT_EQ(r.indices.front(), prices.min_index()) << to_string(method);
    EXPECT_TRUE(std::is_sorted(r.subset.entries().begin(), r.subset.entries().end(),
                               [](const auto& a, const auto& b) { return a.price < b.price; }));
  }
  EXPECT_THROW(interval_disclose(prices, {13, std::nullopt}, 18), ValidationError);
  EXPECT_THROW(interval_disclose(prices, {5, 4}, 18), ValidationError);
  EXPECT_THROW(interval_disclose(prices, {0, std::nullopt}, 18), ValidationError);
}

TEST(ConstraintTest, TiedMinimumUsesTheLowestIndex) {
  const auto prices = list_of({7, 5, 9, 5, 8});
  const auto r = interval_disclose(prices, {2, std::nullopt}, 3);
  EXPECT_EQ(r.indices.front(), 1u);
}

TEST(CostCacheTest, RejectsADifferentInstance) {
  CostCache cache;
  SearchOptions options;
  options.cache = &cache;
  const auto prices = random_list(40, 10);
  const auto a = interval_disclose(prices, {4, std::nullopt}, 18, options);
  EXPECT_GT(cache.size(), 0u);
  const auto b = interval_disclose(prices, {4, std::nullopt}, 18, options);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_THROW(interval_disclose(prices, {4, std::nullopt}, 17, options), ValidationError);
}

TEST(NamesTest, MethodAliases) {
  EXPECT_EQ(parse_method("mc"), Method::monte_carlo);
  EXPECT_EQ(parse_method("brute"), Method::brute_force);
  EXPECT_EQ(parse_method("interval"), Method::interval);
  EXPECT_THROW(parse_method("greedy"), ValidationError);
  EXPECT_EQ(parse_estimator("parametric"), Estimator::parametric);
}

}  // namespace
}  // namespace spd
