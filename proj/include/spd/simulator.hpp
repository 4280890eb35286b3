#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spd/disclosure.hpp"
#include "spd/distribution.hpp"
#include "spd/prices.hpp"
#include "spd/random.hpp"

namespace spd {

struct MarketConfig {
  Density true_density;  // the market's price distribution
  double q0 = 0.0;       // minimum of the agent's initial set
  double csa_listing_mean = 20.6;
  double overlap_rate = 0.12;
  int rho = 10;
  int initial_set_size_n = 30;
  Estimator estimator = Estimator::kde;
  // 0 selects the protocol default: 1000 first-position Monte-Carlo runs, 100 runs at k >= 2.
  int trials = 0;
  std::uint64_t base_seed = 0;
  // Size of each other agent's listing at k >= 2; defaults to the expected new-price count.
  std::optional<int> listing_count;
  int workers = 1;
  std::string product_id = "market";
};

// Throws ValidationError when the configuration violates its invariants.
void validate(const MarketConfig& cfg);
// Expected number of new prices per further query (listing mean net of overlap).
int new_price_count(const MarketConfig& cfg);
int effective_trials(const MarketConfig& cfg, int position_k);

// Seed roles, combined with (base_seed, trial) by derive_seed.
enum class SeedRole : std::uint64_t { monte_carlo = 1, listing = 100 };
std::uint64_t trial_seed(const MarketConfig& cfg, int trial, SeedRole role, int offset = 0);

// initial_set_size_n prices with equal probability mass between neighbours, starting at q0.
PriceList generate_initial_prices(const MarketConfig& cfg);
// Inverse-cdf draws from the true density; listing_count (or the new-price count) prices.
PriceList draw_csa_listing(const MarketConfig& cfg, CounterRng& rng);

struct CurvePoint {
  std::int64_t budget = 0;
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::vector<double> trial_costs;
};

struct SimulationReport {
  Method method = Method::full;
  int position_k = 1;
  int trials = 1;
  double full_set_cost = 0.0;
  std::int64_t natural_evaluations = 0;  // deterministic methods: their full candidate count
  std::uint64_t seed = 0;
  std::vector<CurvePoint> curve;
};

// The agent is queried first: costs of the disclosed set for each method and budget.
std::vector<SimulationReport> simulate_first_position(const MarketConfig& cfg, std::span<const Method> methods,
                                                      std::span<const std::int64_t> budgets);

// The agent is queried k-th: the searcher pools the disclosed set with k-1 other listings
// drawn from the true density, refits and uses the pooled minimum.
std::vector<SimulationReport> simulate_kth_position(const MarketConfig& cfg, int position_k,
                                                    std::span<const Method> methods,
                                                    std::span<const std::int64_t> budgets);

struct SizeEffectRow {
  int n = 0;
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::vector<double> trial_costs;
};

std::vector<SizeEffectRow> size_effect_experiment(const MarketConfig& cfg, std::span<const int> sizes,
                                                  Method method, std::int64_t budget);

// One-sided sign test of "candidate < baseline" over paired samples; ties are dropped.
struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;
};

SignTest sign_test(std::span<const double> candidate, std::span<const double> baseline);

// Configuration loading. JSON keys mirror MarketConfig; see docs/formats.md.
MarketConfig market_config_from_json(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {});
MarketConfig load_market_config(const std::filesystem::path& path);
// Protocol defaults for a bundled product: kernel density of its largest listing,
// q0 = stated minimum, listing mean = mean per-source count.
MarketConfig builtin_market_config(Product product);

}  // namespace spd
