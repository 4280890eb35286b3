#include "spd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>

#include "spd/errors.hpp"
#include "spd/parallel.hpp"
#include "spd/search.hpp"

namespace spd {

void validate(const MarketConfig& cfg) {
  if (!(cfg.overlap_rate >= 0.0 && cfg.overlap_rate < 1.0)) throw ValidationError("overlap_rate must lie in [0, 1)");
  if (!(cfg.csa_listing_mean > 0.0)) throw ValidationError("csa_listing_mean must be positive");
  if (cfg.rho < 1) throw ValidationError("rho must be at least 1");
  if (cfg.initial_set_size_n < 2) throw ValidationError("initial_set_size_n must be at least 2");
  if (cfg.rho > cfg.initial_set_size_n) throw ValidationError("rho exceeds initial_set_size_n");
  if (cfg.trials < 0) throw ValidationError("trials must be non-negative");
  if (cfg.listing_count && *cfg.listing_count < 1) throw ValidationError("listing_count must be positive");
  if (!(cfg.q0 >= cfg.true_density.support_low())) throw ValidationError("q0 lies below the price support");
}

int new_price_count(const MarketConfig& cfg) {
  return expected_new_prices(cfg.csa_listing_mean, cfg.overlap_rate);
}

int effective_trials(const MarketConfig& cfg, int position_k) {
  if (cfg.trials > 0) return cfg.trials;
  return position_k <= 1 ? 1000 : 100;
}

std::uint64_t trial_seed(const MarketConfig& cfg, int trial, SeedRole role, int offset) {
  return derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial),
                     static_cast<std::uint64_t>(role) + static_cast<std::uint64_t>(offset));
}

PriceList generate_initial_prices(const MarketConfig& cfg) {
  const auto values = equal_mass_prices(cfg.true_density, cfg.initial_set_size_n, cfg.q0);
  return make_price_list(cfg.product_id, "initial", values);
}

PriceList draw_csa_listing(const MarketConfig& cfg, CounterRng& rng) {
  const int count = cfg.listing_count.value_or(new_price_count(cfg));
  std::vector<PriceEntry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double y = cfg.true_density.quantile(rng.open_unit());
    entries.push_back({"drawn", Price::from_cents(std::max<std::int64_t>(1, Price::from_dollars(y).cents()))});
  }
  return PriceList(cfg.product_id, std::move(entries));
}

namespace {

CurvePoint summarize(std::int64_t budget, std::vector<double> costs) {
  CurvePoint p;
  p.budget = budget;
  const auto n = static_cast<double>(costs.size());
  p.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  if (costs.size() > 1) {
    double ss = 0.0;
    for (double c : costs) ss += (c - p.mean_cost) * (c - p.mean_cost);
    p.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  p.trial_costs = std::move(costs);
  return p;
}

std::int64_t max_budget(std::span<const std::int64_t> budgets) {
  if (budgets.empty()) throw ValidationError("at least one budget is required");
  for (auto b : budgets) {
    if (b < 1) throw ValidationError("budgets must be positive");
  }
  return *std::max_element(budgets.begin(), budgets.end());
}

struct Prepared {
  PriceList initial;
  int n_new;
  DisclosureConstraints constraints;
  double full_cost;
};

Prepared prepare(const MarketConfig& cfg) {
  validate(cfg);
  auto initial = generate_initial_prices(cfg);
  const int n_new = new_price_count(cfg);
  SearchOptions options{cfg.estimator, cfg.workers, false, nullptr};
  const double full_cost = full_disclose(initial, n_new, options).critical_cost.value;
  return {std::move(initial), n_new, DisclosureConstraints{cfg.rho, std::nullopt}, full_cost};
}

// Deterministic methods run once; Monte-Carlo once per trial. Either way the result
// is the incumbent history, from which each budget's disclosed set is read.
DisclosureResult run_method(const MarketConfig& cfg, const Prepared& p, Method method, std::int64_t budget,
                            std::uint64_t seed, int workers) {
  SearchOptions options{cfg.estimator, workers, false, nullptr};
  return disclose(method, p.initial, p.constraints, p.n_new, budget, seed, options);
}

}  // namespace

std::vector<SimulationReport> simulate_first_position(const MarketConfig& cfg, std::span<const Method> methods,
                                                      std::span<const std::int64_t> budgets) {
  const auto top = max_budget(budgets);
  const Prepared p = prepare(cfg);
  std::vector<SimulationReport> reports;

  for (auto method : methods) {
    SimulationReport report;
    report.method = method;
    report.position_k = 1;
    report.full_set_cost = p.full_cost;
    report.seed = cfg.base_seed;

    if (method == Method::monte_carlo) {
      const int trials = effective_trials(cfg, 1);
      std::vector<std::optional<DisclosureResult>> slots(static_cast<std::size_t>(trials));
      parallel_for(slots.size(), cfg.workers, [&](std::size_t t) {
        slots[t] = run_method(cfg, p, method, top, trial_seed(cfg, static_cast<int>(t), SeedRole::monte_carlo), 1);
      });
      report.trials = trials;
      report.natural_evaluations = top;
      for (auto b : budgets) {
        std::vector<double> costs;
        costs.reserve(slots.size());
        for (const auto& r : slots) costs.push_back(r->best_after(b).cost);
        report.curve.push_back(summarize(b, std::move(costs)));
      }
    } else {
      const auto result = run_method(cfg, p, method, top, cfg.base_seed, cfg.workers);
      report.trials = 1;
      report.natural_evaluations = result.subsets_evaluated;
      for (auto b : budgets) {
        report.curve.push_back(summarize(b, {result.best_after(std::min(b, result.subsets_evaluated)).cost}));
      }
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<SimulationReport> simulate_kth_position(const MarketConfig& cfg, int position_k,
                                                    std::span<const Method> methods,
                                                    std::span<const std::int64_t> budgets) {
  if (position_k < 1) throw ValidationError("position k must be at least 1");
  if (position_k == 1) return simulate_first_position(cfg, methods, budgets);

  const auto top = max_budget(budgets);
  const Prepared p = prepare(cfg);
  const int trials = effective_trials(cfg, position_k);
  const auto T = static_cast<std::size_t>(trials);

  // Deterministic incumbents are shared by every trial.
  std::map<Method, DisclosureResult> fixed;
  for (auto method : methods) {
    if (method != Method::monte_carlo && !fixed.contains(method)) {
      fixed.emplace(method, run_method(cfg, p, method, top, cfg.base_seed, cfg.workers));
    }
  }

  // costs[m][b][t]
  std::vector<std::vector<std::vector<double>>> costs(
      methods.size(), std::vector<std::vector<double>>(budgets.size(), std::vector<double>(T)));
  std::vector<double> full_costs(T);

  parallel_for(T, cfg.workers, [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    std::vector<PriceEntry> drawn;
    for (int j = 1; j < position_k; ++j) {
      CounterRng rng(trial_seed(cfg, trial, SeedRole::listing, j));
      const auto listing = draw_csa_listing(cfg, rng);
      drawn.insert(drawn.end(), listing.entries().begin(), listing.entries().end());
    }
    const PriceList others(cfg.product_id, std::move(drawn));

    std::map<std::vector<std::size_t>, double> pooled_cost;
    auto cost_of = [&](const std::vector<std::size_t>& indices) {
      auto key = indices;
      std::sort(key.begin(), key.end());
      if (auto it = pooled_cost.find(key); it != pooled_cost.end()) return it->second;
      const auto pooled = p.initial.subset(key).pooled_with(others);
      const double c = evaluate_subset(pooled, p.n_new, cfg.estimator).value;
      pooled_cost.emplace(std::move(key), c);
      return c;
    };

    std::vector<std::size_t> everything(p.initial.size());
    std::iota(everything.begin(), everything.end(), std::size_t{0});
    full_costs[t] = cost_of(everything);

    std::optional<DisclosureResult> mc;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const DisclosureResult* result = nullptr;
      if (methods[m] == Method::monte_carlo) {
        if (!mc) mc = run_method(cfg, p, Method::monte_carlo, top, trial_seed(cfg, trial, SeedRole::monte_carlo), 1);
        result = &*mc;
      } else {
        result = &fixed.at(methods[m]);
      }
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        const auto spent = std::min(budgets[b], result->subsets_evaluated);
        costs[m][b][t] = cost_of(result->best_after(spent).indices);
      }
    }
  });

  const double full_mean = std::accumulate(full_costs.begin(), full_costs.end(), 0.0) / static_cast<double>(T);
  std::vector<SimulationReport> reports;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    SimulationReport report;
    report.method = methods[m];
    report.position_k = position_k;
    report.trials = trials;
    report.full_set_cost = full_mean;
    report.seed = cfg.base_seed;
    report.natural_evaluations =
        methods[m] == Method::monte_carlo ? top : fixed.at(methods[m]).subsets_evaluated;
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      report.curve.push_back(summarize(budgets[b], std::move(costs[m][b])));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<SizeEffectRow> size_effect_experiment(const MarketConfig& cfg, std::span<const int> sizes,
                                                  Method method, std::int64_t budget) {
  std::vector<SizeEffectRow> rows;
  for (int n : sizes) {
    if (n < cfg.rho) throw ValidationError("set size " + std::to_string(n) + " is below rho");
    MarketConfig sized = cfg;
    sized.initial_set_size_n = n;
    const Method methods[] = {method};
    const std::int64_t budgets[] = {budget};
    auto reports = simulate_first_position(sized, methods, budgets);
    auto& point = reports.front().curve.front();
    rows.push_back({n, point.mean_cost, point.std_error, std::move(point.trial_costs)});
  }
  return rows;
}

SignTest sign_test(std::span<const double> candidate, std::span<const double> baseline) {
  if (candidate.size() != baseline.size()) throw ValidationError("sign test needs paired samples");
  SignTest s;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (candidate[i] < baseline[i]) ++s.wins;
    else if (candidate[i] > baseline[i]) ++s.losses;
    else ++s.ties;
  }
  const int n = s.wins + s.losses;
  if (n == 0 || s.wins == 0) {
    s.p_value = 1.0;
    return s;
  }
  // P(X >= wins) under Binomial(n, 1/2).
  const boost::math::binomial_distribution<double> null_model(n, 0.5);
  s.p_value = boost::math::cdf(boost::math::complement(null_model, static_cast<double>(s.wins - 1)));
  return s;
}

}  // namespace spd
