#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "spd/disclosure.hpp"
#include "spd/distribution.hpp"
#include "spd/errors.hpp"
#include "spd/prices.hpp"
#include "spd/search.hpp"
#include "spd/simulator.hpp"

namespace spd::cli {

namespace {

// Usage errors detected after parsing; reported with exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{}", v); }

struct DataFlags {
  std::string data;
  std::string builtin;
  std::string source;

  void add(CLI::App* app) {
    app->add_option("--data", data, "Price CSV (product_id,source,price)");
    app->add_option("--builtin", builtin, "Bundled dataset: printer|mouse|monitor|camera");
    app->add_option("--source", source, "Keep only listings from this source");
  }

  PriceList load() const {
    if (data.empty() == builtin.empty()) throw UsageError("exactly one of --data or --builtin is required");
    auto prices = data.empty() ? builtin_dataset(builtin) : load_prices(data);
    return source.empty() ? prices : prices.filter_source(source);
  }
};

// The agent's own price set for disclose/bench. A bundled product yields the evaluation
// protocol's equal-mass set unless --raw asks for the listings themselves.
struct AgentSetFlags {
  DataFlags data;
  bool raw = false;
  int initial_n = 30;

  void add(CLI::App* app) {
    data.add(app);
    app->add_flag("--raw", raw, "With --builtin, use the bundled listings instead of the generated set");
    app->add_option("--initial-n", initial_n, "With --builtin, size of the generated equal-mass set")
        ->check(CLI::Range(2, 100000));
  }

  PriceList load() const {
    if (data.builtin.empty() || raw) return data.load();
    if (!data.data.empty()) throw UsageError("exactly one of --data or --builtin is required");
    auto cfg = builtin_market_config(parse_product(data.builtin));
    cfg.initial_set_size_n = initial_n;
    cfg.rho = std::min(cfg.rho, initial_n);
    return generate_initial_prices(cfg);
  }
};

Density fit_for(const PriceList& prices, const std::string& method, std::optional<double> bandwidth) {
  if (method == "kde") return fit_kde(prices, bandwidth);
  if (method == "parametric") return fit_parametric(prices).chosen;
  throw UsageError("--method must be kde or parametric");
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// ---------------------------------------------------------------- fit

struct FitCommand {
  DataFlags data;
  std::string method = "kde";
  std::optional<double> bandwidth;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit", "Estimate the price density and write it as JSON");
    data.add(cmd);
    cmd->add_option("--method", method, "kde|parametric")->check(CLI::IsMember({"kde", "parametric"}));
    cmd->add_option("--bandwidth", bandwidth, "Kernel bandwidth (default: Silverman)");
    cmd->add_option("--out", out, "Output JSON path")->required();
  }

  int run(std::ostream& os) const {
    const auto prices = data.load();
    nlohmann::ordered_json doc;
    std::optional<Density> density;
    if (method == "kde") {
      density = fit_kde(prices, bandwidth);
      doc["kind"] = "kde";
      doc["bandwidth"] = density->kernel_model()->bandwidth;
    } else {
      const auto report = fit_parametric(prices);
      density = report.chosen;
      const auto& best = report.best();
      doc["kind"] = "parametric";
      doc["family"] = to_string(best.family);
      const auto names = parameter_names(best.family);
      nlohmann::ordered_json params;
      for (int i = 0; i < parameter_count(best.family); ++i) params[std::string(names[i])] = best.parameters[i];
      doc["parameters"] = params;
      nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
      for (const auto& f : report.ranking) {
        ranking.push_back({{"family", to_string(f.family)}, {"log_likelihood", f.log_likelihood}, {"bic", f.bic}});
      }
      doc["ranking"] = ranking;
      nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
      for (const auto& s : report.skipped) skipped.push_back({{"family", to_string(s.family)}, {"reason", s.reason}});
      doc["skipped"] = skipped;
    }
    doc["product_id"] = prices.product_id();
    doc["sample_size"] = prices.size();
    doc["support_low"] = density->support_low();

    const double lo = density->quantile(1e-6);
    const double hi = density->quantile(1.0 - 1e-6);
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    constexpr int kPoints = 512;
    for (int i = 0; i < kPoints; ++i) {
      const double y = lo + (hi - lo) * i / (kPoints - 1);
      const auto v = density->pdf_cdf(y);
      grid.push_back({{"y", y}, {"pdf", v.pdf}, {"cdf", v.cdf}});
    }
    doc["grid"] = grid;
    open_out(out) << doc.dump(2) << '\n';
    os << "fitted " << density->describe() << " to " << prices.size() << " prices\n";
    return 0;
  }
};

// ---------------------------------------------------------------- critical-cost

struct CriticalCostCommand {
  DataFlags data;
  std::string method = "kde";
  std::optional<double> bandwidth;
  std::optional<double> q;
  std::optional<int> n_new;
  std::string sweep;
  std::optional<double> from, to, step;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("critical-cost", "Critical query cost for a best price q and N new prices");
    data.add(cmd);
    cmd->add_option("--method", method, "kde|parametric")->check(CLI::IsMember({"kde", "parametric"}));
    cmd->add_option("--bandwidth", bandwidth, "Kernel bandwidth (default: Silverman)");
    cmd->add_option("--q", q, "Best known price (default: the data minimum)");
    cmd->add_option("--n-new", n_new, "Expected number of new prices")->check(CLI::PositiveNumber);
    cmd->add_option("--sweep", sweep, "Sweep q or n")->check(CLI::IsMember({"q", "n"}));
    cmd->add_option("--from", from, "Sweep start");
    cmd->add_option("--to", to, "Sweep end");
    cmd->add_option("--step", step, "Sweep step")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Sweep output CSV");
  }

  int run(std::ostream& os) const {
    if (!sweep.empty() && (!from || !to || !step || out.empty())) {
      throw UsageError("--sweep needs --from, --to, --step and --out");
    }
    if (sweep != "n" && !n_new) throw UsageError("--n-new is required");
    const auto prices = data.load();
    const Density density = fit_for(prices, method, bandwidth);
    const double best = q.value_or(prices.min_price().dollars());

    if (sweep.empty()) {
      const auto cost = critical_cost(density, best, *n_new);
      os << "density: " << density.describe() << '\n';
      os << "q: " << num(cost.q) << '\n';
      os << "n_new: " << cost.n_new << '\n';
      os << "critical_cost: " << num(cost.value) << '\n';
      os << "integration_error: " << num(cost.integration_error_estimate) << '\n';
      return 0;
    }

    auto file = open_out(out);
    file << "q,n_new,critical_cost,integration_error\n";
    const auto steps = static_cast<long>(std::floor((*to - *from) / *step + 1e-9));
    for (long i = 0; i <= steps; ++i) {
      const double x = *from + static_cast<double>(i) * *step;
      const double qi = sweep == "q" ? x : best;
      const int ni = sweep == "n" ? static_cast<int>(std::lround(x)) : *n_new;
      const auto cost = critical_cost(density, qi, ni);
      file << num(qi) << ',' << ni << ',' << num(cost.value) << ',' << num(cost.integration_error_estimate) << '\n';
    }
    os << "wrote " << steps + 1 << " rows to " << out << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------- disclose

struct DiscloseCommand {
  AgentSetFlags set;
  std::string method;
  int rho = 0;
  int n_new = 0;
  std::int64_t budget = 1000;
  std::uint64_t seed = 0;
  std::optional<int> max_size;
  std::string trace;
  std::string subset_out;
  std::string estimator = "kde";
  int workers = 1;
  std::optional<long> deadline_ms;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("disclose", "Choose the subset of prices to disclose");
    set.add(cmd);
    cmd->add_option("--method", method, "brute|mc|interval|minimal|full")
        ->required()
        ->check(CLI::IsMember({"brute", "mc", "interval", "minimal", "full"}));
    cmd->add_option("--rho", rho, "Minimum number of disclosed prices")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--n-new", n_new, "Expected number of new prices")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--budget", budget, "Monte-Carlo draws")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Monte-Carlo seed");
    cmd->add_option("--max-size", max_size, "Largest disclosed set")->check(CLI::PositiveNumber);
    cmd->add_option("--trace", trace, "Write evaluation_index,best_cost rows");
    cmd->add_option("--subset-out", subset_out, "Write the disclosed prices as CSV");
    cmd->add_option("--estimator", estimator, "kde|parametric")->check(CLI::IsMember({"kde", "parametric"}));
    cmd->add_option("--workers", workers, "Parallel evaluations")->check(CLI::Range(1, 256));
    cmd->add_option("--deadline-ms", deadline_ms, "Monte-Carlo time budget (nondeterministic)")
        ->check(CLI::PositiveNumber);
  }

  int run(std::ostream& os) const {
    const auto prices = set.load();
    const auto m = parse_method(method);
    const DisclosureConstraints constraints{rho, max_size};
    SearchOptions options{parse_estimator(estimator), workers, !trace.empty(), nullptr};

    std::int64_t draws = budget;
    if (deadline_ms && m == Method::monte_carlo) {
      // Calibrate the cost of one evaluation on a few draws, then convert the deadline.
      constexpr std::int64_t kProbe = 5;
      const auto start = std::chrono::steady_clock::now();
      monte_carlo_disclose(prices, constraints, n_new, kProbe, seed, SearchOptions{options.estimator, 1, false});
      const double per_eval =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / kProbe;
      draws = std::max<std::int64_t>(1, static_cast<std::int64_t>(static_cast<double>(*deadline_ms) / per_eval));
      os << "budget: " << draws << " (from --deadline-ms; nondeterministic)\n";
    }

    const auto result = disclose(m, prices, constraints, n_new, draws, seed, options);
    const auto full = full_disclose(prices, n_new, SearchOptions{options.estimator, 1, false});

    os << "method: " << to_string(result.method) << '\n';
    os << "prices: " << prices.size() << '\n';
    os << "rho: " << rho << '\n';
    os << "n_new: " << n_new << '\n';
    os << "subset_size: " << result.subset.size() << '\n';
    os << "subset:";
    for (const auto& e : result.subset.entries()) os << ' ' << e.price.to_string();
    os << '\n';
    os << "critical_cost: " << num(result.critical_cost.value) << '\n';
    os << "integration_error: " << num(result.critical_cost.integration_error_estimate) << '\n';
    os << "full_set_cost: " << num(full.critical_cost.value) << '\n';
    os << "evaluations: " << result.subsets_evaluated << '\n';
    if (result.seed) os << "seed: " << *result.seed << '\n';
    if (result.empty_draw_range) os << "warning: rho > n - 1 leaves no subset sizes to draw; full set returned\n";

    if (!trace.empty()) {
      auto file = open_out(trace);
      file << "evaluation_index,best_cost\n";
      for (const auto& p : result.trace) file << p.evaluation_index << ',' << num(p.best_cost) << '\n';
    }
    if (!subset_out.empty()) write_prices(subset_out, result.subset);
    return 0;
  }
};

// ---------------------------------------------------------------- simulate

struct SimulateCommand {
  std::string config;
  int position = 1;
  std::string methods = "mc,interval,minimal,full";
  std::string budgets = "10,50,100,200,1000";
  std::string out;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string sizes;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "Run the first- or k-th-position evaluation protocol");
    cmd->add_option("--config", config, "Market configuration JSON")->required();
    cmd->add_option("--position", position, "Position k of the agent in the query sequence")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--methods", methods, "Comma-separated: brute,mc,interval,minimal,full");
    cmd->add_option("--budgets", budgets, "Comma-separated evaluation budgets");
    cmd->add_option("--out", out, "Output CSV")->required();
    cmd->add_option("--trials", trials, "Override the configured trial count")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Override the configured base seed");
    cmd->add_option("--workers", workers, "Parallel trials")->check(CLI::Range(1, 256));
    cmd->add_option("--sizes", sizes, "Comma-separated initial set sizes: run the set-size experiment");
  }

  int run(std::ostream& os) const {
    auto cfg = load_market_config(config);
    if (trials) cfg.trials = *trials;
    if (seed) cfg.base_seed = *seed;
    if (workers) cfg.workers = *workers;

    std::vector<Method> ms;
    for (const auto& name : split(methods)) ms.push_back(parse_method(name));
    std::vector<std::int64_t> bs;
    for (const auto& b : split(budgets)) {
      try {
        bs.push_back(std::stoll(b));
      } catch (const std::exception&) {
        throw UsageError("bad budget '" + b + "'");
      }
    }
    if (ms.empty() || bs.empty()) throw UsageError("--methods and --budgets must be non-empty");
    os << "seed: " << cfg.base_seed << '\n';

    auto file = open_out(out);
    if (!sizes.empty()) {
      std::vector<int> ns;
      for (const auto& s : split(sizes)) ns.push_back(std::stoi(s));
      file << "method,n,budget,mean_cost,std_error,trials,seed\n";
      for (auto m : ms) {
        for (const auto& row : size_effect_experiment(cfg, ns, m, bs.front())) {
          file << to_string(m) << ',' << row.n << ',' << bs.front() << ',' << num(row.mean_cost) << ','
               << num(row.std_error) << ',' << row.trial_costs.size() << ',' << cfg.base_seed << '\n';
          os << to_string(m) << " n=" << row.n << " mean_cost=" << num(row.mean_cost) << '\n';
        }
      }
      return 0;
    }

    const auto reports = simulate_kth_position(cfg, position, ms, bs);
    file << "method,position_k,budget,mean_cost,std_error,full_set_cost,trials,seed\n";
    for (const auto& r : reports) {
      for (const auto& p : r.curve) {
        file << to_string(r.method) << ',' << r.position_k << ',' << p.budget << ',' << num(p.mean_cost) << ','
             << num(p.std_error) << ',' << num(r.full_set_cost) << ',' << r.trials << ',' << r.seed << '\n';
      }
      const auto& last = r.curve.back();
      const char* sign = last.mean_cost < r.full_set_cost ? "below" : (last.mean_cost > r.full_set_cost ? "above" : "equal to");
      os << to_string(r.method) << ": mean cost " << num(last.mean_cost) << " at budget " << last.budget << ", "
         << sign << " full disclosure (" << num(r.full_set_cost) << ")\n";
    }
    return 0;
  }
};

// ---------------------------------------------------------------- bench

struct BenchCommand {
  AgentSetFlags set;
  int rho = 10;
  int n_new = 18;
  std::string methods = "mc,interval,minimal,full";
  std::int64_t budget = 100;
  std::uint64_t seed = 0;
  std::string estimator = "kde";
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Time subset evaluations per method");
    set.add(cmd);
    cmd->add_option("--rho", rho, "Minimum number of disclosed prices")->check(CLI::PositiveNumber);
    cmd->add_option("--n-new", n_new, "Expected number of new prices")->check(CLI::PositiveNumber);
    cmd->add_option("--methods", methods, "Comma-separated methods");
    cmd->add_option("--budget", budget, "Monte-Carlo draws")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Monte-Carlo seed");
    cmd->add_option("--estimator", estimator, "kde|parametric")->check(CLI::IsMember({"kde", "parametric"}));
    cmd->add_option("--out", out, "Output CSV (default: stdout)");
  }

  int run(std::ostream& os) const {
    const auto prices = set.load();
    std::ostringstream table;
    table << "method,n,rho,n_new,evaluations,total_seconds,mean_seconds_per_evaluation\n";
    for (const auto& name : split(methods)) {
      const auto m = parse_method(name);
      SearchOptions options{parse_estimator(estimator), 1, false, nullptr};
      const auto start = std::chrono::steady_clock::now();
      const auto result = disclose(m, prices, DisclosureConstraints{rho, std::nullopt}, n_new, budget, seed, options);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      table << to_string(m) << ',' << prices.size() << ',' << rho << ',' << n_new << ',' << result.subsets_evaluated
            << ',' << num(seconds) << ',' << num(seconds / static_cast<double>(result.subsets_evaluated)) << '\n';
    }
    if (out.empty()) {
      os << table.str();
    } else {
      open_out(out) << table.str();
      os << "wrote " << out << '\n';
    }
    return 0;
  }
};

// ---------------------------------------------------------------- counts

struct CountsCommand {
  int n = 0;
  int rho = 0;
  std::string kind = "brute";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("counts", "Number of candidate subsets a method evaluates");
    cmd->add_option("--n", n, "Number of prices")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--rho", rho, "Minimum number of disclosed prices")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--kind", kind, "brute|interval|minimal")->check(CLI::IsMember({"brute", "interval", "minimal"}));
  }

  int run(std::ostream& os) const {
    if (kind == "brute") os << subset_count(n, rho).str() << '\n';
    else if (kind == "interval") os << interval_subset_count(n, rho) << '\n';
    else os << minimal_subset_count(n, rho) << '\n';
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective price disclosure: critical costs, disclosure methods and simulations", "spd"};
  app.require_subcommand(1);
  FitCommand fit;
  CriticalCostCommand cost;
  DiscloseCommand disclose_cmd;
  SimulateCommand simulate;
  BenchCommand bench;
  CountsCommand counts;
  fit.add(app);
  cost.add(app);
  disclose_cmd.add(app);
  simulate.add(app);
  bench.add(app);
  counts.add(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (name == "fit") return fit.run(out);
    if (name == "critical-cost") return cost.run(out);
    if (name == "disclose") return disclose_cmd.run(out);
    if (name == "simulate") return simulate.run(out);
    if (name == "bench") return bench.run(out);
    if (name == "counts") return counts.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << chosen->help();
    return 2;
  } catch (const spd::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace spd::cli
