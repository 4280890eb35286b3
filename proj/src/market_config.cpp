#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spd/errors.hpp"
#include "spd/simulator.hpp"

namespace spd {

namespace {

const std::set<std::string> kKnownKeys = {
    "product", "data", "density_source", "bandwidth", "q0", "csa_listing_mean", "overlap_rate", "rho",
    "initial_set_size_n", "estimator", "trials", "base_seed", "listing_count", "workers"};

// The listing used to estimate the market density: "largest" (default), "all", or a source label.
PriceList density_sample(const PriceList& prices, const std::string& source) {
  if (source == "all") return prices;
  if (source != "largest") return prices.filter_source(source);
  std::string best;
  int best_count = -1;
  for (const auto& [label, count] : prices.per_source_counts()) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return prices.filter_source(best);
}

template <typename T>
T get(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

MarketConfig market_config_from_json(std::string_view json_text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  if (doc.contains("product") == doc.contains("data")) {
    throw ValidationError("config: exactly one of 'product' or 'data' is required");
  }

  std::optional<Price> stated_minimum;
  std::optional<PriceList> prices;
  if (doc.contains("product")) {
    const auto product = parse_product(get<std::string>(doc, "product", ""));
    prices = builtin_dataset(product);
    stated_minimum = builtin_manifest(product).stated_minimum;
  } else {
    std::filesystem::path path = get<std::string>(doc, "data", "");
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    prices = load_prices(path);
  }

  const auto sample = density_sample(*prices, get<std::string>(doc, "density_source", "largest"));
  std::optional<double> bandwidth;
  if (doc.contains("bandwidth")) bandwidth = get<double>(doc, "bandwidth", 0.0);

  MarketConfig cfg{.true_density = fit_kde(sample, bandwidth)};
  cfg.product_id = prices->product_id();
  cfg.q0 = get<double>(doc, "q0", stated_minimum ? stated_minimum->dollars() : prices->min_price().dollars());
  cfg.csa_listing_mean = get<double>(doc, "csa_listing_mean", prices->mean_listings_per_source());
  cfg.overlap_rate = get<double>(doc, "overlap_rate", 0.12);
  cfg.rho = get<int>(doc, "rho", 10);
  cfg.initial_set_size_n = get<int>(doc, "initial_set_size_n", 30);
  cfg.estimator = parse_estimator(get<std::string>(doc, "estimator", "kde"));
  cfg.trials = get<int>(doc, "trials", 0);
  cfg.base_seed = get<std::uint64_t>(doc, "base_seed", 0);
  if (doc.contains("listing_count")) cfg.listing_count = get<int>(doc, "listing_count", 0);
  cfg.workers = get<int>(doc, "workers", 1);
  validate(cfg);
  return cfg;
}

MarketConfig load_market_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return market_config_from_json(buf.str(), path.parent_path());
}

MarketConfig builtin_market_config(Product product) {
  nlohmann::json doc = {{"product", std::string(to_string(product))}};
  return market_config_from_json(doc.dump());
}

}  // namespace spd
