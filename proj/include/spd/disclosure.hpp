#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spd/distribution.hpp"
#include "spd/prices.hpp"
#include "spd/search.hpp"

namespace spd {

enum class Estimator { kde, parametric };
enum class Method { brute_force, monte_carlo, interval, minimal, full };

std::string_view to_string(Estimator estimator);
Estimator parse_estimator(std::string_view name);
std::string_view to_string(Method method);
// Accepts brute, brute_force, mc, monte_carlo, interval, minimal, full.
Method parse_method(std::string_view name);

// The designated minimum is always disclosed.
struct DisclosureConstraints {
  int rho = 10;
  std::optional<int> max_size;
};

struct TracePoint {
  std::int64_t evaluation_index = 0;
  double best_cost = 0.0;

  bool operator==(const TracePoint&) const = default;
};

// A new incumbent and the evaluation at which it was found.
struct Improvement {
  std::int64_t evaluation_index = 0;
  double cost = 0.0;
  std::vector<std::size_t> indices;

  bool operator==(const Improvement&) const = default;
};

struct DisclosureResult {
  PriceList subset;                  // ascending by price
  std::vector<std::size_t> indices;  // into the input list, same order as subset
  CriticalCost critical_cost;
  Method method = Method::full;
  std::int64_t subsets_evaluated = 0;
  std::optional<std::uint64_t> seed;
  std::vector<TracePoint> trace;  // one point per evaluation when recorded
  std::vector<Improvement> improvements;
  // Monte-Carlo only: rho > n - 1 left no sizes to draw, so the full set is returned.
  bool empty_draw_range = false;

  // The incumbent after `evaluations` evaluations (index 0 is the Monte-Carlo initialization).
  const Improvement& best_after(std::int64_t evaluations) const;
};

// Fits the searcher's density to a price sample with the estimator's defaults.
Density fit_density(std::span<const double> prices, Estimator estimator);

// Critical cost of disclosing exactly these prices: fit a density, take q as their minimum.
CriticalCost evaluate_prices(std::span<const double> prices, int n_new, Estimator estimator = Estimator::kde);
CriticalCost evaluate_subset(const PriceList& subset, int n_new, Estimator estimator = Estimator::kde);

// Memo of subset costs keyed by sorted index set. One cache serves one
// (price list, n_new, estimator) context; reuse across contexts is rejected.
class CostCache {
 public:
  std::optional<CriticalCost> find(std::uint64_t context, const std::vector<std::uint32_t>& key) const;
  void store(std::uint64_t context, std::vector<std::uint32_t> key, const CriticalCost& cost);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::optional<std::uint64_t> context_;
  std::map<std::vector<std::uint32_t>, CriticalCost> entries_;
};

struct SearchOptions {
  Estimator estimator = Estimator::kde;
  int workers = 1;
  bool record_trace = true;
  CostCache* cache = nullptr;
  // Exhaustive search refuses instances with more candidate subsets than this.
  std::uint64_t brute_force_limit = 5'000'000;
};

DisclosureResult full_disclose(const PriceList& prices, int n_new, const SearchOptions& options = {});

// Exhaustive oracle over every subset containing the minimum with size in [rho, n]
// (capped by max_size). Equal costs resolve to the lexicographically smallest sorted prices.
DisclosureResult brute_force_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                      const SearchOptions& options = {});

// Random subsets: size k uniform on [rho, n-1], k-1 distinct non-minimum listings plus
// the minimum; starts from the full set and runs exactly `budget` draws.
DisclosureResult monte_carlo_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                      std::int64_t budget, std::uint64_t seed,
                                      const SearchOptions& options = {});

// The minimum joined with every contiguous run of the ascending prices, for each size.
DisclosureResult interval_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                   const SearchOptions& options = {});

// The ascending prefixes of size rho..n-1, plus the full set.
DisclosureResult minimal_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                  const SearchOptions& options = {});

DisclosureResult disclose(Method method, const PriceList& prices, const DisclosureConstraints& c, int n_new,
                          std::int64_t budget, std::uint64_t seed, const SearchOptions& options = {});

}  // namespace spd
