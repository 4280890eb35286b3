#include "spd/disclosure.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "spd/errors.hpp"
#include "spd/parallel.hpp"
#include "spd/random.hpp"

namespace spd {

std::string_view to_string(Estimator estimator) {
  return estimator == Estimator::kde ? "kde" : "parametric";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "kde") return Estimator::kde;
  if (name == "parametric") return Estimator::parametric;
  throw ValidationError("unknown estimator '" + std::string(name) + "' (kde|parametric)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::brute_force: return "brute_force";
    case Method::monte_carlo: return "monte_carlo";
    case Method::interval: return "interval";
    case Method::minimal: return "minimal";
    case Method::full: return "full";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "brute" || name == "brute_force") return Method::brute_force;
  if (name == "mc" || name == "monte_carlo") return Method::monte_carlo;
  if (name == "interval") return Method::interval;
  if (name == "minimal") return Method::minimal;
  if (name == "full") return Method::full;
  throw ValidationError("unknown method '" + std::string(name) + "' (brute|mc|interval|minimal|full)");
}

const Improvement& DisclosureResult::best_after(std::int64_t evaluations) const {
  if (improvements.empty()) throw Error("disclosure result has no incumbent history");
  auto it = std::upper_bound(improvements.begin(), improvements.end(), evaluations,
                             [](std::int64_t e, const Improvement& imp) { return e < imp.evaluation_index; });
  if (it == improvements.begin()) return improvements.front();
  return *std::prev(it);
}

Density fit_density(std::span<const double> prices, Estimator estimator) {
  if (estimator == Estimator::kde) return fit_kde(prices);
  return fit_parametric(prices).chosen;
}

CriticalCost evaluate_prices(std::span<const double> prices, int n_new, Estimator estimator) {
  if (prices.empty()) throw ValidationError("cannot evaluate an empty subset");
  std::vector<double> sorted(prices.begin(), prices.end());
  std::sort(sorted.begin(), sorted.end());
  const Density density = fit_density(sorted, estimator);
  return critical_cost(density, sorted.front(), n_new);
}

CriticalCost evaluate_subset(const PriceList& subset, int n_new, Estimator estimator) {
  const auto values = subset.dollars();
  return evaluate_prices(values, n_new, estimator);
}

std::optional<CriticalCost> CostCache::find(std::uint64_t context, const std::vector<std::uint32_t>& key) const {
  std::lock_guard lock(mutex_);
  if (context_ && *context_ != context) throw ValidationError("cost cache reused for a different instance");
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CostCache::store(std::uint64_t context, std::vector<std::uint32_t> key, const CriticalCost& cost) {
  std::lock_guard lock(mutex_);
  if (context_ && *context_ != context) throw ValidationError("cost cache reused for a different instance");
  context_ = context;
  entries_.emplace(std::move(key), cost);
}

std::size_t CostCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

using Indices = std::vector<std::size_t>;

void validate(const PriceList& prices, const DisclosureConstraints& c, int n_new) {
  const auto n = static_cast<int>(prices.size());
  if (c.rho < 1) throw ValidationError("rho must be at least 1");
  if (c.rho > n) {
    throw ValidationError("rho = " + std::to_string(c.rho) + " exceeds the " + std::to_string(n) +
                          " available prices");
  }
  if (c.max_size && *c.max_size < c.rho) throw ValidationError("max size is below rho");
  if (n_new < 1) throw ValidationError("number of new prices must be at least 1");
}

int largest_size(const PriceList& prices, const DisclosureConstraints& c) {
  const auto n = static_cast<int>(prices.size());
  return c.max_size ? std::min(n, *c.max_size) : n;
}

// Positions sorted by (price, index); element 0 is the designated minimum.
Indices ascending_order(const PriceList& prices) {
  Indices order(prices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prices[a].price < prices[b].price; });
  return order;
}

std::uint64_t context_of(const PriceList& prices, int n_new, Estimator estimator) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(n_new) * 2 + (estimator == Estimator::kde ? 0 : 1));
  for (const auto& e : prices.entries()) h = mix64(h ^ static_cast<std::uint64_t>(e.price.cents()));
  return h;
}

class SubsetEvaluator {
 public:
  SubsetEvaluator(const PriceList& prices, int n_new, const SearchOptions& options)
      : values_(prices.dollars()),
        n_new_(n_new),
        estimator_(options.estimator),
        cache_(options.cache != nullptr ? options.cache : &own_cache_),
        context_(context_of(prices, n_new, options.estimator)) {}

  CriticalCost operator()(const Indices& indices) const {
    std::vector<std::uint32_t> key(indices.begin(), indices.end());
    std::sort(key.begin(), key.end());
    if (auto hit = cache_->find(context_, key)) return *hit;
    std::vector<double> picked;
    picked.reserve(indices.size());
    for (auto i : indices) picked.push_back(values_[i]);
    const auto cost = evaluate_prices(picked, n_new_, estimator_);
    cache_->store(context_, std::move(key), cost);
    return cost;
  }

 private:
  std::vector<double> values_;
  int n_new_;
  Estimator estimator_;
  CostCache own_cache_;
  CostCache* cache_;
  std::uint64_t context_;
};

// Keeps the incumbent, the trace and the improvement history in evaluation order.
class Incumbent {
 public:
  Incumbent(const PriceList& prices, bool record_trace, bool lexicographic_ties)
      : prices_(prices), record_trace_(record_trace), lexicographic_ties_(lexicographic_ties) {}

  void consider(std::int64_t evaluation_index, const Indices& indices, const CriticalCost& cost) {
    bool better = !has_best_ || cost.value < best_cost_.value;
    if (has_best_ && lexicographic_ties_ && cost.value == best_cost_.value) {
      better = sorted_prices(indices) < sorted_prices(best_);
    }
    if (better) {
      has_best_ = true;
      best_ = indices;
      best_cost_ = cost;
      improvements_.push_back({evaluation_index, cost.value, indices});
    }
    if (record_trace_) trace_.push_back({evaluation_index, best_cost_.value});
  }

  bool has_best() const { return has_best_; }

  DisclosureResult finish(Method method, std::int64_t evaluated) && {
    if (!has_best_) throw Error("no feasible disclosure candidate");
    DisclosureResult r{prices_.subset(sorted_indices(best_)),
                       sorted_indices(best_),
                       best_cost_,
                       method,
                       evaluated,
                       std::nullopt,
                       std::move(trace_),
                       std::move(improvements_),
                       false};
    for (auto& imp : r.improvements) imp.indices = sorted_indices(imp.indices);
    return r;
  }

 private:
  Indices sorted_indices(Indices idx) const {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return prices_[a].price < prices_[b].price || (prices_[a].price == prices_[b].price && a < b);
    });
    return idx;
  }

  std::vector<std::int64_t> sorted_prices(const Indices& idx) const {
    std::vector<std::int64_t> cents;
    cents.reserve(idx.size());
    for (auto i : idx) cents.push_back(prices_[i].price.cents());
    std::sort(cents.begin(), cents.end());
    return cents;
  }

  const PriceList& prices_;
  bool record_trace_;
  bool lexicographic_ties_;
  bool has_best_ = false;
  Indices best_;
  CriticalCost best_cost_;
  std::vector<TracePoint> trace_;
  std::vector<Improvement> improvements_;
};

// Pulls candidates from `next` in chunks, evaluates each chunk on the worker pool and
// feeds the results to the incumbent in generation order. Returns the number evaluated.
std::int64_t run_candidates(const std::function<bool(Indices&)>& next, const SubsetEvaluator& evaluate,
                            Incumbent& incumbent, std::int64_t first_index, int workers) {
  constexpr std::size_t kChunk = 512;
  std::int64_t index = first_index;
  std::vector<Indices> chunk;
  std::vector<CriticalCost> costs;
  bool more = true;
  while (more) {
    chunk.clear();
    Indices candidate;
    while (chunk.size() < kChunk && (more = next(candidate))) chunk.push_back(candidate);
    costs.assign(chunk.size(), CriticalCost{});
    parallel_for(chunk.size(), workers, [&](std::size_t i) { costs[i] = evaluate(chunk[i]); });
    for (std::size_t i = 0; i < chunk.size(); ++i) incumbent.consider(index++, chunk[i], costs[i]);
  }
  return index - first_index;
}

Indices all_indices(const PriceList& prices) {
  Indices idx(prices.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

DisclosureResult full_disclose(const PriceList& prices, int n_new, const SearchOptions& options) {
  if (n_new < 1) throw ValidationError("number of new prices must be at least 1");
  SubsetEvaluator evaluate(prices, n_new, options);
  Incumbent incumbent(prices, options.record_trace, false);
  const auto idx = all_indices(prices);
  incumbent.consider(1, idx, evaluate(idx));
  return std::move(incumbent).finish(Method::full, 1);
}

DisclosureResult brute_force_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                      const SearchOptions& options) {
  validate(prices, c, n_new);
  const int n = static_cast<int>(prices.size());
  const int kmax = largest_size(prices, c);

  BigInt count = 0;
  for (int k = c.rho; k <= kmax; ++k) count += subset_count(n, k) - (k < n ? subset_count(n, k + 1) : BigInt(0));
  if (count > options.brute_force_limit) {
    throw RefusalError("exhaustive search refused: subset_count(" + std::to_string(n) + ", " +
                       std::to_string(c.rho) + ") = " + count.str() + " exceeds the limit of " +
                       std::to_string(options.brute_force_limit));
  }

  const auto order = ascending_order(prices);
  const std::size_t minimum = order.front();
  Indices others(order.begin() + 1, order.end());

  // Combinations of k-1 positions among the non-minimum listings, lexicographic, sizes ascending.
  int k = c.rho;
  std::vector<std::size_t> pos;
  bool started = false;
  auto next = [&](Indices& out) -> bool {
    while (k <= kmax) {
      const auto r = static_cast<std::size_t>(k - 1);
      if (!started) {
        pos.resize(r);
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        started = true;
      } else {
        std::size_t i = r;
        while (i > 0 && pos[i - 1] == others.size() - r + (i - 1)) --i;
        if (i == 0) {
          ++k;
          started = false;
          continue;
        }
        ++pos[i - 1];
        for (std::size_t j = i; j < r; ++j) pos[j] = pos[j - 1] + 1;
      }
      out.clear();
      out.push_back(minimum);
      for (auto p : pos) out.push_back(others[p]);
      return true;
    }
    return false;
  };

  SubsetEvaluator evaluate(prices, n_new, options);
  Incumbent incumbent(prices, options.record_trace, true);
  const auto evaluated = run_candidates(next, evaluate, incumbent, 1, options.workers);
  return std::move(incumbent).finish(Method::brute_force, evaluated);
}

DisclosureResult monte_carlo_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                      std::int64_t budget, std::uint64_t seed, const SearchOptions& options) {
  validate(prices, c, n_new);
  if (budget < 1) throw ValidationError("Monte-Carlo budget must be at least 1");
  const int n = static_cast<int>(prices.size());
  const int kmax = std::min(n - 1, largest_size(prices, c));

  SubsetEvaluator evaluate(prices, n_new, options);
  Incumbent incumbent(prices, options.record_trace, false);
  if (largest_size(prices, c) == n) {
    const auto idx = all_indices(prices);
    incumbent.consider(0, idx, evaluate(idx));
  }
  if (c.rho > kmax) {
    auto result = std::move(incumbent).finish(Method::monte_carlo, 0);
    result.seed = seed;
    result.empty_draw_range = true;
    return result;
  }

  const std::size_t minimum = prices.min_index();
  Indices others;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (i != minimum) others.push_back(i);
  }

  std::int64_t iteration = 0;
  Indices pool;
  auto next = [&](Indices& out) -> bool {
    if (iteration >= budget) return false;
    ++iteration;
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(iteration)));
    const auto k = static_cast<std::size_t>(rng.between(c.rho, kmax));
    pool = others;
    // Partial Fisher-Yates: the first k-1 slots become a uniform draw without replacement.
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const auto pick = j + static_cast<std::size_t>(rng.below(pool.size() - j));
      std::swap(pool[j], pool[pick]);
    }
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k - 1));
    out.push_back(minimum);
    return true;
  };

  const auto evaluated = run_candidates(next, evaluate, incumbent, 1, options.workers);
  auto result = std::move(incumbent).finish(Method::monte_carlo, evaluated);
  result.seed = seed;
  return result;
}

DisclosureResult interval_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                   const SearchOptions& options) {
  validate(prices, c, n_new);
  const int n = static_cast<int>(prices.size());
  const int kmax = largest_size(prices, c);
  const auto order = ascending_order(prices);

  // Full set first, then for each size k < n every run of k-1 consecutive prices
  // starting at sorted position 1..n-k+1, joined with the minimum.
  bool full_pending = kmax == n;
  int k = c.rho;
  int start = 1;
  auto next = [&](Indices& out) -> bool {
    if (full_pending) {
      full_pending = false;
      out = order;
      return true;
    }
    while (k <= std::min(kmax, n - 1)) {
      if (start <= n - k + 1) {
        out.assign(1, order.front());
        out.insert(out.end(), order.begin() + start, order.begin() + start + (k - 1));
        ++start;
        return true;
      }
      ++k;
      start = 1;
    }
    return false;
  };

  SubsetEvaluator evaluate(prices, n_new, options);
  Incumbent incumbent(prices, options.record_trace, false);
  const auto evaluated = run_candidates(next, evaluate, incumbent, 1, options.workers);
  return std::move(incumbent).finish(Method::interval, evaluated);
}

DisclosureResult minimal_disclose(const PriceList& prices, const DisclosureConstraints& c, int n_new,
                                  const SearchOptions& options) {
  validate(prices, c, n_new);
  const int n = static_cast<int>(prices.size());
  const int kmax = largest_size(prices, c);
  const auto order = ascending_order(prices);

  bool full_pending = kmax == n;
  int k = c.rho;
  auto next = [&](Indices& out) -> bool {
    if (full_pending) {
      full_pending = false;
      out = order;
      return true;
    }
    if (k > std::min(kmax, n - 1)) return false;
    out.assign(order.begin(), order.begin() + k);
    ++k;
    return true;
  };

  SubsetEvaluator evaluate(prices, n_new, options);
  Incumbent incumbent(prices, options.record_trace, false);
  const auto evaluated = run_candidates(next, evaluate, incumbent, 1, options.workers);
  return std::move(incumbent).finish(Method::minimal, evaluated);
}

DisclosureResult disclose(Method method, const PriceList& prices, const DisclosureConstraints& c, int n_new,
                          std::int64_t budget, std::uint64_t seed, const SearchOptions& options) {
  switch (method) {
    case Method::brute_force: return brute_force_disclose(prices, c, n_new, options);
    case Method::monte_carlo: return monte_carlo_disclose(prices, c, n_new, budget, seed, options);
    case Method::interval: return interval_disclose(prices, c, n_new, options);
    case Method::minimal: return minimal_disclose(prices, c, n_new, options);
    case Method::full: return full_disclose(prices, n_new, options);
  }
  throw ValidationError("unknown method");
}

}  // namespace spd
