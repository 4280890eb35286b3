#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "spd/distribution.hpp"
#include "spd/prices.hpp"

namespace spd {

// Expected saving from one more query when the best known price is q and the next
// query is expected to reveal n_new fresh prices.
struct CriticalCost {
  double value = 0.0;
  double q = 0.0;
  int n_new = 1;
  double integration_error_estimate = 0.0;
};

// Density of the minimum of n i.i.d. draws: n f(y) (1 - F(y))^(n-1).
double min_order_pdf(const Density& density, int n, double y);
// P(min of n draws <= y) = 1 - (1 - F(y))^n.
double min_order_cdf(const Density& density, int n, double y);

// Both quadrature routes to the critical cost, reported separately.
struct CriticalCostForms {
  double expected_saving = 0.0;      // integral of (q - y) f_N(y)
  double expected_saving_error = 0.0;
  double cdf_integral = 0.0;         // integral of F_N(y), the integrated-by-parts form
  double cdf_integral_error = 0.0;
  double lower_limit = 0.0;          // quadrature starts here; the mass below is < 1e-14
  bool converged = true;
};

CriticalCostForms critical_cost_forms(const Density& density, double q, int n_new);

// Evaluates both forms, checks they agree within max(1e-6, 1e-4 * value) and returns
// the F_N form. Throws ValidationError on bad arguments and NumericalError when the
// quadrature fails or the forms disagree.
CriticalCost critical_cost(const Density& density, double q, int n_new);

enum class Decision { terminate, continue_search };

class SearcherState {
 public:
  SearcherState(PriceList observed, double query_cost, int expected_new_count);

  double best_price_q() const { return observed_.min_price().dollars(); }
  const PriceList& observed_prices() const { return observed_; }
  double query_cost() const { return query_cost_; }
  int expected_new_count() const { return expected_new_count_; }

  // Adds the listing returned by another query.
  void observe(const PriceList& listing);

 private:
  PriceList observed_;
  double query_cost_;
  int expected_new_count_;
};

// Terminate iff query_cost >= cost.value.
Decision decide(const SearcherState& state, const CriticalCost& cost);

// round(avg_listings * (1 - overlap_rate)), at least 1.
int expected_new_prices(double avg_listings, double overlap_rate);

// j / (k (k + j)): the largest gain in purchase share a k-th queried agent can get
// when j further agents would otherwise be queried.
double improvement_upper_bound(int k, int j);

using BigInt = boost::multiprecision::cpp_int;

// Number of subsets containing the minimum with size in [rho, n]: sum C(n-1, k-1).
BigInt subset_count(int n, int rho);
// (n - rho + 1)(n - rho + 2) / 2 contiguous-run candidates including the full set.
std::uint64_t interval_subset_count(int n, int rho);
// n - rho + 1 sorted prefixes including the full set.
std::uint64_t minimal_subset_count(int n, int rho);

}  // namespace spd
