#include "spd/search.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spd/errors.hpp"
#include "spd/quadrature.hpp"

namespace spd {

namespace {

constexpr double kTruncation = 1e-14;

void check_count(int n) {
  if (n < 1) throw ValidationError("number of new prices must be at least 1, got " + std::to_string(n));
}

// (1 - F)^m computed through log1p for F close to 0.
double survival_power(double cdf, double m) {
  if (cdf >= 1.0) return m == 0.0 ? 1.0 : 0.0;
  return std::exp(m * std::log1p(-cdf));
}

double min_cdf_from(double cdf, int n) {
  if (cdf >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-cdf));
}

}  // namespace

double min_order_pdf(const Density& density, int n, double y) {
  check_count(n);
  const auto [f, F] = density.pdf_cdf(y);
  return static_cast<double>(n) * f * survival_power(F, static_cast<double>(n - 1));
}

double min_order_cdf(const Density& density, int n, double y) {
  check_count(n);
  return min_cdf_from(density.cdf(y), n);
}

CriticalCostForms critical_cost_forms(const Density& density, double q, int n_new) {
  check_count(n_new);
  const double low = density.support_low();
  if (!(q >= low)) throw ValidationError("q lies below the support of the density");
  CriticalCostForms out;
  out.lower_limit = q;
  const double n = static_cast<double>(n_new);

  // Both integrands are bounded by q * n * F(y); start where that drops below kTruncation.
  const double cut = kTruncation / (std::max(q, 1.0) * n);
  if (q == low || density.cdf(q) <= cut) return out;
  double lo = low;
  double hi = q;
  if (density.cdf(lo) <= cut) {
    for (int i = 0; i < 60 && hi - lo > 1e-9 * std::max(1.0, q); ++i) {
      const double mid = 0.5 * (lo + hi);
      (density.cdf(mid) <= cut ? lo : hi) = mid;
    }
  } else {
    lo = low;
  }
  out.lower_limit = lo;

  const auto primal = adaptive_simpson(
      [&](double y) {
        const auto [f, F] = density.pdf_cdf(y);
        return (q - y) * n * f * survival_power(F, n - 1.0);
      },
      lo, q);
  const auto dual = adaptive_simpson([&](double y) { return min_cdf_from(density.cdf(y), n_new); }, lo, q);

  out.expected_saving = primal.value;
  out.expected_saving_error = primal.error_estimate;
  out.cdf_integral = dual.value;
  out.cdf_integral_error = dual.error_estimate;
  out.converged = primal.converged && dual.converged;
  return out;
}

CriticalCost critical_cost(const Density& density, double q, int n_new) {
  const auto forms = critical_cost_forms(density, q, n_new);
  if (!forms.converged) {
    throw NumericalError("critical cost quadrature did not converge",
                         std::max(forms.expected_saving_error, forms.cdf_integral_error));
  }
  const double value = forms.cdf_integral;
  const double gap = std::abs(forms.expected_saving - forms.cdf_integral);
  if (gap > std::max(1e-6, 1e-4 * std::abs(value))) {
    throw NumericalError("critical cost forms disagree by " + std::to_string(gap), gap);
  }
  CriticalCost cost;
  cost.value = std::clamp(value, 0.0, q);
  cost.q = q;
  cost.n_new = n_new;
  cost.integration_error_estimate = forms.cdf_integral_error;
  return cost;
}

SearcherState::SearcherState(PriceList observed, double query_cost, int expected_new_count)
    : observed_(std::move(observed)), query_cost_(query_cost), expected_new_count_(expected_new_count) {
  if (query_cost < 0.0) throw ValidationError("query cost must be non-negative");
  check_count(expected_new_count);
}

void SearcherState::observe(const PriceList& listing) { observed_ = observed_.pooled_with(listing); }

Decision decide(const SearcherState& state, const CriticalCost& cost) {
  return state.query_cost() >= cost.value ? Decision::terminate : Decision::continue_search;
}

int expected_new_prices(double avg_listings, double overlap_rate) {
  if (!(avg_listings > 0.0)) throw ValidationError("average listing count must be positive");
  if (!(overlap_rate >= 0.0 && overlap_rate < 1.0)) {
    throw ValidationError("overlap rate must lie in [0, 1)");
  }
  const auto n = std::lround(avg_listings * (1.0 - overlap_rate));
  return static_cast<int>(std::max<long>(n, 1));
}

double improvement_upper_bound(int k, int j) {
  if (k < 1 || j < 1) throw ValidationError("position k and follow-up count j must be at least 1");
  return static_cast<double>(j) / (static_cast<double>(k) * static_cast<double>(k + j));
}

BigInt subset_count(int n, int rho) {
  if (n < 1 || rho < 1) throw ValidationError("n and rho must be positive");
  if (rho > n) throw ValidationError("rho exceeds the number of prices");
  // Row n-1 of Pascal's triangle, accumulated from C(n-1, rho-1) upwards.
  BigInt total = 0;
  BigInt c = 1;  // C(n-1, 0)
  for (int i = 0; i <= n - 1; ++i) {
    if (i >= rho - 1) total += c;
    c = c * (n - 1 - i) / (i + 1);
  }
  return total;
}

std::uint64_t interval_subset_count(int n, int rho) {
  if (n < 1 || rho < 1 || rho > n) throw ValidationError("interval count needs 1 <= rho <= n");
  const auto m = static_cast<std::uint64_t>(n - rho + 1);
  return m * (1 + m) / 2;
}

std::uint64_t minimal_subset_count(int n, int rho) {
  if (n < 1 || rho < 1 || rho > n) throw ValidationError("minimal count needs 1 <= rho <= n");
  return static_cast<std::uint64_t>(n - rho + 1);
}

}  // namespace spd
