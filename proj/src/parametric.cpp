#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "parametric_eval.hpp"
#include "spd/errors.hpp"

namespace spd {

namespace detail {

bool raw_support_starts_at_zero(Family family) {
  switch (family) {
    case Family::lognormal:
    case Family::exponential:
    case Family::gamma:
    case Family::weibull: return true;
    default: return false;
  }
}

double raw_pdf(Family family, const std::array<double, 2>& p, double x) {
  if (raw_support_starts_at_zero(family) && x <= 0.0) return 0.0;
  const double v = with_distribution(family, p, [x](const auto& d) { return boost::math::pdf(d, x); });
  return std::isfinite(v) ? v : 0.0;
}

double raw_cdf(Family family, const std::array<double, 2>& p, double x) {
  if (raw_support_starts_at_zero(family) && x <= 0.0) return 0.0;
  const double v = with_distribution(family, p, [x](const auto& d) { return boost::math::cdf(d, x); });
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTolerance = 1e-9;

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // maximum-likelihood (divides by n)
  double min = 0.0;
  double max = 0.0;
};

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= m.n;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  m.min = *lo;
  m.max = *hi;
  return m;
}

// Root of a function increasing on [lo, hi] (the bracket is widened geometrically if needed).
template <typename Fn>
std::optional<double> bisect_increasing(Fn&& g, double lo, double hi) {
  for (int i = 0; i < 60 && g(lo) > 0.0; ++i) lo *= 0.5;
  for (int i = 0; i < 60 && g(hi) < 0.0; ++i) hi *= 2.0;
  if (g(lo) > 0.0 || g(hi) < 0.0) return std::nullopt;
  for (int i = 0; i < kMaxIterations && (hi - lo) > kTolerance * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<std::array<double, 2>> mle_gamma(std::span<const double> x, const Moments& m) {
  double mean_log = 0.0;
  for (double v : x) mean_log += std::log(v);
  mean_log /= m.n;
  const double s = std::log(m.mean) - mean_log;
  if (!(s > 0.0)) return std::nullopt;
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int i = 0; i < kMaxIterations; ++i) {
    const double g = std::log(k) - boost::math::digamma(k) - s;
    const double dg = 1.0 / k - boost::math::trigamma(k);
    double next = k - g / dg;
    if (!(next > 0.0)) next = 0.5 * k;
    const bool done = std::abs(next - k) <= kTolerance * k;
    k = next;
    if (done) break;
  }
  return std::array<double, 2>{k, m.mean / k};
}

std::optional<std::array<double, 2>> mle_weibull(std::span<const double> x, const Moments& m) {
  // Scaling by the maximum keeps x^k finite for large shapes.
  double mean_log = 0.0;
  for (double v : x) mean_log += std::log(v / m.max);
  mean_log /= m.n;
  auto score = [&](double k) {
    double sum_pow = 0.0;
    double sum_pow_log = 0.0;
    for (double v : x) {
      const double r = v / m.max;
      const double p = std::pow(r, k);
      sum_pow += p;
      sum_pow_log += p * std::log(r);
    }
    return sum_pow_log / sum_pow - 1.0 / k - mean_log;
  };
  const auto k = bisect_increasing(score, 0.05, 50.0);
  if (!k) return std::nullopt;
  double sum_pow = 0.0;
  for (double v : x) sum_pow += std::pow(v / m.max, *k);
  const double scale = m.max * std::pow(sum_pow / m.n, 1.0 / *k);
  return std::array<double, 2>{*k, scale};
}

std::optional<std::array<double, 2>> mle_logistic(std::span<const double> x, const Moments& m) {
  // Location given scale: sum tanh((x - mu) / 2s) = 0 is decreasing in mu.
  auto location = [&](double s) {
    double lo = m.min;
    double hi = m.max;
    for (int i = 0; i < kMaxIterations && (hi - lo) > kTolerance * std::max(1.0, std::abs(hi)); ++i) {
      const double mid = 0.5 * (lo + hi);
      double sum = 0.0;
      for (double v : x) sum += std::tanh((v - mid) / (2.0 * s));
      (sum > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  // Profile score in the scale: sum z tanh(z/2) - n, decreasing in s; negate for the bisection.
  auto score = [&](double s) {
    const double mu = location(s);
    double sum = 0.0;
    for (double v : x) {
      const double z = (v - mu) / s;
      sum += z * std::tanh(0.5 * z);
    }
    return m.n - sum;
  };
  const double sd = std::sqrt(m.variance);
  const auto s = bisect_increasing(score, 0.05 * sd, 2.0 * sd);
  if (!s) return std::nullopt;
  return std::array<double, 2>{location(*s), *s};
}

std::optional<std::array<double, 2>> mle_gumbel(std::span<const double> x, const Moments& m) {
  // Maximum-type Gumbel: beta = mean - sum x w / sum w with w = exp(-x / beta).
  auto weighted_mean = [&](double beta) {
    double sw = 0.0;
    double swx = 0.0;
    for (double v : x) {
      const double w = std::exp(-(v - m.mean) / beta);
      sw += w;
      swx += w * (v - m.mean);
    }
    return swx / sw;
  };
  auto score = [&](double beta) { return beta + weighted_mean(beta); };
  const double sd = std::sqrt(m.variance);
  const auto beta = bisect_increasing(score, 0.05 * sd, 2.0 * sd);
  if (!beta) return std::nullopt;
  double sw = 0.0;
  for (double v : x) sw += std::exp(-(v - m.mean) / *beta);
  const double mu = m.mean - *beta * std::log(sw / m.n);
  return std::array<double, 2>{mu, *beta};
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::normal: return "normal";
    case Family::lognormal: return "lognormal";
    case Family::exponential: return "exponential";
    case Family::gamma: return "gamma";
    case Family::weibull: return "weibull";
    case Family::logistic: return "logistic";
    case Family::gumbel: return "gumbel";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

int parameter_count(Family family) { return family == Family::exponential ? 1 : 2; }

std::array<std::string_view, 2> parameter_names(Family family) {
  switch (family) {
    case Family::normal: return {"mean", "sd"};
    case Family::lognormal: return {"log_mean", "log_sd"};
    case Family::exponential: return {"rate", ""};
    case Family::gamma: return {"shape", "scale"};
    case Family::weibull: return {"shape", "scale"};
    case Family::logistic: return {"location", "scale"};
    case Family::gumbel: return {"location", "scale"};
  }
  return {"", ""};
}

std::optional<FamilyFit> fit_family(std::span<const double> x, Family family, std::string* reason) {
  auto skip = [&](std::string why) -> std::optional<FamilyFit> {
    if (reason) *reason = std::move(why);
    return std::nullopt;
  };
  if (x.size() < 2) return skip("needs at least two observations");
  const Moments m = moments(x);
  const bool positive_only = detail::raw_support_starts_at_zero(family) && family != Family::exponential;
  if (positive_only && m.min <= 0.0) return skip("support excludes a non-positive observation");
  if (family == Family::exponential && m.min < 0.0) return skip("support excludes a negative observation");
  if (family != Family::exponential && !(m.variance > 0.0)) return skip("zero variance");
  if (family == Family::exponential && !(m.mean > 0.0)) return skip("zero mean");

  std::optional<std::array<double, 2>> params;
  switch (family) {
    case Family::normal: params = std::array<double, 2>{m.mean, std::sqrt(m.variance)}; break;
    case Family::lognormal: {
      double mu = 0.0;
      for (double v : x) mu += std::log(v);
      mu /= m.n;
      double var = 0.0;
      for (double v : x) var += (std::log(v) - mu) * (std::log(v) - mu);
      var /= m.n;
      if (!(var > 0.0)) return skip("zero variance of log prices");
      params = std::array<double, 2>{mu, std::sqrt(var)};
      break;
    }
    case Family::exponential: params = std::array<double, 2>{1.0 / m.mean, 0.0}; break;
    case Family::gamma: params = mle_gamma(x, m); break;
    case Family::weibull: params = mle_weibull(x, m); break;
    case Family::logistic: params = mle_logistic(x, m); break;
    case Family::gumbel: params = mle_gumbel(x, m); break;
  }
  if (!params) return skip("maximum-likelihood iteration did not converge");

  double ll = 0.0;
  for (double v : x) {
    const double logp = detail::with_distribution(
        family, *params, [v](const auto& d) { return std::log(boost::math::pdf(d, v)); });
    ll += logp;
  }
  if (!std::isfinite(ll)) return skip("non-finite log-likelihood");

  FamilyFit fit;
  fit.family = family;
  fit.parameters = *params;
  fit.log_likelihood = ll;
  fit.bic = parameter_count(family) * std::log(m.n) - 2.0 * ll;
  return fit;
}

FitReport fit_parametric(std::span<const double> samples, std::span<const Family> families) {
  if (families.empty()) throw FitError("no distribution families requested");
  if (samples.size() < 2) throw FitError("parametric fitting needs at least two prices");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::span<const double> x(sorted);

  std::vector<FamilyFit> fits;
  std::vector<SkippedFamily> skipped;
  std::vector<Family> order(families.begin(), families.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (auto family : order) {
    std::string reason;
    if (auto fit = fit_family(x, family, &reason)) {
      fits.push_back(*fit);
    } else {
      skipped.push_back({family, reason});
    }
  }
  if (fits.empty()) {
    std::string why = "no family could be fitted:";
    for (const auto& s : skipped) why += " " + std::string(to_string(s.family)) + " (" + s.reason + ")";
    throw FitError(why);
  }
  std::stable_sort(fits.begin(), fits.end(),
                   [](const FamilyFit& a, const FamilyFit& b) { return a.bic < b.bic; });
  const auto& best = fits.front();
  return FitReport{Density::parametric(best.family, best.parameters, x.size()), std::move(fits),
                   std::move(skipped)};
}

FitReport fit_parametric(const PriceList& prices, std::span<const Family> families) {
  const auto values = prices.dollars();
  return fit_parametric(std::span<const double>(values), families);
}

}  // namespace spd
