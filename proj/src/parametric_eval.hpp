#pragma once

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/extreme_value.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/logistic.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/weibull.hpp>

#include "spd/distribution.hpp"

namespace spd::detail {

using QuietPolicy = boost::math::policies::policy<
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>,
    boost::math::policies::pole_error<boost::math::policies::ignore_error>>;

// Calls fn with the boost distribution object for (family, parameters).
template <typename Fn>
auto with_distribution(Family family, const std::array<double, 2>& p, Fn&& fn) {
  namespace bm = boost::math;
  switch (family) {
    case Family::normal: return fn(bm::normal_distribution<double, QuietPolicy>(p[0], p[1]));
    case Family::lognormal: return fn(bm::lognormal_distribution<double, QuietPolicy>(p[0], p[1]));
    case Family::exponential: return fn(bm::exponential_distribution<double, QuietPolicy>(p[0]));
    case Family::gamma: return fn(bm::gamma_distribution<double, QuietPolicy>(p[0], p[1]));
    case Family::weibull: return fn(bm::weibull_distribution<double, QuietPolicy>(p[0], p[1]));
    case Family::logistic: return fn(bm::logistic_distribution<double, QuietPolicy>(p[0], p[1]));
    case Family::gumbel: return fn(bm::extreme_value_distribution<double, QuietPolicy>(p[0], p[1]));
  }
  return fn(bm::normal_distribution<double, QuietPolicy>(p[0], p[1]));
}

// Untruncated density and cdf of the family; both are zero below the family's support.
double raw_pdf(Family family, const std::array<double, 2>& p, double x);
double raw_cdf(Family family, const std::array<double, 2>& p, double x);
bool raw_support_starts_at_zero(Family family);

}  // namespace spd::detail
