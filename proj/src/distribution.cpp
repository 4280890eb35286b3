#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "parametric_eval.hpp"
#include "spd/distribution.hpp"
#include "spd/errors.hpp"

namespace spd {

namespace {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

PdfCdf kernel_pdf_cdf(const KernelModel& k, double y, bool want_pdf) {
  if (y < 0.0) return {};
  const double h = k.bandwidth;
  double pdf = 0.0;
  double cdf = 0.0;
  for (std::size_t i = 0; i < k.centers.size(); ++i) {
    const double z = (y - k.centers[i]) / h;
    if (want_pdf) pdf += std_normal_pdf(z);
    cdf += std_normal_cdf(z) - k.cut_mass[i];
  }
  const double norm = static_cast<double>(k.centers.size()) * k.retained_mass;
  return {pdf / (norm * h), std::clamp(cdf / norm, 0.0, 1.0)};
}

PdfCdf parametric_pdf_cdf(const ParametricModel& m, double y) {
  if (y < 0.0) return {};
  const double keep = 1.0 - m.raw_cdf_at_zero;
  const double pdf = detail::raw_pdf(m.family, m.parameters, y) / keep;
  const double cdf = (detail::raw_cdf(m.family, m.parameters, y) - m.raw_cdf_at_zero) / keep;
  return {pdf, std::clamp(cdf, 0.0, 1.0)};
}

PdfCdf uniform_pdf_cdf(const UniformModel& u, double y) {
  if (y < u.low) return {};
  if (y > u.high) return {0.0, 1.0};
  const double w = u.high - u.low;
  return {1.0 / w, (y - u.low) / w};
}

}  // namespace

Density Density::kernel(std::span<const double> samples, double bandwidth) {
  if (samples.empty()) throw ValidationError("kernel density needs at least one price");
  if (!(bandwidth > 0.0)) throw ValidationError("bandwidth must be positive");
  KernelModel k;
  k.centers.assign(samples.begin(), samples.end());
  std::sort(k.centers.begin(), k.centers.end());
  k.bandwidth = bandwidth;
  double retained = 0.0;
  for (double c : k.centers) {
    k.cut_mass.push_back(std_normal_cdf(-c / bandwidth));
    retained += std_normal_cdf(c / bandwidth);
  }
  k.retained_mass = retained / static_cast<double>(k.centers.size());
  if (!(k.retained_mass > 0.0)) throw ValidationError("kernel mass lies entirely below zero");
  return Density(std::move(k), samples.size());
}

Density Density::parametric(Family family, std::array<double, 2> parameters, std::size_t sample_size) {
  ParametricModel m{family, parameters, detail::raw_cdf(family, parameters, 0.0)};
  if (!(m.raw_cdf_at_zero < 1.0)) throw FitError("fitted distribution has no mass above zero");
  return Density(m, sample_size);
}

Density Density::uniform(double low, double high) {
  if (!(high > low) || low < 0.0) throw ValidationError("uniform density needs 0 <= low < high");
  return Density(UniformModel{low, high}, 1);
}

PdfCdf Density::pdf_cdf(double y) const {
  return std::visit(
      [y](const auto& m) -> PdfCdf {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KernelModel>) return kernel_pdf_cdf(m, y, true);
        else if constexpr (std::is_same_v<T, ParametricModel>) return parametric_pdf_cdf(m, y);
        else return uniform_pdf_cdf(m, y);
      },
      model_);
}

double Density::pdf(double y) const { return pdf_cdf(y).pdf; }

double Density::cdf(double y) const {
  if (const auto* k = kernel_model()) return kernel_pdf_cdf(*k, y, false).cdf;
  return pdf_cdf(y).cdf;
}

double Density::support_low() const {
  if (const auto* u = uniform_model()) return u->low;
  return 0.0;
}

double Density::upper_bracket(double p) const {
  if (const auto* u = uniform_model()) return u->high;
  double hi = 1.0;
  if (const auto* k = kernel_model()) hi = k->centers.back() + 10.0 * k->bandwidth;
  for (int i = 0; i < 2000 && cdf(hi) < p; ++i) hi *= 2.0;
  return hi;
}

double Density::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability outside [0, 1]");
  double lo = support_low();
  if (p == 0.0 || cdf(lo) >= p) return lo;
  double hi = upper_bracket(p);
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) >= p ? hi : lo) = mid;
  }
  return hi;
}

std::string Density::describe() const {
  std::ostringstream out;
  if (const auto* k = kernel_model()) {
    out << "kde(bandwidth=" << k->bandwidth << ", n=" << k->centers.size() << ")";
  } else if (const auto* m = parametric_model()) {
    const auto names = parameter_names(m->family);
    out << to_string(m->family) << "(" << names[0] << "=" << m->parameters[0];
    if (parameter_count(m->family) > 1) out << ", " << names[1] << "=" << m->parameters[1];
    out << ")";
  } else if (const auto* u = uniform_model()) {
    out << "uniform(" << u->low << ", " << u->high << ")";
  }
  return out.str();
}

std::vector<double> equal_mass_prices(const Density& density, int n, double q0) {
  if (n < 2) throw ValidationError("equal-mass generation needs n >= 2");
  const double f0 = density.cdf(q0);
  if (!(f0 < 1.0)) throw GenerationError("no probability mass above q0");
  const bool bounded = density.uniform_model() != nullptr;
  const double top = bounded ? 1.0 : 1.0 - kEqualMassTailTolerance;
  const double step = (1.0 - f0) / static_cast<double>(n - 1);
  if (f0 + step * static_cast<double>(n - 2) >= top) {
    throw GenerationError("equal-mass step is unreachable within the support");
  }

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(q0);
  for (int i = 1; i < n; ++i) {
    const double target = i == n - 1 ? top : f0 + step * static_cast<double>(i);
    const double y = density.quantile(target);
    if (!(y > out.back())) throw GenerationError("generated prices are not strictly increasing");
    out.push_back(y);
  }
  return out;
}

}  // namespace spd
