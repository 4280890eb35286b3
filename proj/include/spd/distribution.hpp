#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spd/prices.hpp"

namespace spd {

enum class Family { normal, lognormal, exponential, gamma, weibull, logistic, gumbel };

inline constexpr std::array<Family, 7> kAllFamilies = {
    Family::normal, Family::lognormal, Family::exponential, Family::gamma,
    Family::weibull, Family::logistic, Family::gumbel};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);
int parameter_count(Family family);
// Names of the two parameters in the order stored by ParametricModel::parameters.
std::array<std::string_view, 2> parameter_names(Family family);

// Gaussian-kernel estimate with the mass below zero cut away and renormalized.
struct KernelModel {
  std::vector<double> centers;  // sorted ascending
  std::vector<double> cut_mass;  // P(kernel < 0) per center
  double bandwidth = 0.0;
  double retained_mass = 1.0;  // mean over kernels of P(kernel >= 0)
};

// A fitted family, truncated at zero when its raw support extends below it.
struct ParametricModel {
  Family family = Family::normal;
  std::array<double, 2> parameters{};
  double raw_cdf_at_zero = 0.0;
};

struct UniformModel {
  double low = 0.0;
  double high = 1.0;
};

struct PdfCdf {
  double pdf = 0.0;
  double cdf = 0.0;
};

// An estimated price distribution. Immutable after construction and safe to
// evaluate concurrently.
class Density {
 public:
  static Density kernel(std::span<const double> samples, double bandwidth);
  static Density parametric(Family family, std::array<double, 2> parameters, std::size_t sample_size);
  static Density uniform(double low, double high);

  double pdf(double y) const;
  double cdf(double y) const;
  PdfCdf pdf_cdf(double y) const;
  // Smallest y with cdf(y) >= p, by bisection to 1e-6 in y. Throws ValidationError outside [0, 1].
  double quantile(double p) const;

  double support_low() const;
  std::size_t sample_size() const { return sample_size_; }

  bool is_kernel() const { return std::holds_alternative<KernelModel>(model_); }
  bool is_parametric() const { return std::holds_alternative<ParametricModel>(model_); }
  const KernelModel* kernel_model() const { return std::get_if<KernelModel>(&model_); }
  const ParametricModel* parametric_model() const { return std::get_if<ParametricModel>(&model_); }
  const UniformModel* uniform_model() const { return std::get_if<UniformModel>(&model_); }
  std::string describe() const;

 private:
  using Model = std::variant<KernelModel, ParametricModel, UniformModel>;
  Density(Model model, std::size_t sample_size) : model_(std::move(model)), sample_size_(sample_size) {}

  double upper_bracket(double p) const;

  Model model_;
  std::size_t sample_size_ = 0;
};

// 0.9 * min(sd, IQR/1.34) * n^(-1/5); falls back to max(0.01 * mean, 0.01) for zero spread.
double silverman_bandwidth(std::span<const double> samples);

// Throws ValidationError for a non-positive bandwidth or an empty sample.
Density fit_kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt);
Density fit_kde(const PriceList& prices, std::optional<double> bandwidth = std::nullopt);

struct FamilyFit {
  Family family = Family::normal;
  std::array<double, 2> parameters{};
  double log_likelihood = 0.0;
  double bic = 0.0;
};

struct SkippedFamily {
  Family family = Family::normal;
  std::string reason;
};

struct FitReport {
  Density chosen;
  std::vector<FamilyFit> ranking;  // ascending BIC, ties in family order
  std::vector<SkippedFamily> skipped;

  const FamilyFit& best() const { return ranking.front(); }
};

// Maximum-likelihood fit of each family, chosen by BIC = p ln n - 2 ln L.
// Families that cannot describe the sample are skipped; FitError if all are.
FitReport fit_parametric(std::span<const double> samples, std::span<const Family> families = kAllFamilies);
FitReport fit_parametric(const PriceList& prices, std::span<const Family> families = kAllFamilies);

// Maximum-likelihood estimate for one family; nullopt plus a reason when the sample is unsupported.
std::optional<FamilyFit> fit_family(std::span<const double> samples, Family family, std::string* reason = nullptr);

inline constexpr double kEqualMassTailTolerance = 1e-6;

// q0 followed by n-1 prices splitting the mass above q0 into equal steps. The final
// price sits at cdf 1 - kEqualMassTailTolerance when the support is unbounded.
std::vector<double> equal_mass_prices(const Density& density, int n, double q0);

}  // namespace spd
