#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spd {

// A currency amount held as an integer number of cents.
class Price {
 public:
  constexpr Price() = default;

  static constexpr Price from_cents(std::int64_t cents) { return Price(cents); }
  // Rounds to the nearest cent.
  static Price from_dollars(double dollars);
  // Parses "297", "297.5" or "297.00". At most two decimals; sign allowed so the
  // caller can report non-positive values as validation failures.
  static std::optional<Price> parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  constexpr double dollars() const { return static_cast<double>(cents_) / 100.0; }
  std::string to_string() const;

  constexpr auto operator<=>(const Price&) const = default;

 private:
  constexpr explicit Price(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

struct PriceEntry {
  std::string source;
  Price price;

  bool operator==(const PriceEntry&) const = default;
};

// The set of seller prices a comparison shopping agent holds for one product.
// Entries keep their input order; duplicates are allowed.
class PriceList {
 public:
  // Throws ValidationError when entries is empty or any price is not positive.
  PriceList(std::string product_id, std::vector<PriceEntry> entries);

  const std::string& product_id() const { return product_id_; }
  std::span<const PriceEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const PriceEntry& operator[](std::size_t i) const { return entries_[i]; }

  // Index of the designated minimum: the lowest-index entry among those with the minimum price.
  std::size_t min_index() const;
  Price min_price() const { return entries_[min_index()].price; }

  std::vector<double> dollars() const;
  std::map<std::string, int> per_source_counts() const;
  double mean_listings_per_source() const;

  PriceList subset(std::span<const std::size_t> indices) const;
  PriceList filter_source(std::string_view source) const;
  // Concatenation keeping duplicates; product id of *this.
  PriceList pooled_with(const PriceList& other) const;

  bool operator==(const PriceList&) const = default;

 private:
  std::string product_id_;
  std::vector<PriceEntry> entries_;
};

// Builds a PriceList from real-valued prices (rounded to cents) under a single source label.
PriceList make_price_list(std::string product_id, std::string source, std::span<const double> dollars);

// CSV with header `product_id,source,price`.
PriceList load_prices(const std::filesystem::path& path);
PriceList parse_prices_csv(std::string_view text);
void write_prices(const std::filesystem::path& path, const PriceList& prices);
std::string format_prices_csv(const PriceList& prices);

enum class Product { printer, mouse, monitor, camera };

std::string_view to_string(Product product);
// Throws NotFoundError for names other than the four bundled products.
Product parse_product(std::string_view name);

struct DatasetManifest {
  std::string product_id;
  std::string description;
  std::string file;
  std::map<std::string, int> per_source_counts;
  std::optional<Price> stated_minimum;
  bool synthetic = true;
};

// Directory of the bundled datasets; DISCLOSE_DATA_DIR overrides the compiled-in default.
std::filesystem::path builtin_data_dir();
DatasetManifest builtin_manifest(Product product);
// Loads the bundled dataset and checks it against its manifest.
PriceList builtin_dataset(Product product);
PriceList builtin_dataset(std::string_view product_name);

}  // namespace spd
