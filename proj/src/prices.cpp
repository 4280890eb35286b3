#include "spd/prices.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spd/errors.hpp"

namespace spd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

constexpr std::string_view kHeader = "product_id,source,price";

}  // namespace

Price Price::from_dollars(double dollars) {
  return Price(static_cast<std::int64_t>(std::llround(dollars * 100.0)));
}

std::optional<Price> Price::parse(std::string_view text) {
  text = trim(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (!all_digits(whole) || !all_digits(frac) || frac.size() > 2) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;

  std::int64_t units = 0;
  if (!whole.empty()) {
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
    if (ec != std::errc() || ptr != whole.data() + whole.size()) return std::nullopt;
  }
  std::int64_t cents = 0;
  if (!frac.empty()) {
    cents = (frac[0] - '0') * 10 + (frac.size() > 1 ? frac[1] - '0' : 0);
  }
  if (units > (INT64_MAX - cents) / 100) return std::nullopt;
  const std::int64_t total = units * 100 + cents;
  return Price(negative ? -total : total);
}

std::string Price::to_string() const {
  const std::int64_t magnitude = cents_ < 0 ? -cents_ : cents_;
  std::string out = cents_ < 0 ? "-" : "";
  out += std::to_string(magnitude / 100);
  out += '.';
  const auto rem = magnitude % 100;
  out += static_cast<char>('0' + rem / 10);
  out += static_cast<char>('0' + rem % 10);
  return out;
}

PriceList::PriceList(std::string product_id, std::vector<PriceEntry> entries)
    : product_id_(std::move(product_id)), entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("empty dataset");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].price.cents() <= 0) {
      throw ValidationError("entry " + std::to_string(i + 1) + ": non-positive price " +
                            entries_[i].price.to_string());
    }
  }
}

std::size_t PriceList::min_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].price < entries_[best].price) best = i;
  }
  return best;
}

std::vector<double> PriceList::dollars() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.price.dollars());
  return out;
}

std::map<std::string, int> PriceList::per_source_counts() const {
  std::map<std::string, int> counts;
  for (const auto& e : entries_) ++counts[e.source];
  return counts;
}

double PriceList::mean_listings_per_source() const {
  const auto counts = per_source_counts();
  return static_cast<double>(entries_.size()) / static_cast<double>(counts.size());
}

PriceList PriceList::subset(std::span<const std::size_t> indices) const {
  std::vector<PriceEntry> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(entries_.at(i));
  return PriceList(product_id_, std::move(picked));
}

PriceList PriceList::filter_source(std::string_view source) const {
  std::vector<PriceEntry> picked;
  for (const auto& e : entries_) {
    if (e.source == source) picked.push_back(e);
  }
  if (picked.empty()) {
    throw NotFoundError("no entries for source '" + std::string(source) + "' in " + product_id_);
  }
  return PriceList(product_id_, std::move(picked));
}

PriceList PriceList::pooled_with(const PriceList& other) const {
  std::vector<PriceEntry> all = entries_;
  all.insert(all.end(), other.entries_.begin(), other.entries_.end());
  return PriceList(product_id_, std::move(all));
}

PriceList make_price_list(std::string product_id, std::string source, std::span<const double> dollars) {
  std::vector<PriceEntry> entries;
  entries.reserve(dollars.size());
  for (double d : dollars) entries.push_back({source, Price::from_dollars(d)});
  return PriceList(std::move(product_id), std::move(entries));
}

PriceList parse_prices_csv(std::string_view text) {
  std::vector<PriceEntry> entries;
  std::string product_id;
  std::size_t line_no = 0;
  bool seen_header = false;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    if (!seen_header) {
      if (trim(line) != kHeader) {
        throw ParseError("row " + std::to_string(line_no) + ": expected header '" +
                         std::string(kHeader) + "'");
      }
      seen_header = true;
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string row = "row " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw ParseError(row + ": expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(row + ": empty product_id or source");
    }
    const auto price = Price::parse(fields[2]);
    if (!price) {
      throw ParseError(row + ": cannot parse price '" + std::string(fields[2]) + "'");
    }
    if (price->cents() <= 0) {
      throw ValidationError(row + ": non-positive price " + price->to_string());
    }
    if (product_id.empty()) {
      product_id = fields[0];
    } else if (product_id != fields[0]) {
      throw ValidationError(row + ": product_id '" + std::string(fields[0]) +
                            "' differs from '" + product_id + "'");
    }
    entries.push_back({std::string(fields[1]), *price});
  }
  if (entries.empty()) throw ValidationError("empty dataset");
  return PriceList(std::move(product_id), std::move(entries));
}

PriceList load_prices(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prices_csv(buf.str());
}

std::string format_prices_csv(const PriceList& prices) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& e : prices.entries()) {
    out += prices.product_id();
    out += ',';
    out += e.source;
    out += ',';
    out += e.price.to_string();
    out += '\n';
  }
  return out;
}

void write_prices(const std::filesystem::path& path, const PriceList& prices) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_prices_csv(prices);
}

std::string_view to_string(Product product) {
  switch (product) {
    case Product::printer: return "printer";
    case Product::mouse: return "mouse";
    case Product::monitor: return "monitor";
    case Product::camera: return "camera";
  }
  return "unknown";
}

Product parse_product(std::string_view name) {
  for (auto p : {Product::printer, Product::mouse, Product::monitor, Product::camera}) {
    if (to_string(p) == name) return p;
  }
  throw NotFoundError("unknown builtin product '" + std::string(name) +
                      "' (available: printer, mouse, monitor, camera)");
}

std::filesystem::path builtin_data_dir() {
  if (const char* env = std::getenv("DISCLOSE_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return SPD_DATA_DIR;
}

DatasetManifest builtin_manifest(Product product) {
  const auto path = builtin_data_dir() / "manifest.json";
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::string key(to_string(product));
  if (!doc.contains(key)) throw NotFoundError("manifest has no entry for " + key);
  const auto& node = doc.at(key);

  DatasetManifest m;
  m.product_id = node.value("product_id", key);
  m.description = node.value("description", "");
  m.file = node.at("file").get<std::string>();
  m.per_source_counts = node.at("per_source_counts").get<std::map<std::string, int>>();
  if (node.contains("stated_minimum")) {
    m.stated_minimum = Price::parse(node.at("stated_minimum").get<std::string>());
  }
  m.synthetic = node.value("synthetic", true);
  return m;
}

PriceList builtin_dataset(Product product) {
  const auto manifest = builtin_manifest(product);
  auto prices = load_prices(builtin_data_dir() / manifest.file);
  if (prices.per_source_counts() != manifest.per_source_counts) {
    throw ValidationError("dataset " + manifest.file + " does not match its manifest counts");
  }
  if (manifest.stated_minimum && prices.min_price() != *manifest.stated_minimum) {
    throw ValidationError("dataset " + manifest.file + " minimum " + prices.min_price().to_string() +
                          " differs from stated " + manifest.stated_minimum->to_string());
  }
  return prices;
}

PriceList builtin_dataset(std::string_view product_name) {
  return builtin_dataset(parse_product(product_name));
}

}  // namespace spd
