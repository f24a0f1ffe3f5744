#include "kdesplit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "kdesplit/error.hpp"

namespace kdesplit {

Dataset::Dataset(std::vector<double> coords, std::size_t dim) : coords_(std::move(coords)), dim_(dim) {
  if (dim_ == 0) throw ConfigError("dataset dimension must be >= 1");
  if (coords_.empty()) throw ConfigError("dataset must contain at least one point");
  if (coords_.size() % dim_ != 0) throw ConfigError("coordinate count is not a multiple of the dimension");
  for (double v : coords_)
    if (!std::isfinite(v)) throw ConfigError("dataset contains a non-finite coordinate");
  n_ = coords_.size() / dim_;
}

std::vector<double> Dataset::lower() const {
  std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < dim_; ++k) lo[k] = std::min(lo[k], coords_[i * dim_ + k]);
  return lo;
}

std::vector<double> Dataset::upper() const {
  std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < dim_; ++k) hi[k] = std::max(hi[k], coords_[i * dim_ + k]);
  return hi;
}

SortedAxis sort_axis(const Dataset& data) {
  if (data.dim() != 1) throw ConfigError("sort_axis requires one-dimensional data");
  const auto& x = data.coords();
  SortedAxis s;
  s.order.resize(data.size());
  for (std::size_t i = 0; i < s.order.size(); ++i) s.order[i] = i;
  std::sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && a < b);
  });
  s.coords.resize(s.order.size());
  for (std::size_t k = 0; k < s.order.size(); ++k) s.coords[k] = x[s.order[k]];
  return s;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::vector<double> coords;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!seen_data && line_no == 1) continue;  // header
      throw ConfigError("CSV line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (!seen_data) {
      dim = row.size();
      seen_data = true;
    } else if (row.size() != dim) {
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " columns, found " + std::to_string(row.size()));
    }
    for (double v : row)
      if (!std::isfinite(v)) throw ConfigError("CSV line " + std::to_string(line_no) + ": non-finite value");
    coords.insert(coords.end(), row.begin(), row.end());
  }
  if (!seen_data) throw ConfigError("CSV contains no data rows");
  return Dataset(std::move(coords), dim);
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out << ',';
      out << p[k];
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace kdesplit
