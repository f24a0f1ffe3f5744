#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kdesplit {

// n points in R^d, stored row-major. All coordinates finite, n >= 1.
class Dataset {
 public:
  Dataset(std::vector<double> coords, std::size_t dim);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const { return coords_; }

  // Per-axis bounding box of the points.
  std::vector<double> lower() const;
  std::vector<double> upper() const;

 private:
  std::vector<double> coords_;
  std::size_t dim_;
  std::size_t n_;
};

// Permutation sorting a one-dimensional dataset by coordinate (ties by index),
// with the coordinates in that order.
struct SortedAxis {
  std::vector<std::size_t> order;
  std::vector<double> coords;
};
SortedAxis sort_axis(const Dataset& data);

// CSV with one point per row and an optional single header row. The dimension
// is inferred from the first data row; ragged rows and non-finite values are
// rejected with ConfigError.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Dataset& data);

}  // namespace kdesplit
