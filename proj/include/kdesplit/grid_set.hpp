#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kdesplit/kernel.hpp"

namespace kdesplit {

// Regular cell-centred lattice over a box: node i sits at lower + (i + 1/2) h
// along each axis, and represents a cube of volume h^d.
class GridSpec {
 public:
  static constexpr std::size_t kMaxNodes = 10'000'000;

  // Spacing is enlarged if the box would need more than max_nodes nodes.
  GridSpec(std::vector<double> lower, std::vector<double> upper, double spacing, std::size_t max_nodes = kMaxNodes);

  std::size_t dim() const { return lower_.size(); }
  double spacing() const { return spacing_; }
  double cell_volume() const;
  std::size_t size() const { return total_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<double>& lower() const { return lower_; }
  std::vector<double> upper() const;

  std::vector<double> center(std::size_t index) const;
  void center(std::size_t index, std::span<double> out) const;
  // Nearest node to a point inside the box (clamped at the faces).
  std::size_t locate(std::span<const double> x) const;
  std::vector<std::size_t> unravel(std::size_t index) const;
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  bool operator==(const GridSpec& o) const;

 private:
  std::vector<double> lower_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  double spacing_;
  std::size_t total_;
};

class GridSet {
 public:
  GridSet(GridSpec spec, std::vector<unsigned char> mask);
  static GridSet empty(const GridSpec& spec);
  static GridSet full(const GridSpec& spec);
  static GridSet from_predicate(const GridSpec& spec, const std::function<bool(std::span<const double>)>& inside);

  const GridSpec& spec() const { return spec_; }
  const std::vector<unsigned char>& mask() const { return mask_; }
  bool at(std::size_t i) const { return mask_[i] != 0; }
  std::size_t count() const;
  bool is_empty() const { return count() == 0; }
  double measure() const { return static_cast<double>(count()) * spec_.cell_volume(); }

  GridSet complement() const;
  GridSet intersect(const GridSet& o) const;
  GridSet unite(const GridSet& o) const;
  GridSet minus(const GridSet& o) const;
  bool subset_of(const GridSet& o) const;

  // Packed bitmap, 8 nodes per byte, least significant bit first, base64.
  std::string mask_base64() const;

 private:
  void require_same_grid(const GridSet& o) const;

  GridSpec spec_;
  std::vector<unsigned char> mask_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

// Distance from every node to the nearest member node (exact on the lattice),
// +infinity if the set is empty.
std::vector<double> distance_transform(const GridSet& set, Norm norm);

// A^{+delta} = {x in X : d(x, A) <= delta} with X the whole grid box.
GridSet dilate(const GridSet& set, double delta, Norm norm);
// A^{-delta} = X \ (X \ A)^{+delta}.
GridSet erode(const GridSet& set, double delta, Norm norm);
// sup over x in A of d(x, A^{-delta}); +infinity if the erosion is empty.
double psi_star(const GridSet& set, double delta, Norm norm);

// Lebesgue measure of the symmetric difference, counted on the grid.
double symdiff_measure(const GridSet& a, const GridSet& b);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Uniform draws over the box [lower, upper].
MonteCarloEstimate symdiff_measure_mc(const std::function<bool(std::span<const double>)>& in_a,
                                      const std::function<bool(std::span<const double>)>& in_b,
                                      const std::vector<double>& lower, const std::vector<double>& upper,
                                      std::size_t samples = 100000, std::uint64_t seed = 12345);

// Face-connected components of the set; labels are -1 outside, ids ordered by
// smallest node index.
struct GridComponents {
  std::vector<long> labels;
  std::size_t count = 0;
  GridSet component(const GridSpec& spec, std::size_t id) const;
};
GridComponents grid_components(const GridSet& set);

}  // namespace kdesplit
