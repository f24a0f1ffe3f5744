#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kdesplit/dataset.hpp"
#include "kdesplit/ground_truth.hpp"
#include "kdesplit/kernel.hpp"

namespace kdesplit {

enum class KdePath {
  reference,    // plain O(n) sum per query, in index order
  accelerated,  // neighbour search; same summation order, so bit-identical for bounded kernels
  automatic,
};

// h_{D,delta}(x) = (n delta^d)^{-1} sum_i K((x - x_i) / delta).
double kde_eval(const Dataset& data, const Kernel& kernel, double delta, std::span<const double> query);

// Estimator at every sample. `sorted` may supply a precomputed sort_axis()
// for one-dimensional data.
std::vector<double> kde_at_samples(const Dataset& data, const Kernel& kernel, double delta,
                                   KdePath path = KdePath::automatic, const SortedAxis* sorted = nullptr);

// Estimator at arbitrary row-major query points.
std::vector<double> kde_at_points(const Dataset& data, const Kernel& kernel, double delta,
                                  const std::vector<double>& queries, KdePath path = KdePath::automatic,
                                  const SortedAxis* sorted = nullptr);

// Infinite-sample smoothing h_{P,delta}(x) = delta^{-d} int K((x - y) / delta) dP(y).
// Adaptive Gauss-Kronrod for d <= 2, randomized quasi-Monte-Carlo above.
// Throws NumericalError when the relative tolerance is not reached.
double smoothed_density(const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                        std::span<const double> query, double rel_tol = 1e-4);

// Regular probe grid over a box, spacing equal along every axis.
class ProbeGrid {
 public:
  ProbeGrid(std::vector<double> lower, std::vector<double> upper, double max_spacing);

  std::size_t size() const { return total_; }
  std::size_t dim() const { return lower_.size(); }
  double spacing() const { return spacing_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::vector<double> point(std::size_t index) const;
  // All nodes, row-major coordinates.
  std::vector<double> points() const;

 private:
  std::vector<double> lower_;
  std::vector<std::size_t> counts_;
  double spacing_;
  std::size_t total_;
};

// Probe grid over the support box with spacing <= delta / 4.
ProbeGrid default_probe_grid(const GroundTruthDensity& truth, double delta);

// h_{P,delta} at every probe; reusable across datasets with the same delta.
std::vector<double> smoothed_on_grid(const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                                     const ProbeGrid& grid);

struct SupDistance {
  double value = 0.0;
  std::vector<double> argmax;
  double spacing = 0.0;
  std::size_t probes = 0;
};

// max over the probes of |h_{D,delta} - reference|, with `reference` the
// smoothed density on the same grid.
SupDistance sup_distance(const Dataset& data, const Kernel& kernel, double delta, const ProbeGrid& grid,
                         const std::vector<double>& reference);
SupDistance sup_distance(const Dataset& data, const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                         const ProbeGrid& grid);

}  // namespace kdesplit
