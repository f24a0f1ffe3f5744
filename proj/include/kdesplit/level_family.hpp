#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "kdesplit/connectivity.hpp"
#include "kdesplit/dataset.hpp"
#include "kdesplit/density.hpp"
#include "kdesplit/kernel.hpp"

namespace kdesplit {

// A decreasing family of subsets indexed by a level rho >= 0, each the union
// of closed sigma-balls around the samples active at that level.
class LevelSetFamily {
 public:
  virtual ~LevelSetFamily() = default;

  // Sorted indices of the samples active at rho.
  virtual std::vector<std::size_t> active(double rho) const = 0;
  virtual bool is_active(std::size_t index, double rho) const = 0;
  // tau-connected components of the set at rho.
  virtual ComponentPartition components(double rho, double tau) const = 0;
  // Largest level with a nonempty set.
  virtual double max_level() const = 0;
};

struct LevelSetEstimate {
  double level = 0.0;
  std::vector<std::size_t> active;
  double sigma = 0.0;
};

// Sample i is active at rho iff score[i] >= rho. With the KDE values as
// scores this is L_rho = {x_i : h_{D,delta}(x_i) >= rho}^{+sigma}.
// The dataset must outlive the family.
class SampleLevelFamily : public LevelSetFamily {
 public:
  SampleLevelFamily(const Dataset& data, std::vector<double> scores, double sigma, Norm norm,
                    ConnectivityOptions options = {});

  static SampleLevelFamily from_kde(const Dataset& data, const Kernel& kernel, double delta, double sigma,
                                    ConnectivityOptions options = {}, KdePath path = KdePath::automatic);

  std::vector<std::size_t> active(double rho) const override;
  bool is_active(std::size_t index, double rho) const override { return scores_[index] >= rho; }
  ComponentPartition components(double rho, double tau) const override;
  double max_level() const override { return max_score_; }

  LevelSetEstimate at(double rho) const;
  // True iff some sample active at rho lies within sigma of the point.
  bool contains(double rho, std::span<const double> point) const;

  const Dataset& data() const { return data_; }
  const std::vector<double>& scores() const { return scores_; }
  double sigma() const { return sigma_; }
  Norm norm() const { return norm_; }
  const ConnectivityOptions& options() const { return options_; }

 private:
  const Dataset& data_;
  std::vector<double> scores_;
  double sigma_;
  Norm norm_;
  ConnectivityOptions options_;
  std::shared_ptr<const SortedAxis> sorted_;
  double max_score_;
};

}  // namespace kdesplit
