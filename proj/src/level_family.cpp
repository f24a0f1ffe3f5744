#include "kdesplit/level_family.hpp"

#include <algorithm>
#include <limits>

#include "kdesplit/error.hpp"

namespace kdesplit {

SampleLevelFamily::SampleLevelFamily(const Dataset& data, std::vector<double> scores, double sigma, Norm norm,
                                     ConnectivityOptions options)
    : data_(data), scores_(std::move(scores)), sigma_(sigma), norm_(norm), options_(options) {
  if (scores_.size() != data_.size()) throw ConfigError("one score per sample is required");
  if (!(sigma_ > 0.0)) throw ConfigError("sigma must be positive");
  if (data_.dim() == 1 && !options_.sorted) {
    sorted_ = std::make_shared<const SortedAxis>(sort_axis(data_));
    options_.sorted = sorted_.get();
  }
  max_score_ = -std::numeric_limits<double>::infinity();
  for (double s : scores_) max_score_ = std::max(max_score_, s);
}

SampleLevelFamily SampleLevelFamily::from_kde(const Dataset& data, const Kernel& kernel, double delta, double sigma,
                                              ConnectivityOptions options, KdePath path) {
  std::shared_ptr<const SortedAxis> sorted;
  if (data.dim() == 1 && !options.sorted) {
    sorted = std::make_shared<const SortedAxis>(sort_axis(data));
    options.sorted = sorted.get();
  }
  auto values = kde_at_samples(data, kernel, delta, path, options.sorted);
  SampleLevelFamily family(data, std::move(values), sigma, kernel.norm(), options);
  if (sorted) family.sorted_ = std::move(sorted);
  return family;
}

std::vector<std::size_t> SampleLevelFamily::active(double rho) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scores_.size(); ++i)
    if (scores_[i] >= rho) out.push_back(i);
  return out;
}

ComponentPartition SampleLevelFamily::components(double rho, double tau) const {
  return tau_components(data_, active(rho), sigma_, tau, norm_, options_);
}

LevelSetEstimate SampleLevelFamily::at(double rho) const { return {rho, active(rho), sigma_}; }

bool SampleLevelFamily::contains(double rho, std::span<const double> point) const {
  if (point.size() != data_.dim()) throw ConfigError("point dimension does not match the data");
  for (std::size_t i = 0; i < scores_.size(); ++i)
    if (scores_[i] >= rho && distance(point, data_.point(i), norm_) <= sigma_) return true;
  return false;
}

}  // namespace kdesplit
