#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdesplit/dataset.hpp"

namespace kdesplit {

// Structural constants of a density with two clusters. kappa and vartheta may
// be +infinity.
struct StructureMetadata {
  double gamma = 1.0;
  double c_thick = 1.0;
  double delta_thick = 0.0;
  double kappa = std::numeric_limits<double>::infinity();
  double c_sep_lower = 0.0;
  double c_sep_upper = 0.0;
  double vartheta = std::numeric_limits<double>::infinity();
  double c_flat = 0.0;
  double alpha = 1.0;
  double c_bound = 0.0;
};

// Analytic density with known cluster structure.
class GroundTruthDensity {
 public:
  virtual ~GroundTruthDensity() = default;

  virtual std::string name() const = 0;
  int dim() const { return static_cast<int>(lower_.size()); }
  // Box X containing the support.
  const std::vector<double>& box_lower() const { return lower_; }
  const std::vector<double>& box_upper() const { return upper_; }
  double box_volume() const;

  virtual double density(std::span<const double> x) const = 0;
  double h_sup() const { return h_sup_; }

  bool bimodal() const { return rho_star_.has_value(); }
  // First split level; throws for unimodal instances.
  double rho_star() const;
  double rho_star_star() const { return rho_star_star_; }

  // 1 or 2 if x lies in that cluster of {h >= rho}, else 0. For bimodal
  // instances and rho in (rho*, rho**]; unimodal instances report 1 for
  // every point of the level set.
  virtual int cluster(std::span<const double> x, double rho) const = 0;

  const StructureMetadata& metadata() const { return meta_; }

  virtual Dataset sample(std::size_t n, std::uint64_t seed) const = 0;

  // One-dimensional instances only.
  virtual double cdf(double x) const;
  // Points where the density or one of its derivatives jumps.
  virtual std::vector<double> breakpoints() const { return {}; }

 protected:
  std::vector<double> lower_, upper_;
  double h_sup_ = 0.0;
  std::optional<double> rho_star_;
  double rho_star_star_ = 0.0;
  StructureMetadata meta_;
};

}  // namespace kdesplit
