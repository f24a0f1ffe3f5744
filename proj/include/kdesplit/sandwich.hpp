#pragma once

#include <cstddef>
#include <vector>

#include "kdesplit/dataset.hpp"
#include "kdesplit/grid_set.hpp"
#include "kdesplit/ground_truth.hpp"
#include "kdesplit/kernel.hpp"

namespace kdesplit {

// Horizontal blur term of the inclusion: the smaller of
// max{rho kappa1(sigma/delta), delta^-d kappa_inf(sigma/delta)} and
// |h|_inf kappa1(sigma/delta). Zero for bounded kernels with sigma >= delta.
double sandwich_blur(const Kernel& kernel, double delta, double sigma, double rho, double h_sup);

// Union of closed sigma-balls around the given samples, stamped on the grid.
GridSet stamp_balls(const Dataset& data, const std::vector<std::size_t>& centers, double sigma, Norm norm,
                    const GridSpec& grid);

// {h >= level} on the grid; the whole box for level <= 0.
GridSet density_level_set(const GroundTruthDensity& truth, double level, const GridSpec& grid);

struct SandwichReport {
  double rho = 0.0;
  double eps = 0.0;
  double blur = 0.0;
  double lower_level = 0.0;  // rho + eps + blur
  double upper_level = 0.0;  // rho - eps - blur
  double spacing = 0.0;
  std::size_t nodes = 0;
  std::size_t active = 0;
  std::size_t lower_violations = 0;  // nodes of the eroded upper level set outside L
  std::size_t upper_violations = 0;  // nodes of L outside the dilated lower level set
  // Same counts after widening both morphology radii by one grid diagonal.
  std::size_t lower_interior_violations = 0;
  std::size_t upper_interior_violations = 0;

  bool interior_ok() const { return lower_interior_violations == 0 && upper_interior_violations == 0; }
};

// Checks M_{rho+eps+blur}^{-2 sigma} within L_rho within M_{rho-eps-blur}^{+2 sigma} node by
// node, with L_rho the sigma-dilation of {x_i : scores[i] >= rho}.
SandwichReport check_sandwich(const Dataset& data, const std::vector<double>& scores,
                              const GroundTruthDensity& truth, const Kernel& kernel, double delta, double sigma,
                              double rho, double eps, const GridSpec& grid);

// Default evaluation grid: spacing min(sigma, delta) / 4 over the support box.
GridSpec sandwich_grid(const GroundTruthDensity& truth, double delta, double sigma);

}  // namespace kdesplit
