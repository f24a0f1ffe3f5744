#include "kdesplit/sandwich.hpp"

#include <algorithm>
#include <cmath>

#include "kdesplit/error.hpp"

namespace kdesplit {

double sandwich_blur(const Kernel& kernel, double delta, double sigma, double rho, double h_sup) {
  const double r = sigma / delta;
  const double k1 = kernel.kappa1(r);
  const double kinf = kernel.kappa_inf(r);
  const double first = std::max(rho * k1, kinf / std::pow(delta, kernel.dim()));
  return std::min(first, h_sup * k1);
}

GridSet stamp_balls(const Dataset& data, const std::vector<std::size_t>& centers, double sigma, Norm norm,
                    const GridSpec& grid) {
  const std::size_t d = grid.dim();
  if (data.dim() != d) throw ConfigError("grid and data dimensions differ");
  std::vector<unsigned char> mask(grid.size(), 0);
  const double h = grid.spacing();
  std::vector<std::size_t> lo(d), hi(d), idx(d);
  std::vector<double> node(d);
  for (std::size_t c : centers) {
    const auto x = data.point(c);
    bool empty = false;
    for (std::size_t k = 0; k < d; ++k) {
      const double a = std::ceil((x[k] - sigma - grid.lower()[k]) / h - 0.5 - 1e-9);
      const double b = std::floor((x[k] + sigma - grid.lower()[k]) / h - 0.5 + 1e-9);
      const double cmax = static_cast<double>(grid.counts()[k] - 1);
      if (b < 0.0 || a > cmax) empty = true;
      lo[k] = static_cast<std::size_t>(std::clamp(a, 0.0, cmax));
      hi[k] = static_cast<std::size_t>(std::clamp(b, 0.0, cmax));
    }
    if (empty) continue;
    idx = lo;
    for (;;) {
      std::size_t lin = 0;
      for (std::size_t k = 0; k < d; ++k) {
        lin += idx[k] * grid.stride(k);
        node[k] = grid.lower()[k] + h * (static_cast<double>(idx[k]) + 0.5);
      }
      if (!mask[lin] && distance(node, x, norm) <= sigma) mask[lin] = 1;
      std::size_t k = 0;
      while (k < d && idx[k] == hi[k]) {
        idx[k] = lo[k];
        ++k;
      }
      if (k == d) break;
      ++idx[k];
    }
  }
  return GridSet(grid, std::move(mask));
}

GridSet density_level_set(const GroundTruthDensity& truth, double level, const GridSpec& grid) {
  if (level <= 0.0) return GridSet::full(grid);
  return GridSet::from_predicate(grid, [&](std::span<const double> x) { return truth.density(x) >= level; });
}

GridSpec sandwich_grid(const GroundTruthDensity& truth, double delta, double sigma) {
  return GridSpec(truth.box_lower(), truth.box_upper(), std::min(sigma, delta) / 4.0);
}

SandwichReport check_sandwich(const Dataset& data, const std::vector<double>& scores,
                              const GroundTruthDensity& truth, const Kernel& kernel, double delta, double sigma,
                              double rho, double eps, const GridSpec& grid) {
  if (scores.size() != data.size()) throw ConfigError("one score per sample is required");
  if (!(sigma > 0.0) || !(delta > 0.0)) throw ConfigError("sigma and delta must be positive");
  const Norm norm = kernel.norm();
  SandwichReport r;
  r.rho = rho;
  r.eps = eps;
  r.blur = sandwich_blur(kernel, delta, sigma, rho, truth.h_sup());
  r.lower_level = rho + eps + r.blur;
  r.upper_level = rho - eps - r.blur;
  r.spacing = grid.spacing();
  r.nodes = grid.size();

  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] >= rho) act.push_back(i);
  r.active = act.size();
  const GridSet estimate = stamp_balls(data, act, sigma, norm, grid);

  const GridSet high = density_level_set(truth, r.lower_level, grid);
  const GridSet low = density_level_set(truth, r.upper_level, grid);
  const double slack = grid.spacing() * std::sqrt(static_cast<double>(grid.dim()));

  r.lower_violations = erode(high, 2.0 * sigma, norm).minus(estimate).count();
  r.upper_violations = estimate.minus(dilate(low, 2.0 * sigma, norm)).count();
  r.lower_interior_violations = erode(high, 2.0 * sigma + slack, norm).minus(estimate).count();
  r.upper_interior_violations = estimate.minus(dilate(low, 2.0 * sigma + slack, norm)).count();
  return r;
}

}  // namespace kdesplit
