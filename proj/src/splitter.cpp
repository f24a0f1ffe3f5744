#include "kdesplit/splitter.hpp"

#include <cmath>
#include <sstream>

#include "kdesplit/error.hpp"

namespace kdesplit {

FilteredComponents filtered_components(const LevelSetFamily& family, double rho, double eps, double tau) {
  FilteredComponents out;
  const double high = rho + 2.0 * eps;
  // Nested family: nothing survives the filter once the higher level is empty.
  if (family.max_level() < high) return out;
  const ComponentPartition parts = family.components(rho, tau);
  for (const auto& comp : parts.members) {
    bool keep = false;
    for (std::size_t i : comp)
      if (family.is_active(i, high)) {
        keep = true;
        break;
      }
    if (keep) out.components.push_back(comp);
  }
  out.m = out.components.size();
  return out;
}

ClusterOutput run_generic(const LevelSetFamily& family, const SplitterParams& params) {
  if (!(params.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(params.eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(params.rho0 >= 0.0)) throw ConfigError("start level rho0 must be nonnegative");
  const double top = std::isfinite(family.max_level()) ? family.max_level() : 0.0;
  const double cap = params.rho_cap.value_or(std::max(top, params.rho0) + 5.0 * params.eps);
  if (!(cap > params.rho0)) throw ConfigError("rho_cap must exceed rho0");

  ClusterOutput out;
  auto level = [&](std::size_t k) { return params.rho0 + static_cast<double>(k) * params.eps; };
  auto guard = [&](double rho) {
    if (rho > cap) {
      std::ostringstream msg;
      msg << "level " << rho << " exceeded rho_cap " << cap << " after " << out.trace.size() << " steps";
      throw SplitterError(msg.str(), out.trace);
    }
  };

  std::size_t k = 0;
  FilteredComponents fc;
  do {
    const double rho = level(k);
    guard(rho);
    fc = filtered_components(family, rho, params.eps, params.tau);
    out.trace.push_back({rho, fc.m});
    ++k;
  } while (fc.m == 1);

  // k already counts the step taken at the end of the loop body
  const double rho = level(k + 2);
  fc = filtered_components(family, rho, params.eps, params.tau);
  out.trace.push_back({rho, fc.m});

  if (fc.m > 1) {
    out.split = true;
    out.rho_out = rho;
    out.components = std::move(fc.components);
  } else {
    out.split = false;
    out.rho_out = params.rho0;
    out.base_set = family.active(params.rho0);
  }
  return out;
}

}  // namespace kdesplit
