#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kdesplit/level_family.hpp"

namespace kdesplit {

struct SplitterParams {
  double tau = 0.0;
  double eps = 0.0;
  double rho0 = 0.0;
  // Termination guard; defaults to max_level() + 5 eps.
  std::optional<double> rho_cap;
};

struct TraceEntry {
  double rho;
  std::size_t m;
  bool operator==(const TraceEntry&) const = default;
};

// Split: rho_out = rho0 + k eps (k >= 3) and at least two components.
// No split: rho_out = rho0 and base_set is the full active set at rho0.
struct ClusterOutput {
  bool split = false;
  double rho_out = 0.0;
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> base_set;
  std::vector<TraceEntry> trace;
};

struct FilteredComponents {
  std::size_t m = 0;
  std::vector<std::vector<std::size_t>> components;
};

class SplitterError : public std::runtime_error {
 public:
  SplitterError(const std::string& what, std::vector<TraceEntry> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

// tau-components of the set at rho that contain a sample active at rho + 2 eps.
FilteredComponents filtered_components(const LevelSetFamily& family, double rho, double eps, double tau);

// Walks the levels rho0, rho0 + eps, ... while exactly one filtered component
// remains, then recounts two steps higher to decide between a split and no split.
ClusterOutput run_generic(const LevelSetFamily& family, const SplitterParams& params);

}  // namespace kdesplit
