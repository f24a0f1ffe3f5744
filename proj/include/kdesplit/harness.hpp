#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdesplit/connectivity.hpp"
#include "kdesplit/grid_set.hpp"
#include "kdesplit/ground_truth.hpp"
#include "kdesplit/kernel.hpp"
#include "kdesplit/schedule.hpp"
#include "kdesplit/splitter.hpp"

namespace kdesplit {

enum class Mode { cluster, adaptive, rates, uncertainty, sandwich };
Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);

enum class RateSchedule { finite, infinite, symdiff };

// User-supplied values that replace the schedules. Unset fields fall back to
// the schedule (or to the instance metadata for gamma and c_thick).
struct ScheduleOverrides {
  std::optional<double> delta, sigma, eps, tau, rho0;
  std::optional<double> varsigma, c_u, gamma, c_thick;
  double tau_margin = 0.1;
  EdgeRule edge_rule = EdgeRule::sum;
};

struct ExperimentConfig {
  Mode mode = Mode::cluster;
  std::string instance;
  nlohmann::json instance_params = nlohmann::json::object();
  std::vector<std::size_t> n_list;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  Profile profile = Profile::epanechnikov;
  Norm norm = Norm::euclidean;
  ScheduleOverrides schedule;
  // adaptive: explicit bandwidth grid (default: the n^{-1/d} net);
  // uncertainty: the bandwidths to sweep
  std::vector<double> delta_list;
  // sandwich: levels as fractions of |h|_inf
  std::vector<double> rho_fractions{0.2, 0.4, 0.6, 0.8};
  RateSchedule rate_schedule = RateSchedule::finite;
  RateConstants rate_constants;
  AdaptiveOptions adaptive;
  bool symdiff = true;
  bool timing = false;  // runtime column; breaks byte reproducibility
  std::string output;
};

// Throws ConfigError naming the offending or missing field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Schedule parameters for one clustering run at sample size n.
ParameterSet resolve_parameters(const ScheduleOverrides& o, double n, const Kernel& kernel,
                                const StructureMetadata* meta = nullptr);

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct RunRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double delta = kMissing, sigma = kMissing, eps = kMissing, tau = kMissing, rho0 = kMissing;
  std::optional<bool> split;
  double rho_out = kMissing;
  double rho_error = kMissing;      // rho_out - rho*
  double symdiff_total = kMissing;  // best matching of the two largest clusters
  double sup_distance = kMissing;
  double rho = kMissing;            // sandwich level
  long lower_violations = -1, upper_violations = -1;
  long lower_interior = -1, upper_interior = -1;
  bool selected = false;            // adaptive: chosen bandwidth
  double runtime_ms = kMissing;
  std::string skipped;
};

struct ExperimentReport {
  ExperimentConfig config;
  nlohmann::json config_echo;
  std::vector<RunRecord> records;
  nlohmann::json aggregates = nlohmann::json::object();
  nlohmann::json regression = nlohmann::json::object();

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

ExperimentReport run_cluster(const ExperimentConfig& config);
ExperimentReport run_adaptive(const ExperimentConfig& config);
ExperimentReport run_rates(const ExperimentConfig& config);
ExperimentReport run_uncertainty(const ExperimentConfig& config);
ExperimentReport run_sandwich(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// Seed of the dataset for (n, seed index).
std::uint64_t run_seed(std::uint64_t master, std::size_t n, std::uint64_t seed);

// Sum of grid symmetric differences between the sigma-dilated components and
// the true clusters just above rho*, minimized over the two orderings. Uses
// the two largest components; NaN when fewer than two exist.
double cluster_symdiff(const Dataset& data, const std::vector<std::vector<std::size_t>>& components, double sigma,
                       Norm norm, const GroundTruthDensity& truth);

// {"split", "rho_out", "components", "trace", "params"}; a no-split result
// reports its base set as the single component.
nlohmann::json result_json(const ClusterOutput& out, const ParameterSet& params,
                           const std::vector<std::string>& warnings = {});

// Portable bitmap: grid header plus the base64 mask.
nlohmann::json grid_set_json(const GridSet& set);

}  // namespace kdesplit
