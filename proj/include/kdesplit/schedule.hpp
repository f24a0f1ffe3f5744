#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kdesplit/dataset.hpp"
#include "kdesplit/kernel.hpp"
#include "kdesplit/splitter.hpp"

namespace kdesplit {

// Parameters of one run and where each value came from ("schedule",
// "override", "fixed-tau", ...).
struct ParameterSet {
  double delta = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  double tau = 0.0;
  double rho0 = 0.0;
  double varsigma = 1.0;
  double c_u = 1.0;
  std::map<std::string, std::string> provenance;
};

// sigma = delta for bounded kernels, delta |log delta|^2 otherwise
// (requires delta <= 1/e in that case).
double sigma_schedule(double delta, const Kernel& kernel);

struct EpsilonTerms {
  double stochastic = 0.0;  // C_u sqrt(|log delta| (varsigma + log|grid|) loglog n / (delta^d n))
  double tail = 0.0;        // max{1, 2 d^2 V_d} c delta^{|log delta| - d}, zero for bounded kernels
  double total() const { return stochastic + tail; }
};
EpsilonTerms epsilon_terms(double delta, double n, double varsigma, double grid_size, double c_u, const Kernel& kernel);
double epsilon_schedule(double delta, double n, double varsigma, double grid_size, double c_u, const Kernel& kernel);

// psi(delta) = 3 c_thick delta^gamma.
double thickness_envelope(double delta, double gamma, double c_thick);
// 3 c_thick (2 sigma)^gamma (1 + margin): strictly above psi(2 sigma).
double tau_fixed(double sigma, double gamma, double c_thick, double margin = 0.1);
// sigma^gamma logloglog n; throws below kTauAdaptiveMinN.
inline constexpr double kTauAdaptiveMinN = 3814280.0;
double tau_adaptive(double sigma, double gamma, double n);

struct BandwidthGrid {
  std::vector<double> deltas;
  double n = 0.0;
  double lower = 0.0;  // endpoints of I_n before clipping
  double upper = 0.0;
  double spacing = 0.0;
};
// n^{-1/d}-net of I_n intersected with (0, 1/e].
BandwidthGrid bandwidth_grid(double n, int dim);
void bandwidth_interval(double n, int dim, double& lower, double& upper);

// Conditions of the consistency guarantees that can be checked from the
// parameters alone; one message per violated condition. delta_thick <= 0 skips
// the thickness-range check.
std::vector<std::string> parameter_warnings(const ParameterSet& p, double gamma, double c_thick,
                                            double delta_thick = 0.0);

enum class TauMode { fixed, adaptive };

struct AdaptiveOptions {
  double varsigma = 0.0;  // <= 0 means log n
  double c_u = 1.0;
  double gamma = 1.0;
  double c_thick = 1.0;
  TauMode tau_mode = TauMode::fixed;
  // fixed mode: tau = multiplier * psi(2 sigma) * (1 + margin)
  double tau_multiplier = 2.0;
  double tau_margin = 0.0;
  ConnectivityOptions connectivity;
};

struct DeltaRun {
  ParameterSet params;
  std::optional<ClusterOutput> output;
  std::string skipped;  // reason when output is empty
};

struct AdaptiveResult {
  double delta_star = 0.0;
  double rho_star = 0.0;
  std::size_t selected = 0;  // index into per_delta
  std::vector<DeltaRun> per_delta;
  const ClusterOutput& selected_output() const { return *per_delta[selected].output; }
};

// Parameters for one bandwidth of the adaptive search.
ParameterSet adaptive_parameters(double delta, double n, std::size_t grid_size, const Kernel& kernel,
                                 const AdaptiveOptions& options);

// Runs the splitter for every delta of the grid and keeps the smallest
// returned level; ties go to the smaller delta.
AdaptiveResult adaptive_select(const Dataset& data, const Kernel& kernel, const std::vector<double>& grid,
                               const AdaptiveOptions& options);

// Rate schedules with proportionality constants.
struct RateConstants {
  double c_eps = 1.0;
  double c_delta = 1.0;
  double c_sigma = 1.0;
  double c_tau = 1.0;
};
// Finite separation exponent kappa.
ParameterSet rates_schedule_finite(double n, int dim, double gamma, double kappa, const RateConstants& c,
                                   const Kernel& kernel);
// kappa = infinity with a bounded kernel: sigma = delta.
ParameterSet rates_schedule_infinite(double n, int dim, double gamma, const RateConstants& c, const Kernel& kernel);
// Symmetric-difference schedule with varrho = min{alpha, vartheta gamma kappa}.
ParameterSet rates_schedule_symdiff(double n, int dim, double gamma, double kappa, double alpha, double vartheta,
                                    const RateConstants& c, const Kernel& kernel);

}  // namespace kdesplit
