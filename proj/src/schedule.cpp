#include "kdesplit/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kdesplit/density.hpp"
#include "kdesplit/error.hpp"
#include "kdesplit/level_family.hpp"

namespace kdesplit {

namespace {

constexpr double kInvE = 0.36787944117144233;  // e^{-1}

void require_n(double n) {
  if (!(n >= 16.0)) throw ConfigError("sample size n must be at least 16 for the schedules (log log n > 0)");
}

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("bandwidth delta must be positive");
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

double sigma_schedule(double delta, const Kernel& kernel) {
  require_delta(delta);
  if (kernel.bounded_support()) return delta;
  if (delta > kInvE)
    throw ConfigError("unbounded kernels need delta <= 1/e for the sigma schedule, got delta = " + number(delta));
  const double l = std::abs(std::log(delta));
  return delta * l * l;
}

EpsilonTerms epsilon_terms(double delta, double n, double varsigma, double grid_size, double c_u,
                           const Kernel& kernel) {
  require_delta(delta);
  require_n(n);
  if (!(varsigma >= 1.0)) throw ConfigError("varsigma must be at least 1");
  if (!(grid_size >= 1.0)) throw ConfigError("bandwidth grid size must be at least 1");
  if (!(c_u > 0.0)) throw ConfigError("C_u must be positive");
  const double d = kernel.dim();
  const double l = std::abs(std::log(delta));
  EpsilonTerms t;
  t.stochastic = c_u * std::sqrt(l * (varsigma + std::log(grid_size)) * std::log(std::log(n)) / (std::pow(delta, d) * n));
  if (!kernel.bounded_support()) {
    const double factor = std::max(1.0, 2.0 * d * d * euclidean_ball_volume(kernel.dim()));
    t.tail = factor * kernel.exp_tail_constant() * std::pow(delta, l - d);
  }
  return t;
}

double epsilon_schedule(double delta, double n, double varsigma, double grid_size, double c_u, const Kernel& kernel) {
  return epsilon_terms(delta, n, varsigma, grid_size, c_u, kernel).total();
}

double thickness_envelope(double delta, double gamma, double c_thick) {
  return 3.0 * c_thick * std::pow(delta, gamma);
}

double tau_fixed(double sigma, double gamma, double c_thick, double margin) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(c_thick > 0.0)) throw ConfigError("c_thick must be positive");
  if (!(margin >= 0.0)) throw ConfigError("tau margin must be nonnegative");
  return thickness_envelope(2.0 * sigma, gamma, c_thick) * (1.0 + margin);
}

double tau_adaptive(double sigma, double gamma, double n) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(n >= kTauAdaptiveMinN))
    throw ConfigError("adaptive tau needs n >= 3814280 (got n = " + number(n) +
                      "); use the fixed tau mode with gamma and c_thick instead");
  return std::pow(sigma, gamma) * std::log(std::log(std::log(n)));
}

std::vector<std::string> parameter_warnings(const ParameterSet& p, double gamma, double c_thick,
                                            double delta_thick) {
  std::vector<std::string> w;
  if (p.sigma < p.delta) w.push_back("sigma " + number(p.sigma) + " is below delta " + number(p.delta));
  if (p.rho0 < p.eps) w.push_back("start level " + number(p.rho0) + " is below eps " + number(p.eps));
  const double psi = thickness_envelope(2.0 * p.sigma, gamma, c_thick);
  if (!(p.tau > psi)) w.push_back("tau " + number(p.tau) + " does not exceed psi(2 sigma) = " + number(psi));
  if (delta_thick > 0.0 && 2.0 * p.sigma > delta_thick)
    w.push_back("2 sigma = " + number(2.0 * p.sigma) + " exceeds delta_thick = " + number(delta_thick));
  return w;
}

void bandwidth_interval(double n, int dim, double& lower, double& upper) {
  require_n(n);
  if (dim < 1) throw ConfigError("dimension must be positive");
  const double ll = std::log(std::log(n));
  lower = std::pow(std::log(n) * ll * ll / n, 1.0 / dim);
  upper = std::pow(1.0 / ll, 1.0 / dim);
}

BandwidthGrid bandwidth_grid(double n, int dim) {
  BandwidthGrid g;
  g.n = n;
  bandwidth_interval(n, dim, g.lower, g.upper);
  const double top = std::min(g.upper, kInvE);
  if (!(g.lower < top)) {
    std::ostringstream msg;
    msg << "bandwidth interval is degenerate for n = " << n << ", d = " << dim << ": [" << g.lower << ", "
        << g.upper << "] (upper clipped to " << top << ")";
    throw ConfigError(msg.str());
  }
  g.spacing = std::pow(n, -1.0 / dim);
  for (std::size_t k = 0;; ++k) {
    const double v = g.lower + static_cast<double>(k) * g.spacing;
    if (v > top) break;
    g.deltas.push_back(v);
  }
  if (static_cast<double>(g.deltas.size()) > n) g.deltas.resize(static_cast<std::size_t>(n));
  return g;
}

ParameterSet adaptive_parameters(double delta, double n, std::size_t grid_size, const Kernel& kernel,
                                 const AdaptiveOptions& options) {
  ParameterSet p;
  p.delta = delta;
  p.varsigma = options.varsigma > 0.0 ? options.varsigma : std::log(n);
  p.c_u = options.c_u;
  p.sigma = sigma_schedule(delta, kernel);
  p.eps = epsilon_schedule(delta, n, p.varsigma, static_cast<double>(grid_size), p.c_u, kernel);
  if (options.tau_mode == TauMode::adaptive) {
    p.tau = tau_adaptive(p.sigma, options.gamma, n);
    p.provenance["tau"] = "sigma^gamma logloglog n";
  } else {
    p.tau = options.tau_multiplier * tau_fixed(p.sigma, options.gamma, options.c_thick, options.tau_margin);
    p.provenance["tau"] = "fixed: " + number(options.tau_multiplier) + " psi(2 sigma) (1 + " +
                          number(options.tau_margin) + ")";
  }
  p.rho0 = p.eps;
  p.provenance["delta"] = "bandwidth grid";
  p.provenance["sigma"] = kernel.bounded_support() ? "delta" : "delta |log delta|^2";
  p.provenance["eps"] = "adaptive epsilon schedule";
  p.provenance["rho0"] = "eps";
  p.provenance["varsigma"] = options.varsigma > 0.0 ? "config" : "log n";
  return p;
}

AdaptiveResult adaptive_select(const Dataset& data, const Kernel& kernel, const std::vector<double>& grid_in,
                               const AdaptiveOptions& options) {
  if (grid_in.empty()) throw ConfigError("bandwidth grid is empty");
  std::vector<double> grid = grid_in;
  std::sort(grid.begin(), grid.end());
  const double n = static_cast<double>(data.size());

  ConnectivityOptions conn = options.connectivity;
  SortedAxis sorted;
  if (data.dim() == 1 && !conn.sorted) {
    sorted = sort_axis(data);
    conn.sorted = &sorted;
  }

  AdaptiveResult result;
  result.per_delta.reserve(grid.size());
  bool any = false;
  for (double delta : grid) {
    DeltaRun run;
    try {
      run.params = adaptive_parameters(delta, n, grid.size(), kernel, options);
      auto scores = kde_at_samples(data, kernel, delta, KdePath::automatic, conn.sorted);
      const SampleLevelFamily family(data, std::move(scores), run.params.sigma, kernel.norm(), conn);
      run.output = run_generic(family, {run.params.tau, run.params.eps, run.params.rho0, std::nullopt});
    } catch (const std::exception& e) {
      run.skipped = e.what();
    }
    if (run.output) {
      const double rho = run.output->rho_out;
      if (!any || rho < result.rho_star) {
        result.rho_star = rho;
        result.delta_star = delta;
        result.selected = result.per_delta.size();
        any = true;
      }
    }
    result.per_delta.push_back(std::move(run));
  }
  if (!any) throw std::runtime_error("adaptive selection failed for every bandwidth: " + result.per_delta.front().skipped);
  return result;
}

namespace {

void clamp_sigma(ParameterSet& p, const Kernel& kernel) {
  const double floor = kernel.bounded_support() ? p.delta : sigma_schedule(p.delta, kernel);
  if (p.sigma < floor) {
    p.sigma = floor;
    p.provenance["sigma"] += " (raised to the sigma schedule floor)";
  }
}

}  // namespace

ParameterSet rates_schedule_finite(double n, int dim, double gamma, double kappa, const RateConstants& c,
                                   const Kernel& kernel) {
  require_n(n);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("finite rate schedule needs 0 < kappa < inf");
  const double ln = std::log(n), lln = std::log(ln), d = dim;
  const double a = 1.0 / (2.0 * gamma * kappa + d);
  ParameterSet p;
  p.eps = c.c_eps * std::pow(ln * ln * ln * lln / n, gamma * kappa * a);
  p.delta = c.c_delta * std::pow(ln / n, a);
  p.sigma = c.c_sigma * std::pow(ln * ln * ln / n, a);
  p.tau = c.c_tau * std::pow(ln * ln * ln * lln / n, gamma * a);
  p.rho0 = p.eps;
  p.provenance = {{"eps", "rate schedule (finite kappa)"}, {"delta", "rate schedule (finite kappa)"},
                  {"sigma", "rate schedule (finite kappa)"}, {"tau", "rate schedule (finite kappa)"},
                  {"rho0", "eps"}};
  clamp_sigma(p, kernel);
  return p;
}

ParameterSet rates_schedule_infinite(double n, int dim, double gamma, const RateConstants& c, const Kernel& kernel) {
  require_n(n);
  if (!kernel.bounded_support()) throw ConfigError("the infinite-kappa rate schedule needs a bounded kernel");
  const double ln = std::log(n), lln = std::log(ln), d = dim;
  ParameterSet p;
  p.eps = c.c_eps * std::sqrt(ln * lln / n);
  p.delta = c.c_delta * std::pow(lln, -1.0 / (2.0 * d));
  p.sigma = p.delta;
  p.tau = c.c_tau * std::pow(lln, -gamma / (3.0 * d));
  p.rho0 = p.eps;
  p.provenance = {{"eps", "rate schedule (infinite kappa)"}, {"delta", "rate schedule (infinite kappa)"},
                  {"sigma", "delta"}, {"tau", "rate schedule (infinite kappa)"}, {"rho0", "eps"}};
  return p;
}

ParameterSet rates_schedule_symdiff(double n, int dim, double gamma, double kappa, double alpha, double vartheta,
                                    const RateConstants& c, const Kernel& kernel) {
  require_n(n);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(vartheta > 0.0) || !std::isfinite(vartheta)) throw ConfigError("vartheta must be positive and finite");
  const double ln = std::log(n), lln = std::log(ln), d = dim;
  const double rr = std::min(alpha, vartheta * gamma * kappa);
  const double b = vartheta / (2.0 * rr + vartheta * d);
  ParameterSet p;
  p.eps = c.c_eps * std::pow(ln / n, rr / (2.0 * rr + vartheta * d)) *
          std::pow(lln, -vartheta * d / (8.0 * rr + 4.0 * vartheta * d));
  p.delta = c.c_delta * std::pow(ln * lln / n, b);
  p.sigma = c.c_sigma * std::pow(ln * ln * ln * lln / n, b);
  p.tau = c.c_tau * std::pow(ln * ln * ln * lln * lln / n, b * gamma);
  p.rho0 = p.eps;
  p.provenance = {{"eps", "rate schedule (symmetric difference)"}, {"delta", "rate schedule (symmetric difference)"},
                  {"sigma", "rate schedule (symmetric difference)"}, {"tau", "rate schedule (symmetric difference)"},
                  {"rho0", "eps"}};
  clamp_sigma(p, kernel);
  return p;
}

}  // namespace kdesplit
