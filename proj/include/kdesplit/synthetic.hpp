#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdesplit/grid_set.hpp"
#include "kdesplit/ground_truth.hpp"

namespace kdesplit {

// f(x) = alpha + beta |x - x0|^p on [a, b], with x0 outside (a, b).
struct PowerPiece {
  double a, b;
  double alpha = 0.0;
  double beta = 0.0;
  double x0 = 0.0;
  double p = 0.0;

  double value(double x) const;
  // Integral over [a, min(x, b)].
  double mass_to(double x) const;
  double mass() const { return mass_to(b); }
};

// One-dimensional density made of power pieces, zero elsewhere in [lo, hi].
class PiecewiseDensity1D : public GroundTruthDensity {
 public:
  // Pieces are rescaled to total mass one; `scale` receives the factor.
  PiecewiseDensity1D(std::string name, double lo, double hi, std::vector<PowerPiece> pieces,
                     std::optional<double> split_point, double* scale = nullptr);

  std::string name() const override { return name_; }
  double density(std::span<const double> x) const override;
  int cluster(std::span<const double> x, double rho) const override;
  Dataset sample(std::size_t n, std::uint64_t seed) const override;
  double cdf(double x) const override;
  std::vector<double> breakpoints() const override;
  double inverse_cdf(double u) const;

  void set_structure(std::optional<double> rho_star, double rho_star_star, const StructureMetadata& meta);

 private:
  double at(double x) const;

  std::string name_;
  std::vector<PowerPiece> pieces_;
  std::vector<double> cumulative_;  // mass before each piece
  std::optional<double> split_point_;
};

// Sum of radial bumps (uniform plateau or raised cosine) on a box in R^d.
class RadialMixture : public GroundTruthDensity {
 public:
  enum class Shape { plateau, cosine };
  struct Bump {
    std::vector<double> center;
    double radius;
    double height;  // relative; rescaled to total mass one
    Shape shape;
  };

  RadialMixture(std::string name, std::vector<Bump> bumps, std::vector<double> lower, std::vector<double> upper);

  std::string name() const override { return name_; }
  double density(std::span<const double> x) const override;
  int cluster(std::span<const double> x, double rho) const override;
  Dataset sample(std::size_t n, std::uint64_t seed) const override;
  const std::vector<Bump>& bumps() const { return bumps_; }

  void set_structure(std::optional<double> rho_star, double rho_star_star, const StructureMetadata& meta);

 private:
  std::string name_;
  std::vector<Bump> bumps_;
  double majorant_;
};

// ---- instances ----

// Two uniform plateaus [a1, b1] and [a2, b2] inside X = [lo, hi] with equal height.
std::unique_ptr<PiecewiseDensity1D> make_two_plateaus(double a1 = 0.0, double b1 = 0.2, double a2 = 0.8,
                                                      double b2 = 1.0, double lo = 0.0, double hi = 1.0);
// Symmetric about 1/2 on X = [0, 1]. With t = |x - 1/2|: valley s + (H - s)(t / w)^kappa
// for t <= w, plateau H up to w + p, then linear fall to 0 at t = 1/2. s = valley_fraction * H.
std::unique_ptr<PiecewiseDensity1D> make_bimodal_valley(double valley_fraction = 0.5, double kappa = 1.0,
                                                        double w = 0.15, double p = 0.1);
// Plateaus of length `plateau` at both ends of [0, 1] joined by a bridge at
// bridge_fraction of the plateau height.
std::unique_ptr<PiecewiseDensity1D> make_bridged(double plateau = 0.35, double bridge_fraction = 0.3);
// Uniform on [center - radius, center + radius] inside X = [0, 1].
std::unique_ptr<PiecewiseDensity1D> make_unimodal_interval(double center = 0.5, double radius = 0.25);

// Uniform ball in R^d; box = bounding box of the ball (d = 1 gives an interval on [0, 1]).
std::unique_ptr<GroundTruthDensity> make_unimodal_ball(int dim, double radius = 0.25);
// Raised-cosine bump of the given radius centred in [0, 2r]^d.
std::unique_ptr<RadialMixture> make_unimodal_bump(int dim, double radius = 0.5);
// Two disjoint uniform balls of equal radius with the given centre distance.
std::unique_ptr<RadialMixture> make_two_balls(int dim, double radius = 0.2, double distance = 0.6);
// Two overlapping raised-cosine bumps in the plane, centres `distance` apart.
std::unique_ptr<RadialMixture> make_bimodal_bumps(double radius = 0.5, double distance = 0.6);

// Registry: name plus JSON parameters (missing fields take the defaults above).
std::unique_ptr<GroundTruthDensity> make_instance(const std::string& name, const nlohmann::json& params = {});
std::vector<std::string> instance_names();

// ---- oracles ----

// x^kappa with the kappa = infinity convention (0 below 1, 1 at 1, inf above).
double pow_kappa(double x, double kappa);

// {h >= rho} on the grid (the whole box for rho <= 0).
GridSet level_set_oracle(const GroundTruthDensity& truth, double rho, const GridSpec& grid);
// Nodes assigned to cluster `which` at level rho.
GridSet cluster_set(const GroundTruthDensity& truth, int which, double rho, const GridSpec& grid);

// One third of the grid distance between the two clusters at rho* + eps_prime.
double tau_star(const GroundTruthDensity& truth, double eps_prime, const GridSpec& grid);
// eps + (tau / c_sep_lower)^kappa.
double epsilon_star(const GroundTruthDensity& truth, double eps, double tau);

struct ThicknessPoint {
  double rho, delta, psi, bound;
  bool ok;
};
struct ThicknessReport {
  double gamma_fit = 0.0;
  double c_fit = 0.0;
  std::size_t violations = 0;
  std::vector<ThicknessPoint> points;
};
// psi*_{M_rho}(delta) against c_thick delta^gamma, delta restricted to (0, delta_thick];
// one grid diagonal of tolerance.
ThicknessReport thickness_oracle(const GroundTruthDensity& truth, const std::vector<double>& rho_grid,
                                 const std::vector<double>& delta_grid, const GridSpec& grid);

struct BoundCheck {
  double x, measure, bound;
  bool ok;
};
// mu({0 < h - rho* < s}) <= (c_flat s)^vartheta on an s grid.
std::vector<BoundCheck> flatness_check(const GroundTruthDensity& truth, const std::vector<double>& s_grid,
                                       const GridSpec& grid);
// mu(A^{+delta} \ A^{-delta}) <= c_bound delta^alpha for both clusters at each rho; x = delta.
std::vector<BoundCheck> boundary_check(const GroundTruthDensity& truth, const std::vector<double>& rho_grid,
                                       const std::vector<double>& delta_grid, const GridSpec& grid);

// Number of face-connected grid components of {h >= rho}.
std::size_t level_component_count(const GroundTruthDensity& truth, double rho, const GridSpec& grid);
// Bisection on the level for the change from one to two grid components,
// to `tol` absolute.
double split_level_scan(const GroundTruthDensity& truth, const GridSpec& grid, double tol);

}  // namespace kdesplit
