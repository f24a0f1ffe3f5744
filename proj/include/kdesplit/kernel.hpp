#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kdesplit {

enum class Norm { euclidean, supremum };

enum class Profile {
  rectangular,
  triangular,
  epanechnikov,
  quartic,
  triweight,
  tricube,
  gaussian,
  laplacian,
};

Norm parse_norm(std::string_view name);
Profile parse_profile(std::string_view name);
std::string_view to_string(Norm norm);
std::string_view to_string(Profile profile);
const std::vector<Profile>& all_profiles();

double norm_of(std::span<const double> x, Norm norm);
double distance(std::span<const double> a, std::span<const double> b, Norm norm);

// Lebesgue volume of the closed unit ball of `norm` in R^d.
double unit_ball_volume(Norm norm, int dim);
// V_d, the volume of the Euclidean unit ball.
inline double euclidean_ball_volume(int dim) { return unit_ball_volume(Norm::euclidean, dim); }

/// Radial symmetric kernel K(x) = c * k(|x|) on R^d.
///
/// The profile k is one of a fixed set of shapes, so the normalizer c and
/// both tail functions are available in closed form for every dimension.
/// Instances are immutable.
class Kernel {
 public:
  // make_kernel: throws ConfigError for dim < 1 and for unbounded profiles
  // combined with the supremum norm in d >= 2.
  static Kernel make(Profile profile, int dim, Norm norm);

  Profile profile() const { return profile_; }
  int dim() const { return dim_; }
  Norm norm() const { return norm_; }
  double normalizer() const { return normalizer_; }
  bool bounded_support() const { return bounded_; }
  // Smallest c with K(x) <= c exp(-|x|_2) for all x.
  double exp_tail_constant() const { return exp_tail_constant_; }

  // Unnormalized profile k(r), r >= 0.
  double shape(double r) const;
  // K at a point of norm r.
  double at_radius(double r) const { return normalizer_ * shape(r); }
  double operator()(std::span<const double> x) const { return at_radius(norm_of(x, norm_)); }
  // K_delta(x) = delta^-d K(x / delta).
  double eval_scaled(double delta, std::span<const double> x) const;
  // |K|_inf = K(0).
  double sup() const { return normalizer_ * shape(0.0); }

  // Mass of K outside the closed ball B(0, r).
  double kappa1(double r) const;
  // Supremum of K outside the closed ball B(0, r).
  double kappa_inf(double r) const;

  // Radius beyond which K is dropped by truncated evaluation paths: 1 for
  // bounded support, else the radius where k falls below 1e-16 * k(0).
  double cutoff_radius() const { return cutoff_; }

  // Fraction of the kernel mass inside B(0, r), in [0, 1].
  double radial_cdf(double r) const;

 private:
  Kernel() = default;

  Profile profile_ = Profile::rectangular;
  int dim_ = 1;
  Norm norm_ = Norm::euclidean;
  bool bounded_ = true;
  double normalizer_ = 0.0;
  double exp_tail_constant_ = 0.0;
  double cutoff_ = 1.0;
  double radial_mass_ = 0.0;            // integral of k(s) s^{d-1} over [0, inf)
  std::vector<double> coefficients_;    // polynomial k on [0, 1] for bounded profiles
};

inline Kernel make_kernel(Profile profile, int dim, Norm norm) { return Kernel::make(profile, dim, norm); }

struct TailBoundEntry {
  double r;
  double kappa1;
  double kappa1_bound;
  double kappa_inf;
  double kappa_inf_bound;
  bool ok;
};

struct TailBoundReport {
  std::vector<TailBoundEntry> entries;
  // min over the grid of (bound - value) / max(bound, tiny); negative means violation
  double min_relative_slack = 0.0;
  bool passed = true;

  // Throws NumericalError naming the first violating radius.
  void require() const;
};

// Checks kappa1(r) <= c d^2 V_d e^{-r} r^{d-1} and kappa_inf(r) <= c e^{-r}
// on every r of the grid, with c = kernel.exp_tail_constant().
TailBoundReport check_exponential_tail_bounds(const Kernel& kernel, std::span<const double> radii);

}  // namespace kdesplit
