#include "kdesplit/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "kdesplit/error.hpp"

namespace kdesplit {

namespace {

struct ProfileInfo {
  Profile profile;
  std::string_view name;
  bool bounded;
};

constexpr std::array<ProfileInfo, 8> kProfiles{{
    {Profile::rectangular, "rectangular", true},
    {Profile::triangular, "triangular", true},
    {Profile::epanechnikov, "epanechnikov", true},
    {Profile::quartic, "quartic", true},
    {Profile::triweight, "triweight", true},
    {Profile::tricube, "tricube", true},
    {Profile::gaussian, "gaussian", false},
    {Profile::laplacian, "laplacian", false},
}};

// Power-series coefficients of the bounded profiles on [0, 1].
std::vector<double> polynomial_coefficients(Profile p) {
  switch (p) {
    case Profile::rectangular: return {1.0};
    case Profile::triangular: return {1.0, -1.0};
    case Profile::epanechnikov: return {1.0, 0.0, -1.0};
    case Profile::quartic: return {1.0, 0.0, -2.0, 0.0, 1.0};
    case Profile::triweight: return {1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};
    case Profile::tricube: return {1.0, 0.0, 0.0, -3.0, 0.0, 0.0, 3.0, 0.0, 0.0, -1.0};
    default: return {};
  }
}

double bounded_profile(Profile p, double r) {
  if (r > 1.0) return 0.0;
  switch (p) {
    case Profile::rectangular: return 1.0;
    case Profile::triangular: return 1.0 - r;
    case Profile::epanechnikov: return 1.0 - r * r;
    case Profile::quartic: {
      const double u = 1.0 - r * r;
      return u * u;
    }
    case Profile::triweight: {
      const double u = 1.0 - r * r;
      return u * u * u;
    }
    case Profile::tricube: {
      const double u = 1.0 - r * r * r;
      return u * u * u;
    }
    default: return 0.0;
  }
}

}  // namespace

Norm parse_norm(std::string_view name) {
  if (name == "euclidean") return Norm::euclidean;
  if (name == "supremum") return Norm::supremum;
  throw ConfigError("unknown norm '" + std::string(name) + "' (expected euclidean or supremum)");
}

Profile parse_profile(std::string_view name) {
  for (const auto& info : kProfiles)
    if (info.name == name) return info.profile;
  throw ConfigError("unknown kernel profile '" + std::string(name) + "'");
}

std::string_view to_string(Norm norm) { return norm == Norm::euclidean ? "euclidean" : "supremum"; }

std::string_view to_string(Profile profile) {
  for (const auto& info : kProfiles)
    if (info.profile == profile) return info.name;
  return "?";
}

const std::vector<Profile>& all_profiles() {
  static const std::vector<Profile> profiles = [] {
    std::vector<Profile> out;
    for (const auto& info : kProfiles) out.push_back(info.profile);
    return out;
  }();
  return profiles;
}

double norm_of(std::span<const double> x, Norm norm) {
  if (norm == Norm::supremum) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (x.size() == 1) return std::abs(x[0]);
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b, Norm norm) {
  const std::size_t d = a.size();
  if (d == 1) return std::abs(a[0] - b[0]);
  if (norm == Norm::supremum) {
    double m = 0.0;
    for (std::size_t k = 0; k < d; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

double unit_ball_volume(Norm norm, int dim) {
  if (dim < 1) throw ConfigError("dimension must be positive");
  if (norm == Norm::supremum) return std::ldexp(1.0, dim);
  // V_d = V_{d-2} 2 pi / d keeps V_1 = 2 exact
  double v = dim % 2 == 1 ? 2.0 : 1.0;
  for (int k = dim % 2 == 1 ? 3 : 2; k <= dim; k += 2) v *= 2.0 * std::numbers::pi / k;
  return v;
}

Kernel Kernel::make(Profile profile, int dim, Norm norm) {
  if (dim < 1) throw ConfigError("kernel dimension must be >= 1");
  Kernel k;
  k.profile_ = profile;
  k.dim_ = dim;
  k.norm_ = dim == 1 ? Norm::euclidean : norm;  // all norms agree on R
  k.bounded_ = profile != Profile::gaussian && profile != Profile::laplacian;
  if (!k.bounded_ && k.norm_ == Norm::supremum)
    throw ConfigError("unbounded profile '" + std::string(to_string(profile)) +
                      "' is only supported with the euclidean norm in d >= 2");

  const double d = dim;
  if (k.bounded_) {
    k.coefficients_ = polynomial_coefficients(profile);
    double mass = 0.0;
    for (std::size_t m = 0; m < k.coefficients_.size(); ++m) mass += k.coefficients_[m] / (m + d);
    k.radial_mass_ = mass;
    k.cutoff_ = 1.0;
  } else if (profile == Profile::gaussian) {
    k.radial_mass_ = 0.5 * std::tgamma(0.5 * d);
    k.cutoff_ = std::sqrt(16.0 * std::log(10.0));
  } else {
    k.radial_mass_ = std::tgamma(d);
    k.cutoff_ = 16.0 * std::log(10.0);
  }
  k.normalizer_ = 1.0 / (d * unit_ball_volume(k.norm_, dim) * k.radial_mass_);

  // |x|_2 <= sqrt(d) |x|_inf, so the sup-norm ball needs the steeper exponent.
  const double slope = k.norm_ == Norm::supremum ? std::sqrt(d) : 1.0;
  if (profile == Profile::gaussian) {
    k.exp_tail_constant_ = k.normalizer_ * std::exp(0.25);
  } else if (profile == Profile::laplacian) {
    k.exp_tail_constant_ = k.normalizer_;
  } else {
    auto g = [&](double r) { return k.shape(r) * std::exp(slope * r); };
    constexpr int kScan = 20000;
    double best_r = 0.0, best = g(0.0);
    for (int i = 1; i <= kScan; ++i) {
      const double r = static_cast<double>(i) / kScan;
      if (const double v = g(r); v > best) {
        best = v;
        best_r = r;
      }
    }
    const double lo = std::max(0.0, best_r - 1.0 / kScan);
    const double hi = std::min(1.0, best_r + 1.0 / kScan);
    const auto refined = boost::math::tools::brent_find_minima([&](double r) { return -g(r); }, lo, hi, 50);
    best = std::max(best, -refined.second);
    k.exp_tail_constant_ = k.normalizer_ * best;
  }
  return k;
}

double Kernel::shape(double r) const {
  switch (profile_) {
    case Profile::gaussian: return std::exp(-r * r);
    case Profile::laplacian: return std::exp(-r);
    default: return bounded_profile(profile_, r);
  }
}

double Kernel::eval_scaled(double delta, std::span<const double> x) const {
  return at_radius(norm_of(x, norm_) / delta) / std::pow(delta, dim_);
}

double Kernel::kappa1(double r) const {
  if (r <= 0.0) return 1.0;
  const double d = dim_;
  if (profile_ == Profile::gaussian) return boost::math::gamma_q(0.5 * d, r * r);
  if (profile_ == Profile::laplacian) return boost::math::gamma_q(d, r);
  if (r >= 1.0) return 0.0;
  // Integrand is a polynomial of degree <= 9 + d - 1; 20-point Gauss-Legendre is exact
  // up to degree 39, and it keeps the tail positive near r = 1.
  auto f = [&](double s) { return shape(s) * std::pow(s, d - 1.0); };
  double tail;
  if (dim_ <= 30) {
    tail = boost::math::quadrature::gauss<double, 20>::integrate(f, r, 1.0);
  } else {
    tail = boost::math::quadrature::gauss<double, 30>::integrate(f, r, 1.0);
  }
  return std::clamp(tail / radial_mass_, 0.0, 1.0);
}

double Kernel::kappa_inf(double r) const {
  if (r < 0.0) r = 0.0;
  if (profile_ == Profile::rectangular) return r < 1.0 ? normalizer_ : 0.0;
  return at_radius(r);
}

double Kernel::radial_cdf(double r) const { return 1.0 - kappa1(r); }

void TailBoundReport::require() const {
  for (const auto& e : entries) {
    if (!e.ok) {
      std::ostringstream msg;
      msg << "exponential tail bound violated at r=" << e.r << ": kappa1=" << e.kappa1 << " (bound "
          << e.kappa1_bound << "), kappa_inf=" << e.kappa_inf << " (bound " << e.kappa_inf_bound << ")";
      throw NumericalError(msg.str(), min_relative_slack);
    }
  }
}

TailBoundReport check_exponential_tail_bounds(const Kernel& kernel, std::span<const double> radii) {
  // Relative tolerance covering the incomplete-gamma and quadrature error.
  constexpr double kTol = 1e-9;
  const double c = kernel.exp_tail_constant();
  const double d = kernel.dim();
  const double vd = euclidean_ball_volume(kernel.dim());

  TailBoundReport report;
  report.min_relative_slack = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    TailBoundEntry e{};
    e.r = r;
    e.kappa1 = kernel.kappa1(r);
    e.kappa_inf = kernel.kappa_inf(r);
    e.kappa1_bound = c * d * d * vd * std::exp(-r) * std::pow(r, d - 1.0);
    e.kappa_inf_bound = c * std::exp(-r);
    auto slack = [](double value, double bound) {
      const double scale = std::max(bound, 1e-300);
      return (bound - value) / scale;
    };
    const double s1 = e.kappa1 == 0.0 ? 1.0 : slack(e.kappa1, e.kappa1_bound);
    const double s2 = e.kappa_inf == 0.0 ? 1.0 : slack(e.kappa_inf, e.kappa_inf_bound);
    e.ok = s1 >= -kTol && s2 >= -kTol;
    report.min_relative_slack = std::min({report.min_relative_slack, s1, s2});
    report.passed = report.passed && e.ok;
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace kdesplit
