#include "kdesplit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "kdesplit/error.hpp"
#include "kdesplit/rng.hpp"
#include "kdesplit/sandwich.hpp"

namespace kdesplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

// ---- GroundTruthDensity ----

double GroundTruthDensity::box_volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < lower_.size(); ++k) v *= upper_[k] - lower_[k];
  return v;
}

double GroundTruthDensity::rho_star() const {
  if (!rho_star_) throw ConfigError("instance '" + name() + "' is unimodal and has no split level");
  return *rho_star_;
}

double GroundTruthDensity::cdf(double) const {
  throw ConfigError("instance '" + name() + "' has no closed-form distribution function");
}

// ---- PowerPiece ----

double PowerPiece::value(double x) const {
  if (beta == 0.0) return alpha;
  return alpha + beta * std::pow(std::abs(x - x0), p);
}

double PowerPiece::mass_to(double x) const {
  const double xe = std::clamp(x, a, b);
  double m = alpha * (xe - a);
  if (beta != 0.0) {
    const double q = p + 1.0;
    m += beta * std::abs(std::pow(std::abs(xe - x0), q) - std::pow(std::abs(a - x0), q)) / q;
  }
  return m;
}

// ---- PiecewiseDensity1D ----

PiecewiseDensity1D::PiecewiseDensity1D(std::string name, double lo, double hi, std::vector<PowerPiece> pieces,
                                       std::optional<double> split_point, double* scale)
    : name_(std::move(name)), pieces_(std::move(pieces)), split_point_(split_point) {
  if (!(hi > lo)) throw ConfigError("density box must have positive length");
  if (pieces_.empty()) throw ConfigError("density needs at least one piece");
  std::sort(pieces_.begin(), pieces_.end(), [](const PowerPiece& u, const PowerPiece& v) { return u.a < v.a; });
  double total = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& pc = pieces_[i];
    if (!(pc.b > pc.a) || pc.a < lo || pc.b > hi) throw ConfigError("density piece outside the box or empty");
    if (i > 0 && pc.a < pieces_[i - 1].b) throw ConfigError("density pieces overlap");
    if (pc.beta != 0.0 && pc.x0 > pc.a && pc.x0 < pc.b) throw ConfigError("power centre inside a piece");
    if (pc.value(pc.a) < 0.0 || pc.value(pc.b) < 0.0) throw ConfigError("density piece is negative");
    total += pc.mass();
  }
  if (!(total > 0.0)) throw ConfigError("density has zero mass");
  const double f = 1.0 / total;
  double run = 0.0;
  for (auto& pc : pieces_) {
    pc.alpha *= f;
    pc.beta *= f;
    cumulative_.push_back(run);
    run += pc.mass();
    h_sup_ = std::max({h_sup_, pc.value(pc.a), pc.value(pc.b)});
  }
  if (scale) *scale = f;
  lower_ = {lo};
  upper_ = {hi};
}

void PiecewiseDensity1D::set_structure(std::optional<double> rho_star, double rho_star_star,
                                       const StructureMetadata& meta) {
  rho_star_ = rho_star;
  rho_star_star_ = rho_star_star;
  meta_ = meta;
}

double PiecewiseDensity1D::at(double x) const {
  // upper semicontinuous at piece boundaries
  double v = 0.0;
  for (const auto& pc : pieces_) {
    if (pc.a > x) break;
    if (x <= pc.b) v = std::max(v, pc.value(x));
  }
  return v;
}

double PiecewiseDensity1D::density(std::span<const double> x) const { return at(x[0]); }

int PiecewiseDensity1D::cluster(std::span<const double> x, double rho) const {
  if (at(x[0]) < rho) return 0;
  if (!split_point_) return 1;
  return x[0] < *split_point_ ? 1 : 2;
}

double PiecewiseDensity1D::cdf(double x) const {
  double m = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (x <= pieces_[i].a) break;
    m = cumulative_[i] + pieces_[i].mass_to(x);
  }
  return std::min(m, 1.0);
}

std::vector<double> PiecewiseDensity1D::breakpoints() const {
  std::set<double> s;
  for (const auto& pc : pieces_) {
    s.insert(pc.a);
    s.insert(pc.b);
  }
  return {s.begin(), s.end()};
}

double PiecewiseDensity1D::inverse_cdf(double u) const {
  std::size_t k = 0;
  while (k + 1 < pieces_.size() && cumulative_[k + 1] <= u) ++k;
  const PowerPiece& pc = pieces_[k];
  const double target = std::clamp(u - cumulative_[k], 0.0, pc.mass());
  if (pc.beta == 0.0 || pc.p == 0.0) {
    const double c = pc.value(pc.a);
    return std::min(pc.b, pc.a + target / c);
  }
  double lo = pc.a, hi = pc.b;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pc.mass_to(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Dataset PiecewiseDensity1D::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw ConfigError("sample size must be positive");
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = inverse_cdf(uniform01(rng));
  return Dataset(std::move(x), 1);
}

// ---- RadialMixture ----

namespace {

double bump_profile(double u, RadialMixture::Shape shape) {
  if (u > 1.0) return 0.0;
  if (shape == RadialMixture::Shape::plateau) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * u));
}

// integral of profile(|x| / r) over R^d
double bump_mass(double radius, int dim, RadialMixture::Shape shape) {
  const double vol = euclidean_ball_volume(dim) * std::pow(radius, dim);
  if (shape == RadialMixture::Shape::plateau) return vol;
  using boost::math::quadrature::gauss;
  const double radial = gauss<double, 30>::integrate(
      [&](double u) { return bump_profile(u, shape) * std::pow(u, dim - 1); }, 0.0, 1.0);
  return vol * dim * radial;
}

}  // namespace

RadialMixture::RadialMixture(std::string name, std::vector<Bump> bumps, std::vector<double> lower,
                             std::vector<double> upper)
    : name_(std::move(name)), bumps_(std::move(bumps)) {
  if (bumps_.empty()) throw ConfigError("mixture needs at least one bump");
  if (lower.empty() || lower.size() != upper.size()) throw ConfigError("mixture box has mismatched bounds");
  const int d = static_cast<int>(lower.size());
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (!(upper[k] > lower[k])) throw ConfigError("mixture box must have positive extent");
  double total = 0.0;
  for (const auto& b : bumps_) {
    if (static_cast<int>(b.center.size()) != d) throw ConfigError("bump centre has the wrong dimension");
    if (!(b.radius > 0.0) || !(b.height > 0.0)) throw ConfigError("bump radius and height must be positive");
    for (int k = 0; k < d; ++k)
      if (b.center[k] - b.radius < lower[k] - 1e-12 || b.center[k] + b.radius > upper[k] + 1e-12)
        throw ConfigError("bump leaves the box");
    total += b.height * bump_mass(b.radius, d, b.shape);
  }
  majorant_ = 0.0;
  for (auto& b : bumps_) {
    b.height /= total;
    majorant_ += b.height;
  }
  lower_ = std::move(lower);
  upper_ = std::move(upper);

  // A sum of radially decreasing bumps peaks on a segment between centres.
  h_sup_ = 0.0;
  std::vector<double> x(d);
  for (std::size_t i = 0; i < bumps_.size(); ++i)
    for (std::size_t j = i; j < bumps_.size(); ++j)
      for (int s = 0; s <= 2000; ++s) {
        const double t = s / 2000.0;
        for (int k = 0; k < d; ++k) x[k] = (1.0 - t) * bumps_[i].center[k] + t * bumps_[j].center[k];
        h_sup_ = std::max(h_sup_, density(x));
      }
}

void RadialMixture::set_structure(std::optional<double> rho_star, double rho_star_star,
                                  const StructureMetadata& meta) {
  rho_star_ = rho_star;
  rho_star_star_ = rho_star_star;
  meta_ = meta;
}

double RadialMixture::density(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& b : bumps_) v += b.height * bump_profile(distance(x, b.center, Norm::euclidean) / b.radius, b.shape);
  return v;
}

int RadialMixture::cluster(std::span<const double> x, double rho) const {
  if (density(x) < rho) return 0;
  if (bumps_.size() == 1) return 1;
  const double d1 = distance(x, bumps_[0].center, Norm::euclidean);
  const double d2 = distance(x, bumps_[1].center, Norm::euclidean);
  return d1 <= d2 ? 1 : 2;
}

Dataset RadialMixture::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw ConfigError("sample size must be positive");
  const double efficiency = 1.0 / (majorant_ * box_volume());
  if (efficiency < 0.01)
    throw ConfigError("rejection sampler for '" + name_ + "' would accept only " + fmt(100.0 * efficiency) +
                      "% of proposals");
  const std::size_t d = lower_.size();
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n * d);
  std::vector<double> x(d);
  while (out.size() < n * d) {
    for (std::size_t k = 0; k < d; ++k) x[k] = lower_[k] + (upper_[k] - lower_[k]) * uniform01(rng);
    if (uniform01(rng) * majorant_ <= density(x)) out.insert(out.end(), x.begin(), x.end());
  }
  return Dataset(std::move(out), d);
}

// ---- instances ----

std::unique_ptr<PiecewiseDensity1D> make_two_plateaus(double a1, double b1, double a2, double b2, double lo,
                                                      double hi) {
  if (!(lo <= a1 && a1 < b1 && b1 < a2 && a2 < b2 && b2 <= hi))
    throw ConfigError("two_plateaus needs lo <= a1 < b1 < a2 < b2 <= hi");
  std::vector<PowerPiece> pieces{{a1, b1, 1.0}, {a2, b2, 1.0}};
  auto t = std::make_unique<PiecewiseDensity1D>("two_plateaus", lo, hi, std::move(pieces), 0.5 * (b1 + a2));
  const double h = t->h_sup();
  const double gap = a2 - b1;
  StructureMetadata m;
  m.gamma = 1.0;
  m.c_thick = 1.0;
  m.delta_thick = std::min(1.0, 0.5 * std::min(b1 - a1, b2 - a2));
  m.kappa = kInf;
  m.c_sep_lower = m.c_sep_upper = gap / 3.0;
  m.vartheta = kInf;
  m.c_flat = 1.0 / h;
  m.alpha = 1.0;
  m.c_bound = 4.0;
  t->set_structure(0.0, h, m);
  return t;
}

std::unique_ptr<PiecewiseDensity1D> make_bimodal_valley(double valley_fraction, double kappa, double w, double p) {
  if (!(valley_fraction >= 0.0 && valley_fraction < 1.0)) throw ConfigError("valley_fraction must lie in [0, 1)");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("bimodal_valley needs a finite kappa > 0");
  if (!(w > 0.0 && p > 0.0 && w + p < 0.5)) throw ConfigError("bimodal_valley needs w, p > 0 and w + p < 1/2");
  const double s = valley_fraction;
  const double f = 0.5 - w - p;  // length of the outer slopes
  const double vb = (1.0 - s) / std::pow(w, kappa);
  std::vector<PowerPiece> pieces{
      {0.0, f, 0.0, 1.0 / f, 0.0, 1.0},
      {f, f + p, 1.0},
      {0.5 - w, 0.5, s, vb, 0.5, kappa},
      {0.5, 0.5 + w, s, vb, 0.5, kappa},
      {0.5 + w, 0.5 + w + p, 1.0},
      {1.0 - f, 1.0, 0.0, 1.0 / f, 1.0, 1.0},
  };
  double scale = 1.0;
  auto t = std::make_unique<PiecewiseDensity1D>("bimodal_valley", 0.0, 1.0, std::move(pieces), 0.5, &scale);
  const double H = scale, sv = s * H;
  StructureMetadata m;
  m.gamma = 1.0;
  m.c_thick = 1.0;
  m.delta_thick = 0.5 * p;
  m.kappa = kappa;
  m.c_sep_lower = m.c_sep_upper = (2.0 * w / 3.0) * std::pow(H - sv, -1.0 / kappa);
  // mu({0 < h - s < e}) = 2 w (e / (H - s))^{1/kappa} + 2 f e / H for e <= H - s
  if (kappa >= 1.0) {
    m.vartheta = 1.0 / kappa;
    m.c_flat = std::pow(2.0 * w * std::pow(H - sv, -1.0 / kappa) + 2.0 * f * std::pow(H, -1.0 / kappa), kappa);
  } else {
    m.vartheta = 1.0;
    m.c_flat = 2.0 * w / (H - sv) + 2.0 * f / H;
  }
  m.alpha = 1.0;
  m.c_bound = 4.0;
  t->set_structure(sv, H, m);
  return t;
}

std::unique_ptr<PiecewiseDensity1D> make_bridged(double plateau, double bridge_fraction) {
  if (!(plateau > 0.0 && plateau < 0.5)) throw ConfigError("bridged needs 0 < plateau < 1/2");
  if (!(bridge_fraction > 0.0 && bridge_fraction < 1.0)) throw ConfigError("bridge_fraction must lie in (0, 1)");
  std::vector<PowerPiece> pieces{{0.0, plateau, 1.0}, {plateau, 1.0 - plateau, bridge_fraction},
                                 {1.0 - plateau, 1.0, 1.0}};
  double scale = 1.0;
  auto t = std::make_unique<PiecewiseDensity1D>("bridged", 0.0, 1.0, std::move(pieces), 0.5, &scale);
  const double H = scale, bridge = bridge_fraction * H;
  StructureMetadata m;
  m.gamma = 1.0;
  m.c_thick = 1.0;
  m.delta_thick = 0.5 * plateau;
  m.kappa = kInf;
  m.c_sep_lower = m.c_sep_upper = (1.0 - 2.0 * plateau) / 3.0;
  m.vartheta = kInf;
  m.c_flat = 1.0 / (H - bridge);
  m.alpha = 1.0;
  m.c_bound = 4.0;
  t->set_structure(bridge, H, m);
  return t;
}

std::unique_ptr<PiecewiseDensity1D> make_unimodal_interval(double center, double radius) {
  if (!(radius > 0.0 && center - radius >= 0.0 && center + radius <= 1.0))
    throw ConfigError("unimodal_interval must fit inside [0, 1]");
  std::vector<PowerPiece> pieces{{center - radius, center + radius, 1.0}};
  auto t = std::make_unique<PiecewiseDensity1D>("unimodal_interval", 0.0, 1.0, std::move(pieces), std::nullopt);
  StructureMetadata m;
  m.delta_thick = std::min(1.0, radius);
  m.c_bound = 4.0;
  t->set_structure(std::nullopt, t->h_sup(), m);
  return t;
}

std::unique_ptr<GroundTruthDensity> make_unimodal_ball(int dim, double radius) {
  if (dim < 1) throw ConfigError("dimension must be positive");
  if (dim == 1) return make_unimodal_interval(0.5, radius);
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  std::vector<double> c(dim, radius), lo(dim, 0.0), hi(dim, 2.0 * radius);
  auto t = std::make_unique<RadialMixture>(
      "unimodal_ball", std::vector<RadialMixture::Bump>{{c, radius, 1.0, RadialMixture::Shape::plateau}}, lo, hi);
  StructureMetadata m;
  m.delta_thick = std::min(1.0, 0.5 * radius);
  const double v = euclidean_ball_volume(dim);
  m.c_bound = v * (std::pow(radius + m.delta_thick, dim) - std::pow(radius - m.delta_thick, dim)) / m.delta_thick;
  t->set_structure(std::nullopt, t->h_sup(), m);
  return t;
}

std::unique_ptr<RadialMixture> make_unimodal_bump(int dim, double radius) {
  if (dim < 1) throw ConfigError("dimension must be positive");
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  std::vector<double> c(dim, radius), lo(dim, 0.0), hi(dim, 2.0 * radius);
  auto t = std::make_unique<RadialMixture>(
      "unimodal_bump", std::vector<RadialMixture::Bump>{{c, radius, 1.0, RadialMixture::Shape::cosine}}, lo, hi);
  StructureMetadata m;
  // level sets stay balls of radius >= r/2 up to half the peak
  m.delta_thick = std::min(1.0, 0.25 * radius);
  m.c_bound = 2.0 * dim * euclidean_ball_volume(dim) * std::pow(radius, dim - 1) * 1.5;
  t->set_structure(std::nullopt, 0.5 * t->h_sup(), m);
  return t;
}

std::unique_ptr<RadialMixture> make_two_balls(int dim, double radius, double dist) {
  if (dim < 1) throw ConfigError("dimension must be positive");
  if (!(radius > 0.0 && dist > 2.0 * radius)) throw ConfigError("two_balls needs radius > 0 and distance > 2 radius");
  std::vector<double> c1(dim, radius), c2(dim, radius), lo(dim, 0.0), hi(dim, 2.0 * radius);
  c2[0] += dist;
  hi[0] += dist;
  auto t = std::make_unique<RadialMixture>(
      "two_balls",
      std::vector<RadialMixture::Bump>{{c1, radius, 1.0, RadialMixture::Shape::plateau},
                                       {c2, radius, 1.0, RadialMixture::Shape::plateau}},
      lo, hi);
  StructureMetadata m;
  m.gamma = 1.0;
  m.c_thick = 1.0;
  m.delta_thick = std::min(1.0, 0.5 * radius);
  m.kappa = kInf;
  m.c_sep_lower = m.c_sep_upper = (dist - 2.0 * radius) / 3.0;
  m.vartheta = kInf;
  m.c_flat = 1.0 / t->h_sup();
  m.alpha = 1.0;
  // ((r + d)^k - (r - d)^k) / d grows with d
  m.c_bound = euclidean_ball_volume(dim) *
              (std::pow(radius + m.delta_thick, dim) - std::pow(radius - m.delta_thick, dim)) / m.delta_thick;
  t->set_structure(0.0, t->h_sup(), m);
  return t;
}

std::unique_ptr<RadialMixture> make_bimodal_bumps(double radius, double dist) {
  if (!(radius > 0.0 && dist > radius && dist < 2.0 * radius))
    throw ConfigError("bimodal_bumps needs radius < distance < 2 radius");
  const std::vector<double> c1{radius, radius}, c2{radius + dist, radius};
  auto t = std::make_unique<RadialMixture>(
      "bimodal_bumps",
      std::vector<RadialMixture::Bump>{{c1, radius, 1.0, RadialMixture::Shape::cosine},
                                       {c2, radius, 1.0, RadialMixture::Shape::cosine}},
      std::vector<double>{0.0, 0.0}, std::vector<double>{2.0 * radius + dist, 2.0 * radius});
  const double a = t->bumps()[0].height;
  const double half = 0.5 * dist;
  const std::vector<double> mid{radius + half, radius};
  const double rho_star = t->density(mid);
  const double rho_ss = rho_star + 0.5 * (t->h_sup() - rho_star);

  // g(u) = h along the centre line at distance u from the saddle
  auto g = [&](double u) {
    const std::vector<double> x{radius + half - u, radius};
    return t->density(x);
  };
  double lo_sep = kInf, hi_sep = 0.0;
  const double span = rho_ss - rho_star;
  for (int i = 0; i <= 200; ++i) {
    const double e = span * std::pow(10.0, -6.0 + 6.0 * i / 200.0);
    double l = 0.0, r = half;  // g increases on [0, half]
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (l + r);
      if (g(m) < rho_star + e)
        l = m;
      else
        r = m;
    }
    const double sep = (2.0 * r / 3.0) / std::sqrt(e);
    lo_sep = std::min(lo_sep, sep);
    hi_sep = std::max(hi_sep, sep);
  }

  // saddle h ~ rho* + A u^2 - B v^2: the pinch at rho* has half-angle atan(sqrt(A / B))
  const double pi = std::numbers::pi;
  const double A = -0.5 * a * (pi / radius) * (pi / radius) * std::cos(pi * half / radius);
  const double B = a * (pi / (2.0 * radius)) * std::sin(pi * half / radius) / half;

  StructureMetadata m;
  m.gamma = 1.0;
  m.c_thick = 1.25 * std::sqrt(1.0 + B / A);
  // radius of a single bump's level set at rho**, halved
  const double r_ss = radius * std::acos(std::clamp(2.0 * rho_ss / a - 1.0, -1.0, 1.0)) / pi;
  m.delta_thick = std::min(1.0, 0.5 * r_ss);
  m.kappa = 2.0;
  m.c_sep_lower = lo_sep;
  m.c_sep_upper = hi_sep;
  m.vartheta = 0.9;
  m.alpha = 1.0;
  m.c_bound = 6.0 * pi * radius;
  t->set_structure(rho_star, rho_ss, m);

  // flatness constant from a fine grid scan
  const GridSpec grid(t->box_lower(), t->box_upper(), radius / 200.0);
  std::vector<double> gaps;
  gaps.reserve(grid.size());
  std::vector<double> x(2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.center(i, x);
    const double gap = t->density(x) - rho_star;
    if (gap > 0.0) gaps.push_back(gap);
  }
  std::sort(gaps.begin(), gaps.end());
  double cf = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double s = span * std::pow(10.0, -3.0 + 3.0 * i / 100.0);
    const double mu = static_cast<double>(std::lower_bound(gaps.begin(), gaps.end(), s) - gaps.begin()) *
                      grid.cell_volume();
    cf = std::max(cf, std::pow(mu, 1.0 / m.vartheta) / s);
  }
  m.c_flat = 1.2 * cf;
  t->set_structure(rho_star, rho_ss, m);
  return t;
}

// ---- registry ----

namespace {

class Params {
 public:
  Params(const std::string& instance, const nlohmann::json& j) : instance_(instance), j_(j) {
    if (!j_.is_null() && !j_.is_object()) throw ConfigError("instance parameters must be a JSON object");
  }
  double num(const std::string& key, double fallback) {
    used_.insert(key);
    if (j_.is_null() || !j_.contains(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("instance '" + instance_ + "': field '" + key + "' must be a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    if (j_.is_null() || !j_.contains(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError("instance '" + instance_ + "': field '" + key + "' must be an integer");
    return v.get<int>();
  }
  void finish() const {
    if (j_.is_null()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw ConfigError("instance '" + instance_ + "': unknown field '" + it.key() + "'");
  }

 private:
  std::string instance_;
  const nlohmann::json& j_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<std::string> instance_names() {
  return {"two_plateaus", "bimodal_valley", "bridged",   "unimodal_interval",
          "unimodal_ball", "unimodal_bump", "two_balls", "bimodal_bumps"};
}

std::unique_ptr<GroundTruthDensity> make_instance(const std::string& name, const nlohmann::json& params) {
  Params p(name, params);
  std::unique_ptr<GroundTruthDensity> t;
  if (name == "two_plateaus") {
    const double a1 = p.num("a1", 0.0), b1 = p.num("b1", 0.2), a2 = p.num("a2", 0.8), b2 = p.num("b2", 1.0);
    const double lo = p.num("lo", 0.0), hi = p.num("hi", 1.0);
    p.finish();
    t = make_two_plateaus(a1, b1, a2, b2, lo, hi);
  } else if (name == "bimodal_valley") {
    const double vf = p.num("valley_fraction", 0.5), kappa = p.num("kappa", 1.0), w = p.num("w", 0.15),
                 pl = p.num("p", 0.1);
    p.finish();
    t = make_bimodal_valley(vf, kappa, w, pl);
  } else if (name == "bridged") {
    const double pl = p.num("plateau", 0.35), bf = p.num("bridge_fraction", 0.3);
    p.finish();
    t = make_bridged(pl, bf);
  } else if (name == "unimodal_interval") {
    const double c = p.num("center", 0.5), r = p.num("radius", 0.25);
    p.finish();
    t = make_unimodal_interval(c, r);
  } else if (name == "unimodal_ball") {
    const int d = p.integer("dim", 1);
    const double r = p.num("radius", 0.25);
    p.finish();
    t = make_unimodal_ball(d, r);
  } else if (name == "unimodal_bump") {
    const int d = p.integer("dim", 1);
    const double r = p.num("radius", 0.5);
    p.finish();
    t = make_unimodal_bump(d, r);
  } else if (name == "two_balls") {
    const int d = p.integer("dim", 2);
    const double r = p.num("radius", 0.2), dist = p.num("distance", 0.6);
    p.finish();
    t = make_two_balls(d, r, dist);
  } else if (name == "bimodal_bumps") {
    const double r = p.num("radius", 0.5), dist = p.num("distance", 0.6);
    p.finish();
    t = make_bimodal_bumps(r, dist);
  } else {
    std::string known;
    for (const auto& n : instance_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown instance '" + name + "' (known: " + known + ")");
  }
  return t;
}

// ---- oracles ----

double pow_kappa(double x, double kappa) {
  if (std::isinf(kappa)) {
    if (x < 1.0) return 0.0;
    if (x == 1.0) return 1.0;
    return kInf;
  }
  return std::pow(x, kappa);
}

GridSet level_set_oracle(const GroundTruthDensity& truth, double rho, const GridSpec& grid) {
  return density_level_set(truth, rho, grid);
}

GridSet cluster_set(const GroundTruthDensity& truth, int which, double rho, const GridSpec& grid) {
  return GridSet::from_predicate(grid, [&](std::span<const double> x) { return truth.cluster(x, rho) == which; });
}

double tau_star(const GroundTruthDensity& truth, double eps_prime, const GridSpec& grid) {
  const double rho = truth.rho_star() + eps_prime;
  const GridSet a1 = cluster_set(truth, 1, rho, grid);
  const GridSet a2 = cluster_set(truth, 2, rho, grid);
  if (a1.is_empty() || a2.is_empty()) throw ConfigError("a cluster is empty at level " + fmt(rho));
  const auto dt = distance_transform(a1, Norm::euclidean);
  double best = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (a2.at(i)) best = std::min(best, dt[i]);
  return best / 3.0;
}

double epsilon_star(const GroundTruthDensity& truth, double eps, double tau) {
  const double c = truth.metadata().c_sep_lower;
  if (!(c > 0.0)) throw ConfigError("instance has no separation constant");
  return eps + pow_kappa(tau / c, truth.metadata().kappa);
}

ThicknessReport thickness_oracle(const GroundTruthDensity& truth, const std::vector<double>& rho_grid,
                                 const std::vector<double>& delta_grid, const GridSpec& grid) {
  const auto& m = truth.metadata();
  const double tol = grid.spacing() * std::sqrt(static_cast<double>(grid.dim()));
  ThicknessReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (double rho : rho_grid) {
    const GridSet level = level_set_oracle(truth, rho, grid);
    if (level.is_empty()) continue;
    for (double delta : delta_grid) {
      if (delta > m.delta_thick || delta < 2.0 * grid.spacing()) continue;
      ThicknessPoint pt{rho, delta, psi_star(level, delta, Norm::euclidean), 0.0, false};
      pt.bound = m.c_thick * std::pow(delta, m.gamma) + tol;
      pt.ok = pt.psi <= pt.bound;
      if (!pt.ok) ++rep.violations;
      if (std::isfinite(pt.psi) && pt.psi > 0.0) {
        rep.c_fit = std::max(rep.c_fit, pt.psi / std::pow(delta, m.gamma));
        const double lx = std::log(delta), ly = std::log(pt.psi);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
      }
      rep.points.push_back(pt);
    }
  }
  if (k >= 2) {
    const double kk = static_cast<double>(k);
    const double den = kk * sxx - sx * sx;
    if (den > 0.0) rep.gamma_fit = (kk * sxy - sx * sy) / den;
  }
  return rep;
}

namespace {

double discretization_tolerance(const GridSpec& grid, const GroundTruthDensity& truth) {
  double ext = 1.0;
  for (std::size_t k = 1; k < grid.dim(); ++k) ext *= truth.box_upper()[k] - truth.box_lower()[k];
  return 4.0 * grid.spacing() * ext;
}

}  // namespace

std::vector<BoundCheck> flatness_check(const GroundTruthDensity& truth, const std::vector<double>& s_grid,
                                       const GridSpec& grid) {
  const auto& m = truth.metadata();
  const double rs = truth.rho_star();
  std::vector<double> gaps;
  std::vector<double> x(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.center(i, x);
    const double g = truth.density(x) - rs;
    if (g > 0.0) gaps.push_back(g);
  }
  std::sort(gaps.begin(), gaps.end());
  const double tol = discretization_tolerance(grid, truth);
  std::vector<BoundCheck> out;
  for (double s : s_grid) {
    BoundCheck c;
    c.x = s;
    c.measure = static_cast<double>(std::lower_bound(gaps.begin(), gaps.end(), s) - gaps.begin()) * grid.cell_volume();
    c.bound = pow_kappa(m.c_flat * s, m.vartheta);
    c.ok = c.measure <= c.bound + tol;
    out.push_back(c);
  }
  return out;
}

std::vector<BoundCheck> boundary_check(const GroundTruthDensity& truth, const std::vector<double>& rho_grid,
                                       const std::vector<double>& delta_grid, const GridSpec& grid) {
  const auto& m = truth.metadata();
  const double tol = discretization_tolerance(grid, truth);
  std::vector<BoundCheck> out;
  for (double rho : rho_grid) {
    for (int which = 1; which <= 2; ++which) {
      const GridSet a = cluster_set(truth, which, rho, grid);
      if (a.is_empty()) continue;
      for (double delta : delta_grid) {
        if (delta < grid.spacing()) continue;
        BoundCheck c;
        c.x = delta;
        c.measure = dilate(a, delta, Norm::euclidean).minus(erode(a, delta, Norm::euclidean)).measure();
        c.bound = m.c_bound * std::pow(delta, m.alpha);
        c.ok = c.measure <= c.bound + tol;
        out.push_back(c);
      }
    }
  }
  return out;
}

std::size_t level_component_count(const GroundTruthDensity& truth, double rho, const GridSpec& grid) {
  return grid_components(level_set_oracle(truth, rho, grid)).count;
}

double split_level_scan(const GroundTruthDensity& truth, const GridSpec& grid, double tol) {
  double lo = 0.0, hi = truth.rho_star_star();
  if (level_component_count(truth, hi, grid) < 2)
    throw NumericalError("level set at rho** has fewer than two grid components", hi);
  if (level_component_count(truth, lo, grid) >= 2) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (level_component_count(truth, mid, grid) >= 2)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace kdesplit
