#include "kdesplit/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/sobol.hpp>

#include "kdesplit/error.hpp"
#include "kdesplit/rng.hpp"

namespace kdesplit {

namespace {

double finish(const Kernel& kernel, double sum, std::size_t n, double delta) {
  return kernel.normalizer() * sum / (static_cast<double>(n) * std::pow(delta, kernel.dim()));
}

double reference_sum(const Dataset& data, const Kernel& kernel, double delta, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += kernel.shape(distance(q, data.point(i), kernel.norm()) / delta);
  return s;
}

double sum_over(const Dataset& data, const Kernel& kernel, double delta, std::span<const double> q,
                std::vector<std::size_t>& candidates) {
  std::sort(candidates.begin(), candidates.end());
  double s = 0.0;
  for (std::size_t j : candidates) s += kernel.shape(distance(q, data.point(j), kernel.norm()) / delta);
  return s;
}

void check_inputs(const Dataset& data, const Kernel& kernel, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("bandwidth delta must be positive and finite");
  if (data.dim() != static_cast<std::size_t>(kernel.dim()))
    throw ConfigError("kernel dimension does not match the data dimension");
}

// Sorted range [lo, hi) of samples whose scaled distance to q is within r.
std::pair<std::size_t, std::size_t> window_1d(const SortedAxis& s, double q, double delta, double r) {
  const auto& x = s.coords;
  const auto lo = std::partition_point(x.begin(), x.end(), [&](double v) { return v < q && (q - v) / delta > r; });
  const auto hi = std::partition_point(lo, x.end(), [&](double v) { return v <= q || (v - q) / delta <= r; });
  return {static_cast<std::size_t>(lo - x.begin()), static_cast<std::size_t>(hi - x.begin())};
}

// Bucketing of points into cubes whose side is at least the kernel reach.
class CellIndex {
 public:
  CellIndex(const Dataset& data, double width) : data_(data), width_(width), dim_(data.dim()) {
    for (std::size_t i = 0; i < data.size(); ++i) cells_[key(data.point(i))].push_back(i);
  }

  void candidates(std::span<const double> q, std::vector<std::size_t>& out) const {
    out.clear();
    std::vector<long long> base(dim_), cur(dim_);
    for (std::size_t k = 0; k < dim_; ++k) base[k] = static_cast<long long>(std::floor(q[k] / width_));
    std::size_t combos = 1;
    for (std::size_t k = 0; k < dim_; ++k) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t t = c;
      for (std::size_t k = 0; k < dim_; ++k) {
        cur[k] = base[k] + static_cast<long long>(t % 3) - 1;
        t /= 3;
      }
      const auto it = cells_.find(hash(cur));
      if (it == cells_.end()) continue;
      for (std::size_t j : it->second)
        if (same_cell(j, cur)) out.push_back(j);
    }
  }

 private:
  std::uint64_t hash(const std::vector<long long>& c) const {
    std::uint64_t h = 0x12345;
    for (long long v : c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return h;
  }
  std::uint64_t key(std::span<const double> p) const {
    std::vector<long long> c(dim_);
    for (std::size_t k = 0; k < dim_; ++k) c[k] = static_cast<long long>(std::floor(p[k] / width_));
    return hash(c);
  }
  bool same_cell(std::size_t j, const std::vector<long long>& c) const {
    const auto p = data_.point(j);
    for (std::size_t k = 0; k < dim_; ++k)
      if (static_cast<long long>(std::floor(p[k] / width_)) != c[k]) return false;
    return true;
  }

  const Dataset& data_;
  double width_;
  std::size_t dim_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

bool use_accelerated(const Dataset& data, const Kernel& kernel, KdePath path) {
  if (path == KdePath::reference) return false;
  if (path == KdePath::accelerated) return true;
  if (data.dim() > 6) return false;
  return kernel.profile() != Profile::laplacian && data.size() > 64;
}

std::vector<double> evaluate(const Dataset& data, const Kernel& kernel, double delta, const double* queries,
                             std::size_t count, KdePath path, const SortedAxis* sorted) {
  check_inputs(data, kernel, delta);
  const std::size_t d = data.dim();
  std::vector<double> out(count);
  if (!use_accelerated(data, kernel, path)) {
    for (std::size_t q = 0; q < count; ++q)
      out[q] = finish(kernel, reference_sum(data, kernel, delta, {queries + q * d, d}), data.size(), delta);
    return out;
  }
  const double reach = kernel.cutoff_radius();
  std::vector<std::size_t> cand;
  if (d == 1) {
    SortedAxis local;
    if (!sorted) {
      local = sort_axis(data);
      sorted = &local;
    }
    for (std::size_t q = 0; q < count; ++q) {
      const auto [lo, hi] = window_1d(*sorted, queries[q], delta, reach);
      if (kernel.profile() == Profile::rectangular) {
        // every term in the window is exactly 1
        out[q] = finish(kernel, static_cast<double>(hi - lo), data.size(), delta);
        continue;
      }
      // summed in coordinate order, so this agrees with the reference to rounding only
      double s = 0.0;
      for (std::size_t j = lo; j < hi; ++j) s += kernel.shape(std::abs(queries[q] - sorted->coords[j]) / delta);
      out[q] = finish(kernel, s, data.size(), delta);
    }
    return out;
  }
  // slightly wider cells so rounding in the cell index can never drop a neighbour
  const CellIndex index(data, reach * delta * (1.0 + 1e-9));
  for (std::size_t q = 0; q < count; ++q) {
    const std::span<const double> x{queries + q * d, d};
    index.candidates(x, cand);
    out[q] = finish(kernel, sum_over(data, kernel, delta, x, cand), data.size(), delta);
  }
  return out;
}

// ---- smoothed density ----

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

QuadResult integrate_pieces(const std::function<double(double)>& f, std::vector<double> cuts, unsigned depth) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadResult r;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    double err = 0.0;
    r.value += GK::integrate(f, cuts[k], cuts[k + 1], depth, 1e-10, &err);
    r.error += err;
  }
  return r;
}

std::vector<double> window_cuts(double lo, double hi, double center, const std::vector<double>& breaks) {
  std::vector<double> cuts{lo, hi};
  if (center > lo && center < hi) cuts.push_back(center);
  for (double b : breaks)
    if (b > lo && b < hi) cuts.push_back(b);
  return cuts;
}

[[noreturn]] void tolerance_failure(double achieved, double rel_tol) {
  std::ostringstream msg;
  msg << "smoothed density: relative tolerance " << rel_tol << " not reached (achieved " << achieved << ")";
  throw NumericalError(msg.str(), achieved);
}

double smoothed_1d(const GroundTruthDensity& truth, const Kernel& kernel, double delta, double x, double rel_tol) {
  const double reach = kernel.cutoff_radius() * delta;
  const double lo = std::max(x - reach, truth.box_lower()[0]);
  const double hi = std::min(x + reach, truth.box_upper()[0]);
  if (!(hi > lo)) return 0.0;
  auto f = [&](double y) {
    const double p[1] = {y};
    return kernel.at_radius(std::abs(x - y) / delta) * truth.density(p) / delta;
  };
  const QuadResult r = integrate_pieces(f, window_cuts(lo, hi, x, truth.breakpoints()), 15);
  const double scale = std::max(std::abs(r.value), 1e-300);
  if (r.error > rel_tol * scale && r.error > 1e-13) tolerance_failure(r.error / scale, rel_tol);
  return std::max(r.value, 0.0);
}

double smoothed_2d(const GroundTruthDensity& truth, const Kernel& kernel, double delta, std::span<const double> x,
                   double rel_tol) {
  const double reach = kernel.cutoff_radius() * delta;
  const auto& blo = truth.box_lower();
  const auto& bhi = truth.box_upper();
  const double lo0 = std::max(x[0] - reach, blo[0]);
  const double hi0 = std::min(x[0] + reach, bhi[0]);
  if (!(hi0 > lo0)) return 0.0;
  using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;
  double inner_error = 0.0;
  auto outer = [&](double y0) {
    double half = reach;
    if (kernel.norm() == Norm::euclidean) {
      const double t = y0 - x[0];
      half = std::sqrt(std::max(0.0, reach * reach - t * t));
    }
    const double lo1 = std::max(x[1] - half, blo[1]);
    const double hi1 = std::min(x[1] + half, bhi[1]);
    if (!(hi1 > lo1)) return 0.0;
    auto inner = [&](double y1) {
      const double diff[2] = {(x[0] - y0) / delta, (x[1] - y1) / delta};
      const double p[2] = {y0, y1};
      return kernel(diff) * truth.density(p);
    };
    std::vector<double> cuts{lo1, hi1};
    if (x[1] > lo1 && x[1] < hi1) cuts.push_back(x[1]);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double err = 0.0;
      total += GK15::integrate(inner, cuts[k], cuts[k + 1], 10, 1e-9, &err);
      inner_error = std::max(inner_error, err);
    }
    return total;
  };
  std::vector<double> cuts{lo0, hi0};
  if (x[0] > lo0 && x[0] < hi0) cuts.push_back(x[0]);
  std::sort(cuts.begin(), cuts.end());
  double value = 0.0, error = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    value += GK15::integrate(outer, cuts[k], cuts[k + 1], 10, 1e-9, &err);
    error += err;
  }
  value /= delta * delta;
  error = error / (delta * delta) + inner_error * (hi0 - lo0) / (delta * delta);
  const double scale = std::max(std::abs(value), 1e-300);
  if (error > rel_tol * scale && error > 1e-12) tolerance_failure(error / scale, rel_tol);
  return std::max(value, 0.0);
}

// E over u ~ uniform box [-R, R]^d of (2R)^d K(u) h(x - delta u), Sobol points
// with independent random shifts; the spread across shifts gives the error.
double smoothed_qmc(const GroundTruthDensity& truth, const Kernel& kernel, double delta, std::span<const double> x,
                    double rel_tol) {
  const std::size_t d = x.size();
  const double reach = kernel.cutoff_radius();
  constexpr int kShifts = 16;
  constexpr std::size_t kMaxPoints = std::size_t{1} << 20;
  Rng rng(0x5eed0fULL);
  std::vector<std::vector<double>> shifts(kShifts, std::vector<double>(d));
  for (auto& s : shifts)
    for (auto& v : s) v = uniform01(rng);
  const double volume = std::pow(2.0 * reach, static_cast<double>(d));

  std::vector<double> sums(kShifts, 0.0);
  std::vector<double> u(d), y(d), base(d);
  boost::random::sobol gen(d);
  std::size_t used = 0;
  double mean = 0.0, stderr_ = 0.0;
  for (std::size_t target = 4096; target <= kMaxPoints; target *= 2) {
    for (; used < target; ++used) {
      for (std::size_t k = 0; k < d; ++k) base[k] = static_cast<double>(gen()) * 0x1.0p-64;
      for (int s = 0; s < kShifts; ++s) {
        for (std::size_t k = 0; k < d; ++k) {
          double t = base[k] + shifts[s][k];
          if (t >= 1.0) t -= 1.0;
          u[k] = (2.0 * t - 1.0) * reach;
          y[k] = x[k] - delta * u[k];
        }
        const double kv = kernel(u);
        if (kv > 0.0) sums[s] += kv * truth.density(y);
      }
    }
    double m = 0.0;
    for (double s : sums) m += s / static_cast<double>(used);
    m /= kShifts;
    double var = 0.0;
    for (double s : sums) {
      const double e = s / static_cast<double>(used) - m;
      var += e * e;
    }
    var /= (kShifts - 1);
    mean = m * volume;
    stderr_ = std::sqrt(var / kShifts) * volume;
    if (stderr_ <= rel_tol * std::abs(mean) || (mean == 0.0 && stderr_ == 0.0)) return std::max(mean, 0.0);
  }
  tolerance_failure(stderr_ / std::max(std::abs(mean), 1e-300), rel_tol);
}

}  // namespace

double kde_eval(const Dataset& data, const Kernel& kernel, double delta, std::span<const double> query) {
  check_inputs(data, kernel, delta);
  if (query.size() != data.dim()) throw ConfigError("query dimension does not match the data");
  return finish(kernel, reference_sum(data, kernel, delta, query), data.size(), delta);
}

std::vector<double> kde_at_samples(const Dataset& data, const Kernel& kernel, double delta, KdePath path,
                                   const SortedAxis* sorted) {
  if (data.dim() == 1 && kernel.profile() == Profile::rectangular && use_accelerated(data, kernel, path)) {
    check_inputs(data, kernel, delta);
    SortedAxis local;
    if (!sorted) {
      local = sort_axis(data);
      sorted = &local;
    }
    // queries in sorted order: both window ends only move right
    const auto& x = sorted->coords;
    const std::size_t n = x.size();
    std::vector<double> out(n);
    std::size_t lo = 0, hi = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double q = x[k];
      while (lo < n && x[lo] < q && (q - x[lo]) / delta > 1.0) ++lo;
      if (hi < k) hi = k;
      while (hi < n && (x[hi] <= q || (x[hi] - q) / delta <= 1.0)) ++hi;
      out[sorted->order[k]] = finish(kernel, static_cast<double>(hi - lo), n, delta);
    }
    return out;
  }
  return evaluate(data, kernel, delta, data.coords().data(), data.size(), path, sorted);
}

std::vector<double> kde_at_points(const Dataset& data, const Kernel& kernel, double delta,
                                  const std::vector<double>& queries, KdePath path, const SortedAxis* sorted) {
  if (queries.size() % data.dim() != 0) throw ConfigError("query array length is not a multiple of the dimension");
  return evaluate(data, kernel, delta, queries.data(), queries.size() / data.dim(), path, sorted);
}

double smoothed_density(const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                        std::span<const double> query, double rel_tol) {
  if (!(delta > 0.0)) throw ConfigError("bandwidth delta must be positive");
  if (truth.dim() != kernel.dim() || query.size() != static_cast<std::size_t>(truth.dim()))
    throw ConfigError("dimension mismatch between density, kernel and query");
  switch (truth.dim()) {
    case 1: return smoothed_1d(truth, kernel, delta, query[0], rel_tol);
    case 2: return smoothed_2d(truth, kernel, delta, query, rel_tol);
    default: return smoothed_qmc(truth, kernel, delta, query, rel_tol);
  }
}

ProbeGrid::ProbeGrid(std::vector<double> lower, std::vector<double> upper, double max_spacing)
    : lower_(std::move(lower)) {
  if (lower_.size() != upper.size() || lower_.empty()) throw ConfigError("probe grid bounds have mismatched size");
  if (!(max_spacing > 0.0)) throw ConfigError("probe grid spacing must be positive");
  double extent = 0.0;
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(upper[k] >= lower_[k])) throw ConfigError("probe grid upper bound below lower bound");
    extent = std::max(extent, upper[k] - lower_[k]);
  }
  // one spacing for all axes: the largest extent sets the resolution
  const double steps = std::max(1.0, std::ceil(extent / max_spacing - 1e-12));
  spacing_ = extent > 0.0 ? extent / steps : max_spacing;
  total_ = 1;
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    const double e = upper[k] - lower_[k];
    counts_.push_back(static_cast<std::size_t>(std::floor(e / spacing_ + 1e-9)) + 1);
    total_ *= counts_.back();
  }
}

std::vector<double> ProbeGrid::point(std::size_t index) const {
  std::vector<double> p(lower_.size());
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    p[k] = lower_[k] + spacing_ * static_cast<double>(index % counts_[k]);
    index /= counts_[k];
  }
  return p;
}

std::vector<double> ProbeGrid::points() const {
  std::vector<double> out;
  out.reserve(total_ * lower_.size());
  for (std::size_t i = 0; i < total_; ++i) {
    const auto p = point(i);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

ProbeGrid default_probe_grid(const GroundTruthDensity& truth, double delta) {
  return ProbeGrid(truth.box_lower(), truth.box_upper(), delta / 4.0);
}

std::vector<double> smoothed_on_grid(const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                                     const ProbeGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = smoothed_density(truth, kernel, delta, grid.point(i));
  return out;
}

SupDistance sup_distance(const Dataset& data, const Kernel& kernel, double delta, const ProbeGrid& grid,
                         const std::vector<double>& reference) {
  if (reference.size() != grid.size()) throw ConfigError("reference values do not match the probe grid");
  const auto values = kde_at_points(data, kernel, delta, grid.points());
  SupDistance r;
  r.spacing = grid.spacing();
  r.probes = grid.size();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = std::abs(values[i] - reference[i]);
    if (e > r.value) {
      r.value = e;
      arg = i;
    }
  }
  r.argmax = grid.point(arg);
  return r;
}

SupDistance sup_distance(const Dataset& data, const GroundTruthDensity& truth, const Kernel& kernel, double delta,
                         const ProbeGrid& grid) {
  return sup_distance(data, kernel, delta, grid, smoothed_on_grid(truth, kernel, delta, grid));
}

}  // namespace kdesplit
