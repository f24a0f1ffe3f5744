#include "kdesplit/grid_set.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "kdesplit/error.hpp"
#include "kdesplit/rng.hpp"

namespace kdesplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Distances are exact lattice values; this only absorbs rounding of delta / h.
constexpr double kRelSlack = 1e-12;

}  // namespace

GridSpec::GridSpec(std::vector<double> lower, std::vector<double> upper, double spacing, std::size_t max_nodes)
    : lower_(std::move(lower)), spacing_(spacing) {
  if (lower_.empty() || lower_.size() != upper.size()) throw ConfigError("grid bounds have mismatched size");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ConfigError("grid spacing must be positive");
  for (std::size_t k = 0; k < lower_.size(); ++k)
    if (!(upper[k] > lower_[k])) throw ConfigError("grid box must have positive extent on every axis");
  for (;;) {
    counts_.clear();
    double total = 1.0;
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      const double c = std::max(1.0, std::ceil((upper[k] - lower_[k]) / spacing_ - 1e-9));
      counts_.push_back(static_cast<std::size_t>(c));
      total *= c;
    }
    if (total <= static_cast<double>(max_nodes)) break;
    spacing_ *= std::pow(total / static_cast<double>(max_nodes), 1.0 / static_cast<double>(lower_.size())) * 1.0001;
  }
  strides_.resize(counts_.size());
  total_ = 1;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    strides_[k] = total_;
    total_ *= counts_[k];
  }
}

double GridSpec::cell_volume() const { return std::pow(spacing_, static_cast<double>(dim())); }

std::vector<double> GridSpec::upper() const {
  std::vector<double> u(dim());
  for (std::size_t k = 0; k < dim(); ++k) u[k] = lower_[k] + spacing_ * static_cast<double>(counts_[k]);
  return u;
}

void GridSpec::center(std::size_t index, std::span<double> out) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    out[k] = lower_[k] + spacing_ * (static_cast<double>(index % counts_[k]) + 0.5);
    index /= counts_[k];
  }
}

std::vector<double> GridSpec::center(std::size_t index) const {
  std::vector<double> p(dim());
  center(index, p);
  return p;
}

std::size_t GridSpec::locate(std::span<const double> x) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    const double t = std::floor((x[k] - lower_[k]) / spacing_);
    const double c = std::clamp(t, 0.0, static_cast<double>(counts_[k] - 1));
    index += static_cast<std::size_t>(c) * strides_[k];
  }
  return index;
}

std::vector<std::size_t> GridSpec::unravel(std::size_t index) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    idx[k] = index % counts_[k];
    index /= counts_[k];
  }
  return idx;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return lower_ == o.lower_ && counts_ == o.counts_ && spacing_ == o.spacing_;
}

GridSet::GridSet(GridSpec spec, std::vector<unsigned char> mask) : spec_(std::move(spec)), mask_(std::move(mask)) {
  if (mask_.size() != spec_.size()) throw ConfigError("grid mask length does not match the node count");
}

GridSet GridSet::empty(const GridSpec& spec) { return GridSet(spec, std::vector<unsigned char>(spec.size(), 0)); }
GridSet GridSet::full(const GridSpec& spec) { return GridSet(spec, std::vector<unsigned char>(spec.size(), 1)); }

GridSet GridSet::from_predicate(const GridSpec& spec, const std::function<bool(std::span<const double>)>& inside) {
  std::vector<unsigned char> m(spec.size());
  std::vector<double> p(spec.dim());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    spec.center(i, p);
    m[i] = inside(p) ? 1 : 0;
  }
  return GridSet(spec, std::move(m));
}

std::size_t GridSet::count() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1)); }

void GridSet::require_same_grid(const GridSet& o) const {
  if (!(spec_ == o.spec_)) throw ConfigError("grid sets live on different grids");
}

GridSet GridSet::complement() const {
  auto m = mask_;
  for (auto& v : m) v = v ? 0 : 1;
  return GridSet(spec_, std::move(m));
}

GridSet GridSet::intersect(const GridSet& o) const {
  require_same_grid(o);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] && o.mask_[i];
  return GridSet(spec_, std::move(m));
}

GridSet GridSet::unite(const GridSet& o) const {
  require_same_grid(o);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] || o.mask_[i];
  return GridSet(spec_, std::move(m));
}

GridSet GridSet::minus(const GridSet& o) const {
  require_same_grid(o);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] && !o.mask_[i];
  return GridSet(spec_, std::move(m));
}

bool GridSet::subset_of(const GridSet& o) const {
  require_same_grid(o);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !o.mask_[i]) return false;
  return true;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string GridSet::mask_base64() const {
  std::vector<std::uint8_t> packed((mask_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return base64_encode(packed);
}

namespace {

// 1-d squared distance transform of sampled function f (Felzenszwalb and
// Huttenlocher), in place over a strided line.
void edt_line(double* f, std::size_t n, std::size_t stride, std::vector<double>& buf, std::vector<double>& z,
              std::vector<std::size_t>& v) {
  buf.resize(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = f[i * stride];
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  // skip leading infinite samples
  std::size_t first = 0;
  while (first < n && !std::isfinite(buf[first])) ++first;
  if (first == n) return;
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!std::isfinite(buf[q])) continue;
    const double qd = static_cast<double>(q);
    for (;;) {
      const double vd = static_cast<double>(v[k]);
      const double s = ((buf[q] + qd * qd) - (buf[v[k]] + vd * vd)) / (2.0 * qd - 2.0 * vd);
      if (s <= z[k]) {
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const double t = qd - static_cast<double>(v[k]);
    f[q * stride] = t * t + buf[v[k]];
  }
}

// Squared Euclidean distance in lattice units.
std::vector<double> euclidean_units_sq(const GridSet& set) {
  const auto& spec = set.spec();
  std::vector<double> f(spec.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = set.at(i) ? 0.0 : kInf;
  std::vector<double> buf, z;
  std::vector<std::size_t> v;
  for (std::size_t axis = 0; axis < spec.dim(); ++axis) {
    const std::size_t n = spec.counts()[axis];
    const std::size_t stride = spec.stride(axis);
    for (std::size_t start = 0; start < spec.size(); ++start) {
      if ((start / stride) % n != 0) continue;  // not the first node of a line along `axis`
      edt_line(f.data() + start, n, stride, buf, z, v);
    }
  }
  return f;
}

// Chessboard distance in lattice units: two raster passes over the full
// 3^d neighbourhood.
std::vector<double> chessboard_units(const GridSet& set) {
  const auto& spec = set.spec();
  const std::size_t d = spec.dim();
  std::vector<double> f(spec.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = set.at(i) ? 0.0 : kInf;

  std::vector<std::vector<int>> backward;  // offsets preceding in raster order
  std::size_t combos = 1;
  for (std::size_t k = 0; k < d; ++k) combos *= 3;
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<int> o(d);
    std::size_t t = c;
    for (std::size_t k = 0; k < d; ++k) {
      o[k] = static_cast<int>(t % 3) - 1;
      t /= 3;
    }
    int top = 0;
    for (std::size_t k = d; k-- > 0;)
      if (o[k] != 0) {
        top = o[k];
        break;
      }
    if (top < 0) backward.push_back(o);
  }
  std::vector<std::size_t> idx(d);
  auto relax = [&](std::size_t i, int sign) {
    idx = spec.unravel(i);
    double best = f[i];
    for (const auto& o : backward) {
      std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i);
      bool inside = true;
      for (std::size_t k = 0; k < d && inside; ++k) {
        const long p = static_cast<long>(idx[k]) + sign * o[k];
        if (p < 0 || p >= static_cast<long>(spec.counts()[k])) inside = false;
        j += static_cast<std::ptrdiff_t>(sign * o[k]) * static_cast<std::ptrdiff_t>(spec.stride(k));
      }
      if (inside) best = std::min(best, f[static_cast<std::size_t>(j)] + 1.0);
    }
    f[i] = best;
  };
  for (std::size_t i = 0; i < f.size(); ++i) relax(i, 1);
  for (std::size_t i = f.size(); i-- > 0;) relax(i, -1);
  return f;
}

void require_resolvable(const GridSet& set, double delta) {
  if (!(delta >= set.spec().spacing()))
    throw ConfigError("morphology radius " + std::to_string(delta) + " is below the grid spacing " +
                      std::to_string(set.spec().spacing()));
}

}  // namespace

std::vector<double> distance_transform(const GridSet& set, Norm norm) {
  const double h = set.spec().spacing();
  std::vector<double> f;
  if (norm == Norm::supremum && set.spec().dim() > 1) {
    f = chessboard_units(set);
    for (auto& v : f) v *= h;
  } else {
    f = euclidean_units_sq(set);
    for (auto& v : f) v = std::sqrt(v) * h;
  }
  return f;
}

GridSet dilate(const GridSet& set, double delta, Norm norm) {
  require_resolvable(set, delta);
  const auto dt = distance_transform(set, norm);
  const double limit = delta * (1.0 + kRelSlack);
  std::vector<unsigned char> m(dt.size());
  for (std::size_t i = 0; i < dt.size(); ++i) m[i] = dt[i] <= limit ? 1 : 0;
  return GridSet(set.spec(), std::move(m));
}

GridSet erode(const GridSet& set, double delta, Norm norm) {
  return dilate(set.complement(), delta, norm).complement();
}

double psi_star(const GridSet& set, double delta, Norm norm) {
  const GridSet inner = erode(set, delta, norm);
  if (inner.is_empty()) return kInf;
  const auto dt = distance_transform(inner, norm);
  double worst = 0.0;
  for (std::size_t i = 0; i < dt.size(); ++i)
    if (set.at(i)) worst = std::max(worst, dt[i]);
  return worst;
}

double symdiff_measure(const GridSet& a, const GridSet& b) {
  if (!(a.spec() == b.spec())) throw ConfigError("grid sets live on different grids");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.mask().size(); ++i) diff += (a.at(i) != b.at(i)) ? 1 : 0;
  return static_cast<double>(diff) * a.spec().cell_volume();
}

MonteCarloEstimate symdiff_measure_mc(const std::function<bool(std::span<const double>)>& in_a,
                                      const std::function<bool(std::span<const double>)>& in_b,
                                      const std::vector<double>& lower, const std::vector<double>& upper,
                                      std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("Monte-Carlo estimate needs at least two samples");
  if (lower.size() != upper.size() || lower.empty()) throw ConfigError("Monte-Carlo box has mismatched bounds");
  double volume = 1.0;
  for (std::size_t k = 0; k < lower.size(); ++k) volume *= upper[k] - lower[k];
  Rng rng(seed);
  std::vector<double> x(lower.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = lower[k] + (upper[k] - lower[k]) * uniform01(rng);
    if (in_a(x) != in_b(x)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  MonteCarloEstimate e;
  e.samples = samples;
  e.value = p * volume;
  e.std_error = volume * std::sqrt(p * (1.0 - p) / static_cast<double>(samples - 1));
  return e;
}

GridSet GridComponents::component(const GridSpec& spec, std::size_t id) const {
  std::vector<unsigned char> m(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == static_cast<long>(id) ? 1 : 0;
  return GridSet(spec, std::move(m));
}

GridComponents grid_components(const GridSet& set) {
  const auto& spec = set.spec();
  GridComponents c;
  c.labels.assign(spec.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    if (!set.at(s) || c.labels[s] >= 0) continue;
    const long id = static_cast<long>(c.count++);
    c.labels[s] = id;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < spec.dim(); ++k) {
        const std::size_t pos = (i / spec.stride(k)) % spec.counts()[k];
        if (pos > 0) {
          const std::size_t j = i - spec.stride(k);
          if (set.at(j) && c.labels[j] < 0) {
            c.labels[j] = id;
            queue.push_back(j);
          }
        }
        if (pos + 1 < spec.counts()[k]) {
          const std::size_t j = i + spec.stride(k);
          if (set.at(j) && c.labels[j] < 0) {
            c.labels[j] = id;
            queue.push_back(j);
          }
        }
      }
    }
  }
  return c;
}

}  // namespace kdesplit
