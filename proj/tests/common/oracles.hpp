#pragma once

// Independent numerical references used by the test suites. Nothing here
// calls into the library's quadrature, morphology or component code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Midpoint rule over the box [lo, hi] with `per_axis` cells per axis.
inline double integrate_box(const std::function<double(std::span<const double>)>& f, const std::vector<double>& lo,
                            const std::vector<double>& hi, std::size_t per_axis) {
  const std::size_t d = lo.size();
  std::vector<double> h(d), x(d);
  double cell = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    h[k] = (hi[k] - lo[k]) / static_cast<double>(per_axis);
    cell *= h[k];
  }
  std::vector<std::size_t> idx(d, 0);
  double sum = 0.0;
  for (;;) {
    for (std::size_t k = 0; k < d; ++k) x[k] = lo[k] + h[k] * (static_cast<double>(idx[k]) + 0.5);
    sum += f(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  return sum * cell;
}

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline double supnorm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}

// Connected components by depth-first search over the explicit pair list;
// returns member lists ordered by smallest member.
inline std::vector<std::vector<std::size_t>> components(const std::vector<std::vector<double>>& pts,
                                                        const std::vector<std::size_t>& active, double threshold,
                                                        bool sup) {
  const std::size_t m = active.size();
  std::vector<int> seen(m, 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < m; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::vector<std::size_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      comp.push_back(active[u]);
      for (std::size_t v = 0; v < m; ++v) {
        if (seen[v]) continue;
        const double dist = sup ? supnorm(pts[active[u]], pts[active[v]]) : euclid(pts[active[u]], pts[active[v]]);
        if (dist <= threshold) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
