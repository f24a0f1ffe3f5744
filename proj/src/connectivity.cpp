#include "kdesplit/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "kdesplit/error.hpp"
#include "kdesplit/rng.hpp"

namespace kdesplit {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  return true;
}

EdgeRule parse_edge_rule(const std::string& name) {
  if (name == "sum") return EdgeRule::sum;
  if (name == "geometric") return EdgeRule::geometric;
  throw ConfigError("unknown edge rule '" + name + "' (expected sum or geometric)");
}

double edge_threshold(double sigma, double tau, EdgeRule rule) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return rule == EdgeRule::sum ? sigma + tau : 2.0 * sigma + tau;
}

namespace {

std::vector<std::size_t> normalized(const Dataset& data, const std::vector<std::size_t>& active) {
  std::vector<std::size_t> a = active;
  if (!std::is_sorted(a.begin(), a.end())) std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (!a.empty() && a.back() >= data.size()) throw ConfigError("active index out of range");
  return a;
}

// Canonical partition from a union-find over positions in `active`.
ComponentPartition canonical(const Dataset& data, const std::vector<std::size_t>& active, UnionFind& uf) {
  ComponentPartition p;
  p.labels.assign(data.size(), -1);
  std::vector<long> root_id(active.size(), -1);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t r = uf.find(k);
    if (root_id[r] < 0) {
      root_id[r] = static_cast<long>(p.members.size());
      p.members.emplace_back();
    }
    p.members[static_cast<std::size_t>(root_id[r])].push_back(active[k]);
    p.labels[active[k]] = root_id[r];
  }
  return p;
}

void join_all_pairs(const Dataset& data, const std::vector<std::size_t>& active, double thr, Norm norm,
                    UnionFind& uf) {
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = a + 1; b < active.size(); ++b)
      if (distance(data.point(active[a]), data.point(active[b]), norm) <= thr) uf.unite(a, b);
}

void join_grid(const Dataset& data, const std::vector<std::size_t>& active, double thr, Norm norm, UnionFind& uf) {
  const std::size_t d = data.dim();
  const double width = thr * (1.0 + 1e-9);
  auto cell_of = [&](std::size_t i) {
    std::vector<long long> c(d);
    const auto p = data.point(i);
    for (std::size_t k = 0; k < d; ++k) c[k] = static_cast<long long>(std::floor(p[k] / width));
    return c;
  };
  auto hash = [](const std::vector<long long>& c) {
    std::uint64_t h = 0x9876;
    for (long long v : c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return h;
  };
  std::vector<std::vector<long long>> cells(active.size());
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (std::size_t k = 0; k < active.size(); ++k) {
    cells[k] = cell_of(active[k]);
    buckets[hash(cells[k])].push_back(k);
  }
  std::size_t combos = 1;
  for (std::size_t k = 0; k < d; ++k) combos *= 3;
  std::vector<long long> cur(d);
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t t = c;
      for (std::size_t k = 0; k < d; ++k) {
        cur[k] = cells[a][k] + static_cast<long long>(t % 3) - 1;
        t /= 3;
      }
      const auto it = buckets.find(hash(cur));
      if (it == buckets.end()) continue;
      for (std::size_t b : it->second) {
        if (b <= a || cells[b] != cur) continue;
        if (distance(data.point(active[a]), data.point(active[b]), norm) <= thr) uf.unite(a, b);
      }
    }
  }
}

// In one dimension the components are the maximal runs of the sorted active
// points whose consecutive gaps are within the threshold.
void join_sorted_chain(const Dataset& data, const std::vector<std::size_t>& active, double thr,
                       const SortedAxis* sorted, UnionFind& uf) {
  SortedAxis local;
  if (!sorted) {
    local = sort_axis(data);
    sorted = &local;
  }
  std::vector<long> pos(data.size(), -1);
  for (std::size_t k = 0; k < active.size(); ++k) pos[active[k]] = static_cast<long>(k);
  long prev = -1;
  for (std::size_t idx : sorted->order) {
    const long k = pos[idx];
    if (k < 0) continue;
    if (prev >= 0) {
      const auto pi = data.point(active[static_cast<std::size_t>(prev)]);
      if (distance(pi, data.point(idx), Norm::euclidean) <= thr) uf.unite(static_cast<std::size_t>(prev), k);
    }
    prev = k;
  }
}

}  // namespace

ComponentPartition threshold_components(const Dataset& data, const std::vector<std::size_t>& active_in,
                                        double threshold, Norm norm, const ConnectivityOptions& options) {
  const auto active = normalized(data, active_in);
  UnionFind uf(active.size());
  PairSearch search = options.search;
  if (search == PairSearch::automatic) {
    if (data.dim() == 1)
      search = PairSearch::sorted_chain;
    else if (active.size() <= options.all_pairs_limit || data.dim() > 4)
      search = PairSearch::all_pairs;
    else
      search = PairSearch::grid;
  }
  switch (search) {
    case PairSearch::sorted_chain:
      if (data.dim() != 1) throw ConfigError("sorted-chain connectivity needs one-dimensional data");
      join_sorted_chain(data, active, threshold, options.sorted, uf);
      break;
    case PairSearch::grid: join_grid(data, active, threshold, norm, uf); break;
    default: join_all_pairs(data, active, threshold, norm, uf); break;
  }
  return canonical(data, active, uf);
}

ComponentPartition tau_components(const Dataset& data, const std::vector<std::size_t>& active, double sigma,
                                  double tau, Norm norm, const ConnectivityOptions& options) {
  return threshold_components(data, active, edge_threshold(sigma, tau, options.rule), norm, options);
}

ComponentPartition components_bruteforce(const Dataset& data, const std::vector<std::size_t>& active_in,
                                         double threshold, Norm norm) {
  const auto active = normalized(data, active_in);
  const std::size_t m = active.size();
  std::vector<unsigned char> adj(m * m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      adj[a * m + b] = a != b && distance(data.point(active[a]), data.point(active[b]), norm) <= threshold;

  ComponentPartition p;
  p.labels.assign(data.size(), -1);
  std::vector<unsigned char> seen(m, 0);
  for (std::size_t s = 0; s < m; ++s) {
    if (seen[s]) continue;
    const long id = static_cast<long>(p.members.size());
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      const std::size_t a = queue.front();
      queue.pop_front();
      comp.push_back(active[a]);
      for (std::size_t b = 0; b < m; ++b)
        if (adj[a * m + b] && !seen[b]) {
          seen[b] = 1;
          queue.push_back(b);
        }
    }
    std::sort(comp.begin(), comp.end());
    for (std::size_t i : comp) p.labels[i] = id;
    p.members.push_back(std::move(comp));
  }
  return p;
}

}  // namespace kdesplit
