#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kdesplit/dataset.hpp"
#include "kdesplit/kernel.hpp"

namespace kdesplit {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  // Returns true if the two sets were distinct.
  bool unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

// Partition of an active index set into components. Component ids are
// 0..count()-1 ordered by smallest member; member lists are ascending.
struct ComponentPartition {
  std::vector<std::vector<std::size_t>> members;
  // labels[i] = component of point i, -1 if i is not active. Sized to the dataset.
  std::vector<long> labels;

  std::size_t count() const { return members.size(); }
  bool operator==(const ComponentPartition& o) const { return members == o.members; }
};

// Samples i, j are joined when |x_i - x_j| <= threshold, with
// threshold = sigma + tau (sum rule) or 2 sigma + tau (geometric rule: the
// sigma-balls are then less than tau apart).
enum class EdgeRule { sum, geometric };
EdgeRule parse_edge_rule(const std::string& name);
double edge_threshold(double sigma, double tau, EdgeRule rule);

enum class PairSearch { automatic, all_pairs, grid, sorted_chain };

struct ConnectivityOptions {
  EdgeRule rule = EdgeRule::sum;
  PairSearch search = PairSearch::automatic;
  std::size_t all_pairs_limit = 20000;
  // Optional sort_axis() of one-dimensional data, reused across calls.
  const SortedAxis* sorted = nullptr;
};

ComponentPartition tau_components(const Dataset& data, const std::vector<std::size_t>& active, double sigma,
                                  double tau, Norm norm, const ConnectivityOptions& options = {});

// Components of the graph with edges |x_i - x_j| <= threshold.
ComponentPartition threshold_components(const Dataset& data, const std::vector<std::size_t>& active,
                                        double threshold, Norm norm, const ConnectivityOptions& options = {});

// Breadth-first search over the explicit adjacency matrix.
ComponentPartition components_bruteforce(const Dataset& data, const std::vector<std::size_t>& active,
                                         double threshold, Norm norm);

}  // namespace kdesplit
