#include <doctest.h>

#include <cmath>
#include <limits>

#include "kdesplit/error.hpp"
#include "kdesplit/level_family.hpp"
#include "kdesplit/splitter.hpp"

using namespace kdesplit;

namespace {

class EmptyFamily : public LevelSetFamily {
 public:
  std::vector<std::size_t> active(double) const override { return {}; }
  bool is_active(std::size_t, double) const override { return false; }
  ComponentPartition components(double, double) const override { return {}; }
  double max_level() const override { return -std::numeric_limits<double>::infinity(); }
};

// Active sets do not shrink: a family that breaks the nesting assumption
class StuckFamily : public LevelSetFamily {
 public:
  explicit StuckFamily(const Dataset& d) : data_(d) {}
  std::vector<std::size_t> active(double) const override { return {0}; }
  bool is_active(std::size_t, double) const override { return true; }
  ComponentPartition components(double, double) const override { return {{{0}}, {0}}; }
  double max_level() const override { return std::numeric_limits<double>::infinity(); }

 private:
  const Dataset& data_;
};

}  // namespace

TEST_CASE("six points in two groups") {
  const Dataset data({0.0, 0.1, 0.2, 2.0, 2.1, 2.2}, 1);
  const SampleLevelFamily fam(data, std::vector<double>(6, 3.0), 0.05, Norm::euclidean);
  const ClusterOutput out = run_generic(fam, {.tau = 0.2, .eps = 0.25, .rho0 = 0.5});
  // two components at rho0, so the loop stops after one pass; the recount
  // happens at rho0 + eps + 2 eps
  CHECK(out.split);
  CHECK(out.rho_out == 1.25);
  REQUIRE(out.components.size() == 2);
  CHECK(out.components[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(out.components[1] == std::vector<std::size_t>{3, 4, 5});
  CHECK(out.trace == std::vector<TraceEntry>{{0.5, 2}, {1.25, 2}});
}

TEST_CASE("three clustered points") {
  const Dataset data({0.0, 0.1, 0.2}, 1);
  const SampleLevelFamily fam(data, std::vector<double>(3, 2.0), 0.05, Norm::euclidean);
  const ClusterOutput out = run_generic(fam, {.tau = 10.0, .eps = 0.5, .rho0 = 0.5});
  CHECK_FALSE(out.split);
  CHECK(out.rho_out == 0.5);
  CHECK(out.base_set == std::vector<std::size_t>{0, 1, 2});
  CHECK(out.trace == std::vector<TraceEntry>{{0.5, 1}, {1.0, 1}, {1.5, 0}, {3.0, 0}});
}

TEST_CASE("empty family") {
  const EmptyFamily fam;
  const ClusterOutput out = run_generic(fam, {.tau = 1.0, .eps = 0.1, .rho0 = 0.0});
  CHECK_FALSE(out.split);
  CHECK(out.rho_out == 0.0);
  CHECK(out.base_set.empty());
  REQUIRE(out.trace.size() == 2);
  CHECK(out.trace[0] == TraceEntry{0.0, 0});
  CHECK(out.trace[1].m == 0);
}

TEST_CASE("trace levels are an arithmetic sequence") {
  // a ramp: sample i is active up to level i, two far groups at the top
  std::vector<double> coords, scores;
  for (int i = 0; i < 20; ++i) {
    coords.push_back(i < 10 ? 0.01 * i : 5.0 + 0.01 * i);
    scores.push_back(i < 10 ? 0.1 * (i + 1) : 0.05 * (i - 9));
  }
  const Dataset data(coords, 1);
  const SampleLevelFamily fam(data, scores, 0.01, Norm::euclidean);
  const SplitterParams p{.tau = 0.05, .eps = 0.07, .rho0 = 0.03};
  const ClusterOutput a = run_generic(fam, p);
  const ClusterOutput b = run_generic(fam, p);
  CHECK(a.trace == b.trace);
  for (std::size_t i = 0; i + 1 < a.trace.size(); ++i)
    CHECK(a.trace[i].rho == doctest::Approx(p.rho0 + static_cast<double>(i) * p.eps));
  if (a.split) {
    CHECK(a.rho_out >= p.rho0 + 3.0 * p.eps - 1e-12);
    const double k = (a.rho_out - p.rho0) / p.eps;
    CHECK(k == doctest::Approx(std::round(k)));
  }
}

TEST_CASE("filtered components") {
  const Dataset data({0.0, 0.1, 2.0, 2.1}, 1);
  const SampleLevelFamily same(data, {1.0, 1.0, 1.0, 1.0}, 0.05, Norm::euclidean);
  CHECK(filtered_components(same, 0.2, 0.1, 0.1).m == 2);
  CHECK(filtered_components(same, 0.9, 0.1, 0.1).m == 0);
  // the right group has no sample above 0.5
  const SampleLevelFamily lopsided(data, {1.0, 0.2, 0.4, 0.4}, 0.05, Norm::euclidean);
  const auto fc = filtered_components(lopsided, 0.2, 0.15, 0.1);
  CHECK(fc.m == 1);
  CHECK(fc.components[0] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("parameter validation and the cap") {
  const Dataset data({0.0}, 1);
  const SampleLevelFamily fam(data, {1.0}, 0.1, Norm::euclidean);
  CHECK_THROWS_AS(run_generic(fam, {.tau = 0.0, .eps = 0.1, .rho0 = 0.0}), ConfigError);
  CHECK_THROWS_AS(run_generic(fam, {.tau = 0.1, .eps = -1.0, .rho0 = 0.0}), ConfigError);
  CHECK_THROWS_AS(run_generic(fam, {.tau = 0.1, .eps = 0.1, .rho0 = -0.5}), ConfigError);
  const StuckFamily stuck(data);
  try {
    run_generic(stuck, {.tau = 0.1, .eps = 0.1, .rho0 = 0.0});
    FAIL("expected SplitterError");
  } catch (const SplitterError& e) {
    CHECK_FALSE(e.trace().empty());
  }
}
