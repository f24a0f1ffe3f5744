#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kdesplit/density.hpp"
#include "kdesplit/error.hpp"
#include "kdesplit/harness.hpp"
#include "kdesplit/level_family.hpp"
#include "kdesplit/sandwich.hpp"
#include "kdesplit/synthetic.hpp"

using namespace kdesplit;

namespace {

Dataset uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(n * d);
  for (auto& v : c) v = u(rng);
  return Dataset(std::move(c), d);
}

// union of a few random disks in the unit square
std::function<bool(std::span<const double>)> random_blob(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::array<double, 3>> disks;
  for (int k = 0; k < 4; ++k) disks.push_back({0.2 + 0.6 * u(rng), 0.2 + 0.6 * u(rng), 0.05 + 0.15 * u(rng)});
  return [disks](std::span<const double> x) {
    for (const auto& d : disks)
      if (std::hypot(x[0] - d[0], x[1] - d[1]) <= d[2]) return true;
    return false;
  };
}

bool subset(const GridSet& a, const GridSet& b) { return a.subset_of(b); }

}  // namespace

TEST_CASE("level family") {
  const Dataset data = uniform_points(300, 2, 1);
  const Kernel k = make_kernel(Profile::epanechnikov, 2, Norm::euclidean);
  const auto fam = SampleLevelFamily::from_kde(data, k, 0.15, 0.15);
  CHECK(fam.active(0.0).size() == 300);
  CHECK(fam.active(std::nextafter(fam.max_level(), 1e300)).empty());
  const auto a1 = fam.active(0.1 * fam.max_level()), a2 = fam.active(0.5 * fam.max_level()),
             a3 = fam.active(0.9 * fam.max_level());
  CHECK(std::includes(a1.begin(), a1.end(), a2.begin(), a2.end()));
  CHECK(std::includes(a2.begin(), a2.end(), a3.begin(), a3.end()));
  CHECK(a3.size() < a1.size());
  const double rho = 0.5 * fam.max_level();
  for (std::size_t i : a2) CHECK(fam.contains(rho, data.point(i)));
  CHECK(fam.at(rho).active == a2);
  CHECK(fam.at(rho).sigma == 0.15);
}

TEST_CASE("contains uses closed balls") {
  const Dataset data({0.0, 1.0}, 1);
  const SampleLevelFamily fam(data, {2.0, 1.0}, 0.1, Norm::euclidean);
  const std::vector<double> at_sample{0.0}, on_sphere{0.1}, outside{0.1000001}, other{1.05};
  CHECK(fam.contains(1.5, at_sample));
  CHECK(fam.contains(1.5, on_sphere));
  CHECK_FALSE(fam.contains(1.5, outside));
  CHECK_FALSE(fam.contains(1.5, other));
  CHECK(fam.contains(1.0, other));
  CHECK_FALSE(fam.contains(3.0, at_sample));
}

TEST_CASE("dilation and erosion geometry") {
  const GridSpec line({-1.0}, {2.0}, 0.01);
  const GridSet unit = GridSet::from_predicate(line, [](auto x) { return x[0] >= 0.0 && x[0] <= 1.0; });
  const GridSet big = dilate(unit, 0.2, Norm::euclidean);
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < line.size(); ++i)
    if (big.at(i)) {
      lo = std::min(lo, line.center(i)[0]);
      hi = std::max(hi, line.center(i)[0]);
    }
  CHECK(std::abs(lo + 0.2) <= 0.01);
  CHECK(std::abs(hi - 1.2) <= 0.01);

  const GridSpec sq({-1.5, -1.5}, {1.5, 1.5}, 0.01);
  const GridSet disc = GridSet::from_predicate(sq, [](auto x) { return std::hypot(x[0], x[1]) <= 1.0; });
  const GridSet inner = erode(disc, 0.2, Norm::euclidean);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const auto c = sq.center(i);
    const double r = std::hypot(c[0], c[1]);
    if (inner.at(i) && r > 0.8 + 0.01) ++bad;
    if (!inner.at(i) && r < 0.8 - 0.01) ++bad;
  }
  CHECK(bad == 0);

  CHECK_THROWS_AS(dilate(disc, 0.005, Norm::euclidean), ConfigError);

  // supremum norm: the square grows by delta on each side
  const GridSet box = GridSet::from_predicate(sq, [](auto x) { return std::abs(x[0]) <= 0.5 && std::abs(x[1]) <= 0.5; });
  const GridSet grown = dilate(box, 0.3, Norm::supremum);
  const GridSet expect =
      GridSet::from_predicate(sq, [](auto x) { return std::abs(x[0]) <= 0.8 + 0.01 && std::abs(x[1]) <= 0.8 + 0.01; });
  const GridSet core =
      GridSet::from_predicate(sq, [](auto x) { return std::abs(x[0]) <= 0.8 - 0.01 && std::abs(x[1]) <= 0.8 - 0.01; });
  CHECK(grown.subset_of(expect));
  CHECK(core.subset_of(grown));
}

TEST_CASE("morphology identities on random blobs") {
  const GridSpec g({0.0, 0.0}, {1.0, 1.0}, 0.005);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const GridSet a = GridSet::from_predicate(g, random_blob(s));
    for (Norm norm : {Norm::euclidean, Norm::supremum}) {
      for (double delta : {0.02, 0.05}) {
        CHECK(erode(a, delta, norm).mask() == dilate(a.complement(), delta, norm).complement().mask());
        CHECK(subset(dilate(erode(a, delta, norm), delta, norm), a));
        CHECK(subset(a, erode(dilate(a, delta, norm), delta, norm)));
        const double psi = psi_star(a, delta, norm);
        CHECK(psi >= delta - g.spacing());
      }
    }
  }
}

TEST_CASE("psi star") {
  const GridSpec sq({-1.2, -1.2}, {1.2, 1.2}, 0.01);
  const GridSet ball = GridSet::from_predicate(sq, [](auto x) { return std::hypot(x[0], x[1]) <= 1.0; });
  CHECK(psi_star(ball, 0.2, Norm::euclidean) == doctest::Approx(0.2).epsilon(0.01 / 0.2));
  CHECK(std::abs(psi_star(ball, 0.2, Norm::euclidean) - 0.2) <= 0.01);
  const GridSet small = GridSet::from_predicate(sq, [](auto x) { return std::hypot(x[0], x[1]) <= 0.1; });
  CHECK(psi_star(small, 0.2, Norm::euclidean) == std::numeric_limits<double>::infinity());
}

TEST_CASE("symmetric difference") {
  const GridSpec line({0.0}, {3.0}, 0.01);
  const GridSet a = GridSet::from_predicate(line, [](auto x) { return x[0] <= 1.0; });
  const GridSet b = GridSet::from_predicate(line, [](auto x) { return x[0] >= 2.0; });
  CHECK(symdiff_measure(a, a) == 0.0);
  CHECK(symdiff_measure(a, b) == doctest::Approx(2.0).epsilon(0.01));

  const GridSpec fine({0.0, 0.0}, {1.0, 1.0}, 0.001);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto fa = random_blob(10 + s), fb = random_blob(20 + s);
    const double grid = symdiff_measure(GridSet::from_predicate(fine, fa), GridSet::from_predicate(fine, fb));
    const auto mc = symdiff_measure_mc(fa, fb, {0.0, 0.0}, {1.0, 1.0}, 100000, 77 + s);
    CHECK(std::abs(grid - mc.value) <= 3.0 * mc.std_error);
    CHECK(mc.samples == 100000);
  }
}

TEST_CASE("grid components and export") {
  const GridSpec line({0.0}, {1.0}, 0.1);
  const GridSet s = GridSet::from_predicate(line, [](auto x) { return x[0] < 0.3 || x[0] > 0.6; });
  const auto comps = grid_components(s);
  CHECK(comps.count == 2);
  CHECK(comps.component(line, 1).count() == 4);
  const auto j = grid_set_json(s);
  CHECK(j["count"] == 7);
  CHECK(j["counts"][0] == 10);
  // nodes 0,1,2 and 6..9: bits 0b11000111 then 0b11
  CHECK(j["mask"] == base64_encode({0xC7, 0x03}));
  CHECK(base64_encode({'M', 'a', 'n'}) == "TWFu");
  CHECK(base64_encode({'M'}) == "TQ==");
}

TEST_CASE("sandwich blur term") {
  const Kernel e = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  CHECK(sandwich_blur(e, 0.1, 0.1, 3.0, 2.0) == 0.0);
  CHECK(sandwich_blur(e, 0.1, 0.2, 0.0, 2.0) == 0.0);
  const Kernel g = make_kernel(Profile::gaussian, 1, Norm::euclidean);
  const double delta = 0.05, sigma = 0.3, rho = 1.0, h = 2.0;
  const double r = sigma / delta;
  const double expect = std::min(std::max(rho * g.kappa1(r), g.kappa_inf(r) / delta), h * g.kappa1(r));
  CHECK(sandwich_blur(g, delta, sigma, rho, h) == doctest::Approx(expect));
}

TEST_CASE("stamped balls") {
  const Dataset data({0.2, 0.7}, 1);
  const GridSpec line({0.0}, {1.0}, 0.01);
  const GridSet s = stamp_balls(data, {1}, 0.1, Norm::euclidean, line);
  const GridSet expect = GridSet::from_predicate(line, [](auto x) { return std::abs(x[0] - 0.7) <= 0.1; });
  CHECK(s.mask() == expect.mask());
}

TEST_CASE("sandwich holds on the plateau instance") {
  const auto truth = make_two_plateaus();
  const Kernel k = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  const double delta = 0.025;
  const ProbeGrid probes = default_probe_grid(*truth, delta);
  const auto ref = smoothed_on_grid(*truth, k, delta, probes);
  const GridSpec grid = sandwich_grid(*truth, delta, delta);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Dataset data = truth->sample(8192, seed);
    const double eps = sup_distance(data, k, delta, probes, ref).value;
    const auto scores = kde_at_samples(data, k, delta);
    for (double frac : {0.0, 0.3, 0.7}) {
      const auto rep = check_sandwich(data, scores, *truth, k, delta, delta, frac * truth->h_sup(), eps, grid);
      CHECK(rep.interior_ok());
      CHECK(rep.blur == 0.0);
    }
  }
}
