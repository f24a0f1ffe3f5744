#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "kdesplit/density.hpp"
#include "kdesplit/error.hpp"
#include "kdesplit/stats.hpp"
#include "kdesplit/synthetic.hpp"

using namespace kdesplit;

namespace {

Dataset uniform_points(std::size_t n, std::size_t d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> c(n * d);
  for (auto& v : c) v = u(rng);
  return Dataset(std::move(c), d);
}

// direct sum written out independently of the library
double naive_kde(const Dataset& data, const Kernel& k, double delta, std::span<const double> q) {
  double s = 0.0;
  std::vector<double> z(data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t a = 0; a < data.dim(); ++a) z[a] = (q[a] - data.point(i)[a]) / delta;
    s += k(z);
  }
  return s / (static_cast<double>(data.size()) * std::pow(delta, static_cast<double>(data.dim())));
}

}  // namespace

TEST_CASE("kde hand examples") {
  const Kernel rect = make_kernel(Profile::rectangular, 1, Norm::euclidean);
  const std::vector<double> zero{0.0};
  CHECK(kde_eval(Dataset({0.0}, 1), rect, 1.0, zero) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kde_eval(Dataset({-1.0, 1.0}, 1), rect, 0.5, zero) == 0.0);
  const Kernel g = make_kernel(Profile::gaussian, 1, Norm::euclidean);
  const double c = g.normalizer();
  CHECK(kde_eval(Dataset({0.0, 0.2}, 1), g, 0.1, zero) ==
        doctest::Approx(0.5 * (10.0 * c + 10.0 * c * std::exp(-4.0))).epsilon(1e-14));
}

TEST_CASE("kde at samples") {
  const Kernel e = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  const auto one = kde_at_samples(Dataset({0.3}, 1), e, 0.2);
  CHECK(one[0] == doctest::Approx(e.sup() / 0.2).epsilon(1e-15));

  const Kernel q2 = make_kernel(Profile::quartic, 2, Norm::euclidean);
  const Dataset far({0.0, 0.0, 5.0, 5.0}, 2);
  for (double v : kde_at_samples(far, q2, 0.1)) CHECK(v == doctest::Approx(q2.sup() / (2.0 * 0.01)).epsilon(1e-14));
}

TEST_CASE("accelerated path equals reference path") {
  for (Profile p : {Profile::rectangular, Profile::epanechnikov, Profile::triweight, Profile::tricube}) {
    for (std::size_t d = 1; d <= 3; ++d) {
      for (Norm norm : {Norm::euclidean, Norm::supremum}) {
        const Kernel k = make_kernel(p, static_cast<int>(d), norm);
        const Dataset data = uniform_points(500, d, 17 + d);
        const auto ref = kde_at_samples(data, k, 0.08, KdePath::reference);
        const auto acc = kde_at_samples(data, k, 0.08, KdePath::accelerated);
        if (p == Profile::rectangular || d > 1) {
          CHECK(ref == acc);
        } else {
          for (std::size_t i = 0; i < ref.size(); ++i) CHECK(acc[i] == doctest::Approx(ref[i]).epsilon(1e-13));
        }
        for (std::size_t i = 0; i < 500; i += 97)
          CHECK(ref[i] == doctest::Approx(naive_kde(data, k, 0.08, data.point(i))).epsilon(1e-12));
      }
    }
  }
  for (Profile p : {Profile::gaussian, Profile::laplacian}) {
    const Kernel k = make_kernel(p, 2, Norm::euclidean);
    const Dataset data = uniform_points(500, 2, 5);
    const auto ref = kde_at_samples(data, k, 0.05, KdePath::reference);
    const auto acc = kde_at_samples(data, k, 0.05, KdePath::accelerated);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(acc[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("kde bounds, mass and invariances") {
  const Dataset data = uniform_points(200, 2, 9);
  for (Profile p : {Profile::epanechnikov, Profile::gaussian}) {
    const Kernel k = make_kernel(p, 2, Norm::euclidean);
    const double delta = 0.1;
    const std::vector<double> lo{-1.0, -1.0}, hi{2.0, 2.0};
    const double m =
        oracle::integrate_box([&](std::span<const double> x) { return kde_eval(data, k, delta, x); }, lo, hi, 300);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-3));
    for (std::size_t i = 0; i < 50; ++i) {
      const double v = kde_eval(data, k, delta, data.point(i));
      CHECK(v >= 0.0);
      CHECK(v <= k.sup() / (delta * delta));
    }
  }
  const Kernel e1 = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  const Dataset line({0.1, 0.35, 0.4, 0.9}, 1);
  const Dataset shifted({3.1, 3.35, 3.4, 3.9}, 1);
  for (double q : {0.0, 0.3, 0.37, 0.8}) {
    const std::vector<double> a{q}, b{q + 3.0};
    CHECK(kde_eval(line, e1, 0.2, a) == doctest::Approx(kde_eval(shifted, e1, 0.2, b)).epsilon(1e-12));
  }
  const Dataset single({0.7}, 1);
  const std::vector<double> at{0.7};
  CHECK(kde_eval(single, e1, 0.4, at) == doctest::Approx(0.5 * kde_eval(single, e1, 0.2, at)).epsilon(1e-15));
}

TEST_CASE("smoothed density") {
  const auto uniform = make_unimodal_interval(0.5, 0.5);
  const Kernel rect = make_kernel(Profile::rectangular, 1, Norm::euclidean);
  const std::vector<double> mid{0.5}, edge{0.0};
  CHECK(smoothed_density(*uniform, rect, 0.1, mid) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(smoothed_density(*uniform, rect, 0.1, edge) == doctest::Approx(0.5).epsilon(1e-4));

  // bounded by the density sup; compared against a Simpson convolution
  const auto valley = make_bimodal_valley();
  const Kernel g = make_kernel(Profile::gaussian, 1, Norm::euclidean);
  for (double x : {0.05, 0.3, 0.5, 0.77}) {
    const std::vector<double> q{x};
    const double v = smoothed_density(*valley, g, 0.05, q);
    CHECK(v <= valley->h_sup() + 1e-9);
    const double ref = oracle::simpson(
        [&](double y) {
          const std::vector<double> z{(x - y) / 0.05}, yy{y};
          return g(z) * valley->density(yy) / 0.05;
        },
        0.0, 1.0, 200000);
    CHECK(v == doctest::Approx(ref).epsilon(2e-4));
  }

  const auto balls = make_two_balls(2);
  const Kernel e2 = make_kernel(Profile::epanechnikov, 2, Norm::euclidean);
  for (double x : {0.2, 0.35}) {
    const std::vector<double> q{x, 0.5};
    const double v = smoothed_density(*balls, e2, 0.1, q);
    CHECK(v <= balls->h_sup() + 1e-9);
    const std::vector<double> lo{x - 0.1, 0.4}, hi{x + 0.1, 0.6};
    const double ref = oracle::integrate_box(
        [&](std::span<const double> y) {
          const std::vector<double> z{(x - y[0]) / 0.1, (0.5 - y[1]) / 0.1};
          return e2(z) * balls->density(y) / 0.01;
        },
        lo, hi, 1500);
    CHECK(v == doctest::Approx(ref).epsilon(2e-3));
  }
}

TEST_CASE("sup distance") {
  const auto uniform = make_unimodal_interval(0.5, 0.5);
  const Kernel rect = make_kernel(Profile::rectangular, 1, Norm::euclidean);
  const Dataset quantiles({0.1, 0.3, 0.5, 0.7, 0.9}, 1);
  const ProbeGrid three({0.0}, {1.0}, 0.5);
  REQUIRE(three.size() == 3);
  // kde 0.4, 1.2, 0.4 against smoothed 0.5, 1.0, 0.5
  const SupDistance s = sup_distance(quantiles, *uniform, rect, 0.25, three);
  CHECK(s.value == doctest::Approx(0.2).epsilon(1e-4));
  CHECK(s.argmax[0] == 0.5);

  const Dataset data = uniform_points(300, 1, 4);
  const ProbeGrid grid({0.0}, {1.0}, 0.01);
  const auto self = kde_at_points(data, rect, 0.1, grid.points());
  CHECK(sup_distance(data, rect, 0.1, grid, self).value == 0.0);
}

TEST_CASE("sup distance shrinks with n") {
  const auto valley = make_bimodal_valley();
  const Kernel k = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  const double delta = 0.05;
  const ProbeGrid grid = default_probe_grid(*valley, delta);
  const auto ref = smoothed_on_grid(*valley, k, delta, grid);
  std::vector<double> medians;
  for (std::size_t n : {256u, 2048u, 16384u}) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 15; ++s) v.push_back(sup_distance(valley->sample(n, 100 + s), k, delta, grid, ref).value);
    medians.push_back(median(v));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("probe grid") {
  const ProbeGrid g({0.0, 0.0}, {1.0, 0.5}, 0.3);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.counts() == std::vector<std::size_t>{5, 3});
  CHECK(g.point(14) == std::vector<double>{1.0, 0.5});
  CHECK_THROWS_AS(ProbeGrid({0.0}, {1.0}, 0.0), ConfigError);
}
