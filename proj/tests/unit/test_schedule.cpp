#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdesplit/error.hpp"
#include "kdesplit/schedule.hpp"
#include "kdesplit/synthetic.hpp"

using namespace kdesplit;

namespace {

const Kernel epan1 = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
const Kernel gauss1 = make_kernel(Profile::gaussian, 1, Norm::euclidean);
const Kernel gauss2 = make_kernel(Profile::gaussian, 2, Norm::euclidean);

// values below were computed with 30-digit arithmetic outside this code base
constexpr double kEpsExample = 0.071501688133341859656;
constexpr double kSigma005 = 0.44872059274064819626;
constexpr double kLogLogLog1e7 = 1.0224302779581430305;
constexpr double kInLower = 0.0097598642302183818612;
constexpr double kInUpper = 0.61712031991277061664;
constexpr double kTailD1 = 2.8977350604231644148;
constexpr double kTailD2 = 27.922743659694731009;

}  // namespace

TEST_CASE("sigma schedule") {
  CHECK(sigma_schedule(0.1, epan1) == 0.1);
  CHECK(sigma_schedule(std::exp(-1.0), gauss1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(sigma_schedule(0.05, gauss1) == doctest::Approx(kSigma005).epsilon(1e-12));
  CHECK_THROWS_AS(sigma_schedule(0.5, gauss1), ConfigError);
  CHECK_THROWS_AS(sigma_schedule(0.0, epan1), ConfigError);
  for (double d = 1e-4; d <= std::exp(-1.0); d *= 1.3) {
    CHECK(sigma_schedule(d, gauss1) >= d);
    CHECK(sigma_schedule(d, epan1) >= d);
  }
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_schedule(0.1, 1e4, 1.0, 1.0, 1.0, epan1) == doctest::Approx(kEpsExample).epsilon(1e-12));
  const auto t1 = epsilon_terms(0.1, 1e4, 1.0, 1.0, 1.0, epan1);
  const auto t2 = epsilon_terms(0.1, 1e4, 1.0, 1.0, 2.0, epan1);
  CHECK(t2.stochastic == doctest::Approx(2.0 * t1.stochastic).epsilon(1e-15));
  CHECK(t1.tail == 0.0);

  const double e = std::exp(-1.0);
  CHECK(epsilon_terms(e, 1e4, 1.0, 1.0, 1.0, gauss1).tail == doctest::Approx(kTailD1).epsilon(1e-10));
  CHECK(epsilon_terms(e, 1e4, 1.0, 1.0, 1.0, gauss2).tail == doctest::Approx(kTailD2).epsilon(1e-10));

  double prev = 1e300;
  for (double n = 16; n < 1e9; n *= 3) {
    const double v = epsilon_schedule(0.05, n, 2.0, 10.0, 1.0, epan1);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(epsilon_schedule(0.05, 1e4, 2.0, 10.0, 1.0, epan1) > epsilon_schedule(0.05, 1e4, 1.0, 10.0, 1.0, epan1));
  CHECK(epsilon_schedule(0.05, 1e4, 1.0, 11.0, 1.0, epan1) > epsilon_schedule(0.05, 1e4, 1.0, 10.0, 1.0, epan1));
  CHECK_THROWS_AS(epsilon_schedule(0.05, 10.0, 1.0, 1.0, 1.0, epan1), ConfigError);
  CHECK_THROWS_AS(epsilon_schedule(0.05, 1e4, 0.5, 1.0, 1.0, epan1), ConfigError);
}

TEST_CASE("tau schedules") {
  CHECK(tau_fixed(0.1, 1.0, 1.0, 0.1) == doctest::Approx(0.66).epsilon(1e-14));
  CHECK(tau_fixed(0.1, 1.0, 1.0, 0.1) > thickness_envelope(0.2, 1.0, 1.0));
  CHECK(tau_fixed(0.3, 1.0, 1.0) == doctest::Approx(3.0 * tau_fixed(0.1, 1.0, 1.0)).epsilon(1e-14));
  CHECK(tau_adaptive(0.1, 1.0, 1e7) == doctest::Approx(0.1 * kLogLogLog1e7).epsilon(1e-12));
  CHECK(kTauAdaptiveMinN == std::ceil(std::exp(std::exp(std::numbers::e))));
  CHECK_THROWS_AS(tau_adaptive(0.1, 1.0, 1e6), ConfigError);
  CHECK_NOTHROW(tau_adaptive(0.1, 1.0, kTauAdaptiveMinN));
  // the threshold is where logloglog n reaches one; it is positive from e^e on
  CHECK(std::log(std::log(std::log(kTauAdaptiveMinN))) >= 1.0);
  CHECK(std::log(std::log(std::log(kTauAdaptiveMinN - 1.0))) < 1.0);
}

TEST_CASE("bandwidth grid") {
  const BandwidthGrid g = bandwidth_grid(1e6, 2);
  CHECK(g.lower == doctest::Approx(kInLower).epsilon(1e-12));
  CHECK(g.upper == doctest::Approx(kInUpper).epsilon(1e-12));
  CHECK(g.spacing == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(g.deltas.front() == g.lower);
  CHECK(g.deltas.back() <= std::exp(-1.0));
  CHECK(g.deltas.back() + g.spacing > std::exp(-1.0));
  CHECK(g.deltas.size() == static_cast<std::size_t>(std::floor((std::exp(-1.0) - kInLower) / 0.001)) + 1);
  for (double n : {16.0, 1e3, 1e6}) {
    const BandwidthGrid b = bandwidth_grid(n, 1);
    CHECK(static_cast<double>(b.deltas.size()) <= n);
    for (double d : b.deltas) {
      CHECK(d <= std::exp(-1.0));
      CHECK(d >= b.lower);
      CHECK(d <= b.upper);
    }
  }
  CHECK_THROWS_AS(bandwidth_grid(10.0, 1), ConfigError);
}

TEST_CASE("delta lemma on a fine grid") {
  for (int d = 1; d <= 3; ++d) {
    for (int i = 1; i <= 1000; ++i) {
      const double delta = std::exp(-1.0) * static_cast<double>(i) / 1000.0;
      const double l = std::abs(std::log(delta));
      CHECK(std::pow(delta, l) * std::pow(l, 2 * d - 2) <= std::pow(delta, l - d) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("parameter warnings") {
  ParameterSet p;
  p.delta = 0.1;
  p.sigma = 0.1;
  p.eps = 0.05;
  p.rho0 = 0.05;
  p.tau = tau_fixed(0.1, 1.0, 1.0);
  CHECK(parameter_warnings(p, 1.0, 1.0).empty());
  CHECK(parameter_warnings(p, 1.0, 1.0, 0.1).size() == 1);
  p.sigma = 0.05;
  p.rho0 = 0.01;
  p.tau = 0.1;
  CHECK(parameter_warnings(p, 1.0, 1.0).size() == 3);
}

TEST_CASE("adaptive parameters") {
  AdaptiveOptions o;
  const ParameterSet p = adaptive_parameters(0.05, 4096, 10, epan1, o);
  CHECK(p.sigma == 0.05);
  CHECK(p.varsigma == doctest::Approx(std::log(4096.0)));
  CHECK(p.eps == epsilon_schedule(0.05, 4096, std::log(4096.0), 10, 1.0, epan1));
  CHECK(p.rho0 == p.eps);
  CHECK(p.tau == doctest::Approx(2.0 * 3.0 * 0.1).epsilon(1e-14));
  o.tau_mode = TauMode::adaptive;
  CHECK_THROWS_AS(adaptive_parameters(0.05, 4096, 10, epan1, o), ConfigError);
}

TEST_CASE("adaptive selection") {
  const auto truth = make_two_plateaus();
  const Dataset data = truth->sample(2048, 5);
  const std::vector<double> grid{0.08, 0.02, 0.04};
  const AdaptiveResult r = adaptive_select(data, epan1, grid, {});
  REQUIRE(r.per_delta.size() == 3);
  CHECK(r.per_delta[0].params.delta == 0.02);
  double best = 1e300;
  for (const auto& run : r.per_delta)
    if (run.output) best = std::min(best, run.output->rho_out);
  CHECK(r.rho_star == best);
  CHECK(r.per_delta[r.selected].output->rho_out == r.rho_star);
  CHECK(r.delta_star == r.per_delta[r.selected].params.delta);
  for (std::size_t i = 0; i < r.selected; ++i)
    if (r.per_delta[i].output) CHECK(r.per_delta[i].output->rho_out > r.rho_star);

  // sixteen coincident points: every bandwidth returns its start level
  std::vector<double> dg{0.1, 0.2, 0.3};
  AdaptiveOptions o;
  o.varsigma = 1.0;
  const Dataset sixteen(std::vector<double>(16, 0.5), 1);
  const AdaptiveResult nosplit = adaptive_select(sixteen, epan1, dg, o);
  double min_eps = 1e300;
  for (const auto& run : nosplit.per_delta) {
    REQUIRE(run.output);
    CHECK_FALSE(run.output->split);
    min_eps = std::min(min_eps, run.params.eps);
  }
  CHECK(nosplit.rho_star == min_eps);
  CHECK(nosplit.delta_star == 0.3);
}

TEST_CASE("adaptive ties go to the smaller bandwidth") {
  // a repeated bandwidth returns the same level twice; the first copy wins
  const Dataset sixteen(std::vector<double>(16, 0.5), 1);
  AdaptiveOptions o;
  o.varsigma = 1.0;
  const std::vector<double> grid{0.3, 0.1, 0.3};
  const AdaptiveResult r = adaptive_select(sixteen, epan1, grid, o);
  CHECK(r.per_delta[1].output->rho_out == r.per_delta[2].output->rho_out);
  CHECK(r.selected == 1);
}

TEST_CASE("rate schedules") {
  const RateConstants c;
  const double n = 1 << 14;
  const double ln = std::log(n), lln = std::log(ln);
  const ParameterSet f = rates_schedule_finite(n, 1, 1.0, 1.0, c, epan1);
  CHECK(f.eps == doctest::Approx(std::cbrt(ln * ln * ln * lln / n)));
  CHECK(f.delta == doctest::Approx(std::cbrt(ln / n)));
  CHECK(f.sigma >= f.delta);
  CHECK(f.rho0 == f.eps);
  const ParameterSet inf = rates_schedule_infinite(n, 1, 1.0, c, epan1);
  CHECK(inf.eps == doctest::Approx(std::sqrt(ln * lln / n)));
  CHECK(inf.sigma == inf.delta);
  CHECK_THROWS_AS(rates_schedule_infinite(n, 1, 1.0, c, gauss1), ConfigError);
  // halving the rate exponent check: eps scales as n^{-1/3} up to logs
  const ParameterSet f2 = rates_schedule_finite(8 * n, 1, 1.0, 1.0, c, epan1);
  const double ln2 = std::log(8 * n);
  CHECK(f.eps / f2.eps == doctest::Approx(2.0 * std::cbrt(ln * ln * ln * lln / (ln2 * ln2 * ln2 * std::log(ln2)))));
}
