#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "idid/simulate.hpp"
#include "idid/stats.hpp"
#include "oracle.hpp"

using namespace idid;

TEST_CASE("confounder sampler is symmetric around zero") {
  Rng rng(1);
  const int n = 100000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    if (sample_bridge(rng) <= 0.0) ++below;
  }
  CHECK(std::abs(static_cast<double>(below) / n - 0.5) < 0.005);
}

TEST_CASE("confounder variance matches the integrated second moment" *
          doctest::timeout(300)) {
  // Reference value by quadrature of u^2 p(u), independent of the sampler.
  const double second_moment = testing::simpson(
      [](double u) { return u * u / (2.0 * M_PI * std::cosh(u / 2.0)); }, -60.0, 60.0,
      6000);
  CHECK(second_moment == doctest::Approx(M_PI * M_PI).epsilon(1e-6));

  Rng rng(2);
  const int n = 1000000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = sample_bridge(rng);
  const double var = sample_variance(draws);
  CHECK(std::abs(var - second_moment) / second_moment < 0.02);
}

TEST_CASE("confounder draws pass a distribution check" * doctest::timeout(300)) {
  // First validate the closed CDF against the density by integration.
  for (double u : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
    const double integrated = testing::simpson(
        [](double v) { return 1.0 / (2.0 * M_PI * std::cosh(v / 2.0)); }, -60.0, u,
        4000);
    CHECK(bridge_cdf(u) == doctest::Approx(integrated).epsilon(1e-6));
  }

  Rng rng(3);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = sample_bridge(rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = bridge_cdf(draws[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
  }
  const double critical_1pct = 1.62762 / std::sqrt(static_cast<double>(n));
  CHECK(ks < critical_1pct);
}

TEST_CASE("cross-section marginals" * doctest::timeout(300)) {
  Scenario scenario;
  scenario.n = 100000;
  scenario.seed = 4;
  const auto sim = simulate_cross_section(scenario);

  SUBCASE("time assignment is a fair coin") {
    const double mean_t = sim.data.t().cast<double>().mean();
    CHECK(std::abs(mean_t - 0.5) < 0.005);
    const double mean_z = sim.data.z().cast<double>().mean();
    CHECK(std::abs(mean_z - 0.5) < 0.005);
  }

  SUBCASE("the second period pays more on average") {
    double y1 = 0.0, y0 = 0.0;
    int n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < sim.data.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      if (sim.data.t()[idx] == 1) {
        y1 += sim.data.y()[idx];
        ++n1;
      } else {
        y0 += sim.data.y()[idx];
        ++n0;
      }
    }
    CHECK(y1 / n1 > y0 / n0);
  }

  SUBCASE("the instrument shifts the first-period log odds by its coefficient") {
    const auto coef = scenario_coefficients(ScenarioName::main);
    for (double x1 : {-1.0, 0.0, 2.0}) {
      for (double u : {-2.0, 0.0, 1.0}) {
        const double p1 = treat_prob(coef, 0, 1, x1, 0.0, u);
        const double p0 = treat_prob(coef, 0, 0, x1, 0.0, u);
        const double log_odds_diff =
            std::log(p1 / (1.0 - p1)) - std::log(p0 / (1.0 - p0));
        CHECK(log_odds_diff == doctest::Approx(-7.0).epsilon(1e-9));
      }
    }
  }

  SUBCASE("observed treatment rates match brute-force structural draws") {
    // Marginal Pr(A=1 | T=t, Z=z), brute-forced with test-side sampling.
    std::mt19937_64 engine(55);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const auto models = testing::oracle_treatment_models(ScenarioName::main);
    std::array<double, 4> brute{};
    const int draws = 1000000;
    for (int t = 0; t < 2; ++t) {
      for (int z = 0; z < 2; ++z) {
        const auto& m = models[static_cast<std::size_t>(t)];
        double acc = 0.0;
        for (int k = 0; k < draws; ++k) {
          const double x = normal(engine);
          const double u = 2.0 * std::log(std::tan(M_PI * uniform(engine) / 2.0));
          acc += 1.0 / (1.0 + std::exp(-(m.b0 + m.bz * z + m.bu * u + m.bx * x)));
        }
        brute[static_cast<std::size_t>(2 * t + z)] = acc / draws;
      }
    }
    for (int t = 0; t < 2; ++t) {
      for (int z = 0; z < 2; ++z) {
        double hits = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < sim.data.size(); ++i) {
          const auto idx = static_cast<Eigen::Index>(i);
          if (sim.data.t()[idx] == t && sim.data.z()[idx] == z) {
            hits += sim.data.a()[idx];
            ++count;
          }
        }
        const double observed = hits / count;
        const double expected = brute[static_cast<std::size_t>(2 * t + z)];
        const double se = std::sqrt(expected * (1.0 - expected) / count);
        CHECK(std::abs(observed - expected) <= 3.0 * se + 0.002);
      }
    }
  }
}

TEST_CASE("panel marginals line up with the cross-section" * doctest::timeout(300)) {
  Scenario scenario;
  scenario.n = 100000;
  scenario.seed = 5;
  const auto panel = simulate_panel(scenario);
  Scenario cs_scenario = scenario;
  cs_scenario.seed = 6;
  const auto cross = simulate_cross_section(cs_scenario);

  // Cross-section cell means of A by period.
  std::array<double, 2> cs_mean{};
  std::array<int, 2> cs_count{};
  for (std::size_t i = 0; i < cross.data.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    cs_mean[static_cast<std::size_t>(cross.data.t()[idx])] += cross.data.a()[idx];
    ++cs_count[static_cast<std::size_t>(cross.data.t()[idx])];
  }
  for (int t = 0; t < 2; ++t) cs_mean[static_cast<std::size_t>(t)] /= cs_count[static_cast<std::size_t>(t)];

  const double panel_a0 = panel.data.a0().cast<double>().mean();
  const double panel_a1 = panel.data.a1().cast<double>().mean();
  const double se = 3.0 / std::sqrt(static_cast<double>(scenario.n)) + 0.003;
  CHECK(std::abs(panel_a0 - cs_mean[0]) < se);
  CHECK(std::abs(panel_a1 - cs_mean[1]) < se);

  SUBCASE("outcome trend matches a brute-force draw of the period means") {
    std::mt19937_64 engine(66);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const auto models = testing::oracle_treatment_models(ScenarioName::main);
    double acc = 0.0;
    const int draws = 400000;
    for (int k = 0; k < draws; ++k) {
      const double x1 = normal(engine);
      const double x2 = normal(engine);
      const int z = uniform(engine) < 0.5 ? 1 : 0;
      const double u0 = 2.0 * std::log(std::tan(M_PI * uniform(engine) / 2.0));
      const double u1 = 2.0 * std::log(std::tan(M_PI * uniform(engine) / 2.0));
      const auto& m0 = models[0];
      const auto& m1 = models[1];
      const int a0 =
          uniform(engine) <
                  1.0 / (1.0 + std::exp(-(m0.b0 + m0.bz * z + m0.bu * u0 + m0.bx * x1)))
              ? 1
              : 0;
      const int a1 =
          uniform(engine) <
                  1.0 / (1.0 + std::exp(-(m1.b0 + m1.bz * z + m1.bu * u1 + m1.bx * x2)))
              ? 1
              : 0;
      acc += testing::oracle_outcome_mean(1, a1, z, x1, x2, u1) -
             testing::oracle_outcome_mean(0, a0, z, x1, x2, u0);
    }
    const double brute_trend = acc / draws;
    std::vector<double> trend(panel.data.size());
    for (std::size_t i = 0; i < panel.data.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      trend[i] = panel.data.y1()[idx] - panel.data.y0()[idx];
    }
    const double observed = mean(trend);
    const double obs_se = std::sqrt(sample_variance(trend) / trend.size());
    CHECK(std::abs(observed - brute_trend) <= 3.0 * obs_se + 0.1);
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  Scenario scenario;
  scenario.n = 500;
  scenario.seed = 77;
  const auto first = simulate_cross_section(scenario);
  const auto second = simulate_cross_section(scenario);
  CHECK((first.data.x() - second.data.x()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(first.data.a() == second.data.a());
  CHECK((first.data.y() - second.data.y()).cwiseAbs().maxCoeff() == 0.0);
  scenario.panel = true;
  const auto p1 = simulate_panel(scenario);
  const auto p2 = simulate_panel(scenario);
  CHECK((p1.data.y1() - p2.data.y1()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p1.data.a0() == p2.data.a0());
}

TEST_CASE("known effect values and decisions") {
  CHECK(true_cate(1.0, 1.0) == doctest::Approx(30.0));
  CHECK(true_cate(0.0, 0.0) == doctest::Approx(-5.0));
  const LinearPolicy opt = true_optimal_policy();
  Eigen::VectorXd x(3);
  x << 1.0, 1.0, 1.0;
  CHECK(opt.decide(x) == 1);
  x << 1.0, 0.0, 0.0;
  CHECK(opt.decide(x) == 0);
}

TEST_CASE("agreement scoring against the optimal rule" * doctest::timeout(300)) {
  Scenario scenario;
  scenario.n = 1000000;
  scenario.seed = 91;
  const auto sim = simulate_cross_section(scenario);

  const LinearPolicy opt = true_optimal_policy();
  CHECK(pcd(opt, sim.data) == 1.0);
  const LinearPolicy flipped(Eigen::VectorXd(-opt.eta()));
  CHECK(pcd(flipped, sim.data) == 0.0);

  Eigen::VectorXd treat_all_eta(3);
  treat_all_eta << 1.0, 0.0, 0.0;
  const LinearPolicy treat_all(treat_all_eta);
  // Pr(3 X1 + 4 X2 - 1 > 0) for standard normal covariates.
  const double expected = 0.5 * std::erfc(0.2 / std::sqrt(2.0));
  CHECK(expected == doctest::Approx(0.42074).epsilon(1e-4));
  CHECK(std::abs(pcd(treat_all, sim.data) - expected) < 0.002);
}

TEST_CASE("scenario names parse and list") {
  CHECK(parse_scenario("main") == ScenarioName::main);
  CHECK(parse_scenario("weak_iv") == ScenarioName::weak_iv);
  CHECK(parse_scenario("strong_iv") == ScenarioName::strong_iv);
  CHECK(!parse_scenario("bogus").has_value());
  CHECK(scenario_names().size() == 3);
}
