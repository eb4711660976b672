#include "idid/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "idid/regression.hpp"
#include "idid/scores.hpp"

namespace idid {

std::string to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::main: return "main";
    case ScenarioName::weak_iv: return "weak_iv";
    case ScenarioName::strong_iv: return "strong_iv";
  }
  return "unknown";
}

std::optional<ScenarioName> parse_scenario(const std::string& text) {
  if (text == "main") return ScenarioName::main;
  if (text == "weak_iv") return ScenarioName::weak_iv;
  if (text == "strong_iv") return ScenarioName::strong_iv;
  return std::nullopt;
}

std::vector<std::string> scenario_names() { return {"main", "weak_iv", "strong_iv"}; }

ScenarioCoefficients scenario_coefficients(ScenarioName name) {
  switch (name) {
    case ScenarioName::main:
      return {{2.0, -7.0, 0.2, 2.0, 0}, {-1.5, 5.0, -0.15, 1.5, 1}};
    case ScenarioName::weak_iv:
      return {{1.5, -3.0, 0.2, 2.0, 0}, {-1.5, 2.0, -0.15, 1.5, 1}};
    case ScenarioName::strong_iv:
      return {{3.0, -7.0, 0.2, 2.0, 0}, {-3.0, 5.0, -0.15, 1.5, 1}};
  }
  throw std::invalid_argument("scenario_coefficients: unknown scenario");
}

double treat_prob(const ScenarioCoefficients& coef, int t, int z, double x1, double x2,
                  double u) {
  const TreatmentCoefficients& c = t == 0 ? coef.a0 : coef.a1;
  const double x = c.x_index == 0 ? x1 : x2;
  return expit(c.intercept + c.z * z + c.u * u + c.x * x);
}

double outcome_mean(int t, int a, int z, double x1, double x2, double u) {
  const double effect = 1.5 * x1 + 2.0 * x2 - 0.5;
  if (t == 0) {
    return 200.0 + 10.0 * (a * effect + 0.5 * u + 2.0 * z + 1.5 * x1 + 2.0 * x2);
  }
  return 240.0 + 10.0 * (a * effect + 0.5 * u + 2.0 * z + 2.0 * x1 + 1.5 * x2);
}

double sample_bridge(Rng& rng) {
  const double v = rng.uniform01();
  return 2.0 * std::log(std::tan(M_PI * v / 2.0));
}

double bridge_density(double u) { return 1.0 / (2.0 * M_PI * std::cosh(u / 2.0)); }

double bridge_cdf(double u) { return (2.0 / M_PI) * std::atan(std::exp(u / 2.0)); }

namespace {

struct UnitDraw {
  double x1, x2, u0, u1;
  int z, a0, a1;
  double y0, y1;
};

// One unit's structural draw, shared by the cross-section and panel
// generators so their marginals agree by construction.
UnitDraw draw_unit(const ScenarioCoefficients& coef, Rng& rng) {
  UnitDraw d;
  d.x1 = rng.normal();
  d.x2 = rng.normal();
  d.z = rng.bernoulli(0.5);
  d.u0 = sample_bridge(rng);
  d.u1 = sample_bridge(rng);
  d.a0 = rng.bernoulli(treat_prob(coef, 0, d.z, d.x1, d.x2, d.u0));
  d.a1 = rng.bernoulli(treat_prob(coef, 1, d.z, d.x1, d.x2, d.u1));
  d.y0 = outcome_mean(0, d.a0, d.z, d.x1, d.x2, d.u0) + rng.normal();
  d.y1 = outcome_mean(1, d.a1, d.z, d.x1, d.x2, d.u1) + rng.normal();
  return d;
}

}  // namespace

SimulatedCrossSection simulate_cross_section(const Scenario& scenario) {
  if (scenario.n < 1) throw std::invalid_argument("simulate_cross_section: n >= 1 required");
  const ScenarioCoefficients coef = scenario_coefficients(scenario.name);
  const auto n = static_cast<Eigen::Index>(scenario.n);

  RowMatrixXd x(n, 2);
  Eigen::VectorXi a(n), t(n), z(n);
  Eigen::VectorXd y(n);
  std::vector<TruthRecord> truth(scenario.n);

  Rng rng(mix_seed(scenario.seed, 0x63726f7373ULL));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int period = rng.bernoulli(0.5);
    const UnitDraw d = draw_unit(coef, rng);
    x(i, 0) = d.x1;
    x(i, 1) = d.x2;
    t[i] = period;
    z[i] = d.z;
    a[i] = period == 1 ? d.a1 : d.a0;
    y[i] = period == 1 ? d.y1 : d.y0;
    truth[static_cast<std::size_t>(i)] = {d.u0, d.u1, d.a0, d.a1};
  }
  Dataset data(std::move(x), std::move(a), std::move(y), std::move(t), std::move(z),
               {"x1", "x2"});
  return {std::move(data), std::move(truth)};
}

SimulatedPanel simulate_panel(const Scenario& scenario) {
  if (scenario.n < 1) throw std::invalid_argument("simulate_panel: n >= 1 required");
  const ScenarioCoefficients coef = scenario_coefficients(scenario.name);
  const auto n = static_cast<Eigen::Index>(scenario.n);

  RowMatrixXd x(n, 2);
  Eigen::VectorXi z(n), a0(n), a1(n);
  Eigen::VectorXd y0(n), y1(n);
  std::vector<TruthRecord> truth(scenario.n);

  Rng rng(mix_seed(scenario.seed, 0x70616e656cULL));
  for (Eigen::Index i = 0; i < n; ++i) {
    const UnitDraw d = draw_unit(coef, rng);
    x(i, 0) = d.x1;
    x(i, 1) = d.x2;
    z[i] = d.z;
    a0[i] = d.a0;
    a1[i] = d.a1;
    y0[i] = d.y0;
    y1[i] = d.y1;
    truth[static_cast<std::size_t>(i)] = {d.u0, d.u1, d.a0, d.a1};
  }
  PanelDataset data(std::move(x), std::move(z), std::move(a0), std::move(y0),
                    std::move(a1), std::move(y1), {"x1", "x2"});
  return {std::move(data), std::move(truth)};
}

LinearPolicy true_optimal_policy() {
  Eigen::VectorXd eta(3);
  eta << -1.0, 3.0, 4.0;
  return LinearPolicy(eta);
}

double true_cate(double x1, double x2) { return 10.0 * (1.5 * x1 + 2.0 * x2 - 0.5); }

double pcd(const LinearPolicy& policy, const Dataset& test) {
  if (test.augmented()) throw std::invalid_argument("pcd: expected raw covariates");
  if (test.dim() != 2) throw std::invalid_argument("pcd: expected two covariates");
  const Eigen::VectorXi decisions = decide_with_intercept(policy, test.x());
  const LinearPolicy optimal = true_optimal_policy();
  const Eigen::VectorXi target = decide_with_intercept(optimal, test.x());
  const auto n = static_cast<Eigen::Index>(test.size());
  Eigen::Index agree = 0;
  for (Eigen::Index i = 0; i < n; ++i) agree += decisions[i] == target[i] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(n);
}

}  // namespace idid
