#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idid/dataset.hpp"
#include "idid/policy.hpp"
#include "idid/rng.hpp"

namespace idid {

enum class ScenarioName { main, weak_iv, strong_iv };

std::string to_string(ScenarioName name);
std::optional<ScenarioName> parse_scenario(const std::string& text);
std::vector<std::string> scenario_names();

struct Scenario {
  ScenarioName name = ScenarioName::main;
  std::size_t n = 5000;
  std::uint64_t seed = 0;
  bool panel = false;
};

// Logistic coefficients of the potential-treatment models at each period:
// intercept, instrument, confounder and one covariate.
struct TreatmentCoefficients {
  double intercept;
  double z;
  double u;
  double x;     // x1 at period 0, x2 at period 1
  int x_index;  // which covariate enters
};

struct ScenarioCoefficients {
  TreatmentCoefficients a0;
  TreatmentCoefficients a1;
};

ScenarioCoefficients scenario_coefficients(ScenarioName name);

// Pr(A_t = 1 | Z=z, U=u, X=x) under the scenario's logistic model.
double treat_prob(const ScenarioCoefficients& coef, int t, int z, double x1, double x2,
                  double u);

// Conditional outcome mean at period t given treatment, instrument,
// covariates and the confounder draw.
double outcome_mean(int t, int a, int z, double x1, double x2, double u);

// Symmetric confounder distribution with density 1 / (2 pi cosh(u/2)),
// sampled by inverse CDF: u = 2 ln tan(pi v / 2).
double sample_bridge(Rng& rng);
double bridge_density(double u);
double bridge_cdf(double u);

// Confounder draws and potential treatments retained for oracle checks.
struct TruthRecord {
  double u0 = 0.0;
  double u1 = 0.0;
  int a0 = 0;
  int a1 = 0;
};

struct SimulatedCrossSection {
  Dataset data;
  std::vector<TruthRecord> truth;
};

struct SimulatedPanel {
  PanelDataset data;
  std::vector<TruthRecord> truth;
};

// Two standard-normal covariates; fair-coin period and instrument;
// independent bridge confounders per period; treatments from the scenario's
// logistic models; outcomes normal around outcome_mean with unit variance.
// The cross-section observes one period per unit, the panel observes both.
SimulatedCrossSection simulate_cross_section(const Scenario& scenario);
SimulatedPanel simulate_panel(const Scenario& scenario);

// The decision rule the outcome models imply: treat iff 3 x1 + 4 x2 - 1 > 0,
// stored as the unit-norm coefficient vector (-1, 3, 4)/sqrt(26).
LinearPolicy true_optimal_policy();
double true_cate(double x1, double x2);

// Fraction of test covariates where the policy agrees with the known optimal
// rule.
double pcd(const LinearPolicy& policy, const Dataset& test);

}  // namespace idid
