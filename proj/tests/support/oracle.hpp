#pragma once

// Test-side ground truth for the simulated data-generating process. The
// structural constants are restated here on purpose (instead of reusing the
// library's tables) so these oracles stay an independent route: conditional
// means come from one-dimensional quadrature over the confounder density,
// never from the fitting code they are used to check.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "idid/nuisance.hpp"
#include "idid/policy.hpp"
#include "idid/scores.hpp"
#include "idid/simulate.hpp"

namespace idid::testing {

double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

// Expectation of f(U) under the confounder density 1/(2 pi cosh(u/2)),
// integrated over (-60, 60).
double confounder_expectation(const std::function<double(double)>& f,
                              int intervals = 2400);

// Structural constants of the treatment models, restated per scenario:
// logit Pr(A_t=1) = b0 + bz z + bu u + bx x_{t+1}.
struct OracleTreatmentModel {
  double b0, bz, bu, bx;
  int x_index;
};

std::array<OracleTreatmentModel, 2> oracle_treatment_models(ScenarioName name);

// Conditional outcome mean restated from the outcome displays.
double oracle_outcome_mean(int t, int a, int z, double x1, double x2, double u);

double oracle_cate(double x1, double x2);

// Tabulated s -> E[expit(s + c U)] and s -> E[U expit(s + c U)] over a dense
// grid; evaluation interpolates linearly.
class BridgeGrid {
 public:
  explicit BridgeGrid(double c);
  double mean_expit(double s) const;
  double mean_u_expit(double s) const;

 private:
  double lookup(const std::vector<double>& table, double s) const;
  double lo_, step_;
  std::vector<double> h_, g_;
};

// True cell nuisances for a scenario: mu_a by quadrature, mu_y in closed form
// given mu_a, cell probabilities identically 1/4.
class OracleCellNuisances : public CellNuisanceModel {
 public:
  explicit OracleCellNuisances(ScenarioName name, TrimConfig trim = {});

  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

  double linear_predictor(int t, int z, const VecRef& x) const;
  const BridgeGrid& grid(int t) const { return grids_[static_cast<std::size_t>(t)]; }

 private:
  std::array<OracleTreatmentModel, 2> models_;
  std::array<BridgeGrid, 2> grids_;
};

class OraclePanelNuisances : public PanelNuisanceModel {
 public:
  explicit OraclePanelNuisances(ScenarioName name, TrimConfig trim = {});

  double trend_y(int z, const VecRef& x) const override;
  double trend_a(int z, const VecRef& x) const override;
  double pi_z_raw(const VecRef& x) const override;

 private:
  OracleCellNuisances cells_;
};

class OraclePeriodPropensity : public PeriodPropensityModel {
 public:
  double prob_z1(int, const VecRef&) const override { return 0.5; }
};

// True nu(t,z,x) = E[(2A-1) Y I{A=d(X)} | T=t,Z=z,X=x] for a fixed policy.
class OracleValueNuisances : public ValueNuisanceModel {
 public:
  OracleValueNuisances(ScenarioName name, LinearPolicy policy);
  double nu(int t, int z, const VecRef& x) const override;

 private:
  OracleCellNuisances cells_;
  LinearPolicy policy_;
};

// --- Single-model corruptions -------------------------------------------------
// Corrupted predictions are a constant (the truth's sample mean over the
// given dataset plus a fixed wrong shift); constants cannot track x, so the
// corrupted piece is genuinely misspecified while positivity floors stay
// valid.

// Cell probabilities wrong, everything else truth.
class CorruptPiCells : public CellNuisanceModel {
 public:
  CorruptPiCells(const OracleCellNuisances& base, std::array<double, 4> pi_constants);
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

 private:
  const OracleCellNuisances& base_;
  std::array<double, 4> pi_constants_;
};

// Treatment cells (and hence the trend denominator) wrong; outcome cells are
// shifted by cate(x) times the treatment-cell error so the effect ratio stays
// at truth. Cell probabilities stay at truth.
class CorruptTreatmentCells : public CellNuisanceModel {
 public:
  CorruptTreatmentCells(const OracleCellNuisances& base, const Dataset& data,
                        std::array<double, 4> shifts);
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

 private:
  const OracleCellNuisances& base_;
  std::array<double, 4> constants_;
};

// Outcome cells (and hence the effect ratio) wrong; treatment cells and cell
// probabilities stay at truth.
class CorruptOutcomeCells : public CellNuisanceModel {
 public:
  CorruptOutcomeCells(const OracleCellNuisances& base, const Dataset& data,
                      std::array<double, 4> shifts);
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

 private:
  const OracleCellNuisances& base_;
  std::array<double, 4> constants_;
};

// Constant-shift corruption of the fixed-policy cell regressions.
class CorruptValueNuisances : public ValueNuisanceModel {
 public:
  CorruptValueNuisances(const OracleValueNuisances& base, const Dataset& data,
                        std::array<double, 4> shifts);
  double nu(int t, int z, const VecRef& x) const override;

 private:
  std::array<double, 4> constants_;
};

// Cell nuisances with arbitrary (randomly drawn) coefficients; any such model
// is a legitimate input for the algebraic identity checks.
class RandomParametricCells : public CellNuisanceModel {
 public:
  RandomParametricCells(std::uint64_t seed, Eigen::Index dim, TrimConfig trim = {});
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

 private:
  std::array<Eigen::VectorXd, 4> a_coef_;
  std::array<Eigen::VectorXd, 4> y_coef_;
  std::array<Eigen::VectorXd, 4> p_coef_;
};

// Brute-force draw of the structural equations with test-side sampling;
// returns Pr(A_t = 1 | Z=z) at fixed covariates, averaged over confounder
// draws.
double brute_force_treat_prob(ScenarioName name, int t, int z, double x1, double x2,
                              std::size_t draws, std::uint64_t seed);

// One oracle per scenario, built once per process (grid construction does
// real quadrature work).
const OracleCellNuisances& shared_oracle_cells(ScenarioName name);

}  // namespace idid::testing
