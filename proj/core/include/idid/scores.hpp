#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "idid/dataset.hpp"
#include "idid/nuisance.hpp"
#include "idid/policy.hpp"

namespace idid {

// How a score vector pairs with a policy during optimization:
//   linear_in_d      -> mean of s_i * d(x_i)
//   match_treatment  -> mean of s_i * I{a_i = d(x_i)}
//   match_instrument -> mean of s_i * I{z_i = d(x_i)}
enum class ObjectiveForm { linear_in_d, match_treatment, match_instrument };

std::string to_string(ObjectiveForm form);

struct ScoreVector {
  Eigen::VectorXd values;
  ObjectiveForm form = ObjectiveForm::linear_in_d;
  std::string estimator_tag;
};

// Decisions of an intercept-carrying policy on raw (un-augmented) covariate
// rows.
Eigen::VectorXi decide_with_intercept(const LinearPolicy& policy, const RowMatrixXd& x_raw);

// --- Per-observation scores ------------------------------------------------

// Treatment-effect ratio delta_y / delta_a with the floored denominator.
double wald_score(const CellNuisanceModel& model, const VecRef& x,
                  TrimStats* stats = nullptr);

// (2z-1)(2t-1)(2a-1) y / (pi(t,z,x) delta_a(x)); pairs with match_treatment.
double ipw1_weight(const CellNuisanceModel& model, const Observation& o,
                   TrimStats* stats = nullptr);

// (2t-1) y / (pi(t,z,x) delta_a(x)); pairs with match_instrument.
double ipw2_weight(const CellNuisanceModel& model, const Observation& o,
                   TrimStats* stats = nullptr);

// Uncentered efficient influence score
//   delta_y/delta_a + (2z-1)(2t-1)/(pi delta_a) *
//     { y - mu_y - (delta_y/delta_a)(a - mu_a) }.
double eif_delta(const CellNuisanceModel& model, const Observation& o,
                 TrimStats* stats = nullptr);

// The classification weights satisfy w1 = (2a-1)*delta and w2 = (2z-1)*delta
// pointwise; they are computed through that identity so it holds at machine
// precision.
double w1_score(const CellNuisanceModel& model, const Observation& o,
                TrimStats* stats = nullptr);
double w2_score(const CellNuisanceModel& model, const Observation& o,
                TrimStats* stats = nullptr);

// Single-period instrument baseline z*a*y / (delta_t(x) * pi_t(z,x)) for units
// in the given period, zero otherwise. delta_t(x) = mu_a(t,1,x) - mu_a(t,0,x),
// floored like the double difference.
double iv_period_weight(const CellNuisanceModel& model, const PeriodPropensityModel& pz,
                        const Observation& o, int period, TrimStats* stats = nullptr);

// Panel ratio of instrument-arm trend differences, floored denominator.
double panel_wald_score(const PanelNuisanceModel& model, const VecRef& x,
                        TrimStats* stats = nullptr);

// Uncentered panel efficient influence score: the trend ratio plus the
// instrument-residual correction
//   (z - pi_z) / (pi_z (1-pi_z) dd_a^2) *
//     { (y1-y0) dd_a - (a1-a0) dd_y + trend_y(1) trend_a(0) - trend_y(0) trend_a(1) }.
double panel_eif_delta(const PanelNuisanceModel& model, const PanelObservation& o,
                       TrimStats* stats = nullptr);

// --- Whole-sample builders ---------------------------------------------------

ScoreVector wald_scores(const NuisanceView& view, TrimStats* stats = nullptr);
ScoreVector ipw1_scores(const NuisanceView& view, TrimStats* stats = nullptr);
ScoreVector ipw2_scores(const NuisanceView& view, TrimStats* stats = nullptr);
ScoreVector eif_scores(const NuisanceView& view, TrimStats* stats = nullptr);
ScoreVector w1_scores(const NuisanceView& view, TrimStats* stats = nullptr);
ScoreVector w2_scores(const NuisanceView& view, TrimStats* stats = nullptr);

// Scores scaled by n/n_period so that their all-sample mean reproduces the
// subsample average the baseline uses.
ScoreVector iv_period_scores(const NuisanceView& view, const PeriodPropensityModel& pz,
                             int period, TrimStats* stats = nullptr);

ScoreVector panel_wald_scores(const PanelDataset& data, const PanelNuisanceModel& model,
                              TrimStats* stats = nullptr);
ScoreVector panel_eif_scores(const PanelDataset& data, const PanelNuisanceModel& model,
                             TrimStats* stats = nullptr);

// CSV export: `unit,score,estimator_tag,form`.
std::string score_vector_to_csv(const ScoreVector& scores);

// The seven cross-sectional estimators the harness and CLI expose.
enum class EstimatorTag { wald, ipw1, ipw2, mr1, mr2, iv_t0, iv_t1 };

std::string to_string(EstimatorTag tag);
std::optional<EstimatorTag> parse_estimator(const std::string& text);
std::vector<EstimatorTag> all_estimators();

// Dispatch by tag. The single-period baselines need the within-period
// instrument propensity; passing nullptr for them is an error.
ScoreVector build_estimator_scores(EstimatorTag tag, const NuisanceView& view,
                                   const PeriodPropensityModel* period_propensity,
                                   TrimStats* stats = nullptr);

// --- Policy-value machinery (fixed policy) ----------------------------------

// Cell regressions of the constructed target (2a-1) * y * I{a = d(x)}; these
// feed the multiply robust value estimator for one fixed policy.
class ValueNuisanceModel {
 public:
  virtual ~ValueNuisanceModel() = default;
  virtual double nu(int t, int z, const VecRef& x) const = 0;
};

class FittedValueNuisances : public ValueNuisanceModel {
 public:
  double nu(int t, int z, const VecRef& x) const override;
  const LinearPolicy& policy() const { return policy_; }

  friend FittedValueNuisances fit_value_nuisances(const Dataset&, const LinearPolicy&);

 private:
  explicit FittedValueNuisances(LinearPolicy policy) : policy_(std::move(policy)) {}
  std::array<LinearModel, 4> cells_;
  LinearPolicy policy_;
};

FittedValueNuisances fit_value_nuisances(const Dataset& data, const LinearPolicy& policy);

// gamma(x) = sum_{t,z} (2z-1)(2t-1) nu(t,z,x) / delta_a(x), sharing the
// floored denominator with everything else.
double gamma_value(const ValueNuisanceModel& value_model, const CellNuisanceModel& cells,
                   const VecRef& x, TrimStats* stats = nullptr);

struct ValueMrResult {
  double estimate = 0.0;
  // Per-unit terms whose mean is the estimate (the uncentered influence
  // contributions).
  Eigen::VectorXd contributions;
  TrimStats trims;
};

// Multiply robust estimate of the policy-value functional at a fixed policy:
// the instrument-weighted outcome term, the centered cell-regression term,
// gamma, and the treatment-residual term averaged over the sample.
ValueMrResult value_mr(const NuisanceView& view, const ValueNuisanceModel& value_model,
                       const LinearPolicy& policy);

}  // namespace idid
