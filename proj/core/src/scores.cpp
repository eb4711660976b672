#include "idid/scores.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "idid/stats.hpp"

namespace idid {

std::string to_string(ObjectiveForm form) {
  switch (form) {
    case ObjectiveForm::linear_in_d: return "linear_in_d";
    case ObjectiveForm::match_treatment: return "match_treatment";
    case ObjectiveForm::match_instrument: return "match_instrument";
  }
  return "unknown";
}

Eigen::VectorXi decide_with_intercept(const LinearPolicy& policy,
                                      const RowMatrixXd& x_raw) {
  if (x_raw.cols() + 1 != policy.dim()) {
    throw std::invalid_argument("decide_with_intercept: policy expects " +
                                std::to_string(policy.dim() - 1) + " covariates, got " +
                                std::to_string(x_raw.cols()));
  }
  const auto& eta = policy.eta();
  Eigen::VectorXd score = x_raw * eta.tail(eta.size() - 1);
  score.array() += eta[0];
  Eigen::VectorXi out(x_raw.rows());
  for (Eigen::Index i = 0; i < x_raw.rows(); ++i) out[i] = score[i] > 0.0 ? 1 : 0;
  return out;
}

double wald_score(const CellNuisanceModel& model, const VecRef& x, TrimStats* stats) {
  return model.cate(x, stats);
}

double ipw1_weight(const CellNuisanceModel& model, const Observation& o, TrimStats* stats) {
  const double pi = model.pi(o.t, o.z, o.x, stats);
  const double da = model.delta_a(o.x, stats);
  return (2.0 * o.z - 1.0) * (2.0 * o.t - 1.0) * (2.0 * o.a - 1.0) * o.y / (pi * da);
}

double ipw2_weight(const CellNuisanceModel& model, const Observation& o, TrimStats* stats) {
  const double pi = model.pi(o.t, o.z, o.x, stats);
  const double da = model.delta_a(o.x, stats);
  return (2.0 * o.t - 1.0) * o.y / (pi * da);
}

double eif_delta(const CellNuisanceModel& model, const Observation& o, TrimStats* stats) {
  const double pi = model.pi(o.t, o.z, o.x, stats);
  const double da = model.delta_a(o.x, stats);
  const double ratio = model.delta_y(o.x) / da;
  const double residual = o.y - model.mu_y(o.t, o.z, o.x) -
                          ratio * (o.a - model.mu_a(o.t, o.z, o.x));
  return ratio + (2.0 * o.z - 1.0) * (2.0 * o.t - 1.0) / (pi * da) * residual;
}

double w1_score(const CellNuisanceModel& model, const Observation& o, TrimStats* stats) {
  return (2.0 * o.a - 1.0) * eif_delta(model, o, stats);
}

double w2_score(const CellNuisanceModel& model, const Observation& o, TrimStats* stats) {
  return (2.0 * o.z - 1.0) * eif_delta(model, o, stats);
}

double iv_period_weight(const CellNuisanceModel& model, const PeriodPropensityModel& pz,
                        const Observation& o, int period, TrimStats* stats) {
  if (o.t != period) return 0.0;
  if (o.z == 0 || o.a == 0) return 0.0;
  const double delta_t = apply_delta_floor(
      model.mu_a(period, 1, o.x) - model.mu_a(period, 0, o.x),
      model.trim().delta_floor, stats);
  const double p1 = pz.prob_z1(period, o.x);
  double prob = o.z == 1 ? p1 : 1.0 - p1;
  const double lo = model.trim().trim_eps;
  if (prob < lo || prob > 1.0 - lo) {
    if (stats != nullptr) ++stats->pi_trims;
    prob = std::clamp(prob, lo, 1.0 - lo);
  }
  return o.y / (delta_t * prob);
}

double panel_wald_score(const PanelNuisanceModel& model, const VecRef& x,
                        TrimStats* stats) {
  return model.cate(x, stats);
}

double panel_eif_delta(const PanelNuisanceModel& model, const PanelObservation& o,
                       TrimStats* stats) {
  const double dd_a = model.dd_a(o.x, stats);
  const double dd_y = model.dd_y(o.x);
  const double pi_z = model.pi_z(o.x, stats);
  const double ratio = dd_y / dd_a;
  const double cross = model.trend_y(1, o.x) * model.trend_a(0, o.x) -
                       model.trend_y(0, o.x) * model.trend_a(1, o.x);
  const double bracket = (o.y1 - o.y0) * dd_a -
                         static_cast<double>(o.a1 - o.a0) * dd_y + cross;
  return ratio + (o.z - pi_z) / (pi_z * (1.0 - pi_z) * dd_a * dd_a) * bracket;
}

namespace {

template <typename PerUnit>
ScoreVector build(const NuisanceView& view, ObjectiveForm form, std::string tag,
                  PerUnit&& per_unit) {
  const Dataset& data = view.data();
  ScoreVector out;
  out.form = form;
  out.estimator_tag = std::move(tag);
  out.values.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.values[static_cast<Eigen::Index>(i)] = per_unit(view.model(i), i);
  }
  return out;
}

}  // namespace

ScoreVector wald_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::linear_in_d, "wald",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return wald_score(m, data.covariate_row(i).transpose(), stats);
               });
}

ScoreVector ipw1_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::match_treatment, "ipw1",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return ipw1_weight(m, data.row(i), stats);
               });
}

ScoreVector ipw2_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::match_instrument, "ipw2",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return ipw2_weight(m, data.row(i), stats);
               });
}

ScoreVector eif_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::linear_in_d, "delta",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return eif_delta(m, data.row(i), stats);
               });
}

ScoreVector w1_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::match_treatment, "mr1",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return w1_score(m, data.row(i), stats);
               });
}

ScoreVector w2_scores(const NuisanceView& view, TrimStats* stats) {
  const Dataset& data = view.data();
  return build(view, ObjectiveForm::match_instrument, "mr2",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return w2_score(m, data.row(i), stats);
               });
}

ScoreVector iv_period_scores(const NuisanceView& view, const PeriodPropensityModel& pz,
                             int period, TrimStats* stats) {
  if (period != 0 && period != 1) {
    throw std::invalid_argument("iv_period_scores: period must be 0 or 1");
  }
  const Dataset& data = view.data();
  Eigen::Index n_period = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.t()[static_cast<Eigen::Index>(i)] == period) ++n_period;
  }
  if (n_period == 0) {
    throw std::runtime_error("iv_period_scores: no rows in period t=" +
                             std::to_string(period));
  }
  // The baseline averages over the period subsample; scaling by n/n_period
  // makes the all-sample mean reproduce that average.
  const double scale =
      static_cast<double>(data.size()) / static_cast<double>(n_period);
  return build(view, ObjectiveForm::match_treatment,
               period == 0 ? "iv_t0" : "iv_t1",
               [&](const CellNuisanceModel& m, std::size_t i) {
                 return scale * iv_period_weight(m, pz, data.row(i), period, stats);
               });
}

ScoreVector panel_wald_scores(const PanelDataset& data, const PanelNuisanceModel& model,
                              TrimStats* stats) {
  ScoreVector out;
  out.form = ObjectiveForm::linear_in_d;
  out.estimator_tag = "panel_wald";
  out.values.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.values[static_cast<Eigen::Index>(i)] =
        panel_wald_score(model, data.covariate_row(i).transpose(), stats);
  }
  return out;
}

ScoreVector panel_eif_scores(const PanelDataset& data, const PanelNuisanceModel& model,
                             TrimStats* stats) {
  ScoreVector out;
  out.form = ObjectiveForm::linear_in_d;
  out.estimator_tag = "panel_eif";
  out.values.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.values[static_cast<Eigen::Index>(i)] = panel_eif_delta(model, data.row(i), stats);
  }
  return out;
}

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::wald: return "wald";
    case EstimatorTag::ipw1: return "ipw1";
    case EstimatorTag::ipw2: return "ipw2";
    case EstimatorTag::mr1: return "mr1";
    case EstimatorTag::mr2: return "mr2";
    case EstimatorTag::iv_t0: return "iv_t0";
    case EstimatorTag::iv_t1: return "iv_t1";
  }
  return "unknown";
}

std::optional<EstimatorTag> parse_estimator(const std::string& text) {
  for (EstimatorTag tag : all_estimators()) {
    if (to_string(tag) == text) return tag;
  }
  return std::nullopt;
}

std::vector<EstimatorTag> all_estimators() {
  return {EstimatorTag::wald, EstimatorTag::ipw1,  EstimatorTag::ipw2, EstimatorTag::mr1,
          EstimatorTag::mr2,  EstimatorTag::iv_t0, EstimatorTag::iv_t1};
}

ScoreVector build_estimator_scores(EstimatorTag tag, const NuisanceView& view,
                                   const PeriodPropensityModel* period_propensity,
                                   TrimStats* stats) {
  switch (tag) {
    case EstimatorTag::wald: return wald_scores(view, stats);
    case EstimatorTag::ipw1: return ipw1_scores(view, stats);
    case EstimatorTag::ipw2: return ipw2_scores(view, stats);
    case EstimatorTag::mr1: return w1_scores(view, stats);
    case EstimatorTag::mr2: return w2_scores(view, stats);
    case EstimatorTag::iv_t0:
    case EstimatorTag::iv_t1: {
      if (period_propensity == nullptr) {
        throw std::invalid_argument(
            "build_estimator_scores: single-period baselines need a period propensity");
      }
      const int period = tag == EstimatorTag::iv_t0 ? 0 : 1;
      return iv_period_scores(view, *period_propensity, period, stats);
    }
  }
  throw std::invalid_argument("build_estimator_scores: unknown estimator");
}

std::string score_vector_to_csv(const ScoreVector& scores) {
  std::ostringstream os;
  os << "unit,score,estimator_tag,form\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < scores.values.size(); ++i) {
    os << i << ',' << scores.values[i] << ',' << scores.estimator_tag << ','
       << to_string(scores.form) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Policy-value machinery

double FittedValueNuisances::nu(int t, int z, const VecRef& x) const {
  return cells_[static_cast<std::size_t>(cell_index(t, z))].predict(x);
}

FittedValueNuisances fit_value_nuisances(const Dataset& data, const LinearPolicy& policy) {
  if (data.augmented()) {
    throw std::invalid_argument("fit_value_nuisances: expected raw covariates");
  }
  const Eigen::VectorXi decisions = decide_with_intercept(policy, data.x());

  std::array<std::vector<int>, 4> rows;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(cell_index(data.t()[i], data.z()[i]))].push_back(
        static_cast<int>(i));
  }

  FittedValueNuisances model(policy);
  for (int c = 0; c < 4; ++c) {
    const auto& cell = rows[static_cast<std::size_t>(c)];
    if (cell.empty()) {
      throw std::runtime_error("fit_value_nuisances: empty cell (t=" +
                               std::to_string(c / 2) + ",z=" + std::to_string(c % 2) + ")");
    }
    RowMatrixXd cx(static_cast<Eigen::Index>(cell.size()), data.dim());
    Eigen::VectorXd target(static_cast<Eigen::Index>(cell.size()));
    for (std::size_t k = 0; k < cell.size(); ++k) {
      const int i = cell[k];
      cx.row(static_cast<Eigen::Index>(k)) = data.x().row(i);
      const int a = data.a()[i];
      target[static_cast<Eigen::Index>(k)] =
          (2.0 * a - 1.0) * data.y()[i] * (a == decisions[i] ? 1.0 : 0.0);
    }
    model.cells_[static_cast<std::size_t>(c)] = fit_ols(cx, target);
  }
  return model;
}

double gamma_value(const ValueNuisanceModel& value_model, const CellNuisanceModel& cells,
                   const VecRef& x, TrimStats* stats) {
  const double da = cells.delta_a(x, stats);
  double acc = 0.0;
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      acc += (2.0 * z - 1.0) * (2.0 * t - 1.0) * value_model.nu(t, z, x);
    }
  }
  return acc / da;
}

ValueMrResult value_mr(const NuisanceView& view, const ValueNuisanceModel& value_model,
                       const LinearPolicy& policy) {
  const Dataset& data = view.data();
  if (data.augmented()) {
    throw std::invalid_argument("value_mr: expected raw covariates");
  }
  const Eigen::VectorXi decisions = decide_with_intercept(policy, data.x());

  ValueMrResult result;
  result.contributions.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation o = data.row(i);
    const CellNuisanceModel& cells = view.model(i);
    const double pi = cells.pi(o.t, o.z, o.x, &result.trims);
    const double da = cells.delta_a(o.x, &result.trims);
    const double weight = (2.0 * o.z - 1.0) * (2.0 * o.t - 1.0) / (pi * da);
    const double matched = o.a == decisions[static_cast<Eigen::Index>(i)] ? 1.0 : 0.0;
    const double ipw_term = weight * (2.0 * o.a - 1.0) * o.y * matched;
    const double nu_term = weight * value_model.nu(o.t, o.z, o.x);
    const double gamma = gamma_value(value_model, cells, o.x, &result.trims);
    const double resid_term = weight * (o.a - cells.mu_a(o.t, o.z, o.x)) * gamma;
    result.contributions[static_cast<Eigen::Index>(i)] =
        ipw_term - nu_term + gamma - resid_term;
  }
  result.estimate = mean(std::span<const double>(result.contributions.data(),
                                                 static_cast<std::size_t>(
                                                     result.contributions.size())));
  return result;
}

}  // namespace idid
