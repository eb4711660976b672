#include "idid/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "idid/rng.hpp"

namespace idid {

namespace {

std::string cell_name(int t, int z) {
  return "(t=" + std::to_string(t) + ",z=" + std::to_string(z) + ")";
}

// Row indices per (t,z) cell, indexed by cell_index.
std::array<std::vector<int>, 4> cell_rows(const Dataset& data) {
  std::array<std::vector<int>, 4> rows;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(cell_index(data.t()[i], data.z()[i]))].push_back(
        static_cast<int>(i));
  }
  return rows;
}

RowMatrixXd gather_x(const RowMatrixXd& x, const std::vector<int>& rows) {
  RowMatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
  return out;
}

Eigen::VectorXd gather_d(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[rows[k]];
  return out;
}

Eigen::VectorXi gather_i(const Eigen::VectorXi& v, const std::vector<int>& rows) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[rows[k]];
  return out;
}

void check_cell_occupancy(const Dataset& data, const std::array<std::vector<int>, 4>& rows) {
  const auto p = data.dim();
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      const auto& cell = rows[static_cast<std::size_t>(cell_index(t, z))];
      if (cell.empty()) {
        throw std::runtime_error("nuisance fit: empty cell " + cell_name(t, z));
      }
      if (static_cast<Eigen::Index>(cell.size()) < p + 2) {
        throw std::runtime_error("nuisance fit: cell " + cell_name(t, z) + " has " +
                                 std::to_string(cell.size()) + " rows, needs >= " +
                                 std::to_string(p + 2));
      }
    }
  }
}

}  // namespace

double CellNuisanceModel::pi(int t, int z, const VecRef& x, TrimStats* stats) const {
  const double raw = pi_raw(t, z, x);
  const double lo = trim_.trim_eps;
  const double hi = 1.0 - trim_.trim_eps;
  if (raw < lo || raw > hi) {
    if (stats != nullptr) ++stats->pi_trims;
    return std::clamp(raw, lo, hi);
  }
  return raw;
}

double CellNuisanceModel::delta_a_raw(const VecRef& x) const {
  return mu_a(1, 1, x) - mu_a(0, 1, x) - mu_a(1, 0, x) + mu_a(0, 0, x);
}

double CellNuisanceModel::delta_y(const VecRef& x) const {
  return mu_y(1, 1, x) - mu_y(0, 1, x) - mu_y(1, 0, x) + mu_y(0, 0, x);
}

double apply_delta_floor(double value, double floor, TrimStats* stats) {
  if (std::abs(value) >= floor) return value;
  if (stats != nullptr) ++stats->delta_floors;
  const double sign = value < 0.0 ? -1.0 : 1.0;  // sign(0) taken as +1
  return sign * floor;
}

double CellNuisanceModel::delta_a(const VecRef& x, TrimStats* stats) const {
  return apply_delta_floor(delta_a_raw(x), trim_.delta_floor, stats);
}

double CellNuisanceModel::cate(const VecRef& x, TrimStats* stats) const {
  return delta_y(x) / delta_a(x, stats);
}

// ---------------------------------------------------------------------------
// Parametric cell fits

double ParametricCellNuisances::mu_a(int t, int z, const VecRef& x) const {
  return mu_a_[static_cast<std::size_t>(cell_index(t, z))].predict_prob(x);
}

double ParametricCellNuisances::mu_y(int t, int z, const VecRef& x) const {
  return mu_y_[static_cast<std::size_t>(cell_index(t, z))].predict(x);
}

double ParametricCellNuisances::pi_raw(int t, int z, const VecRef& x) const {
  return pi_.predict_probs(x)[cell_index(t, z)];
}

const LogisticModel& ParametricCellNuisances::mu_a_model(int t, int z) const {
  return mu_a_[static_cast<std::size_t>(cell_index(t, z))];
}

const LinearModel& ParametricCellNuisances::mu_y_model(int t, int z) const {
  return mu_y_[static_cast<std::size_t>(cell_index(t, z))];
}

ParametricCellNuisances fit_parametric(const Dataset& data, const TrimConfig& trim,
                                       const NewtonOptions& opts) {
  const auto rows = cell_rows(data);
  check_cell_occupancy(data, rows);

  ParametricCellNuisances model;
  model.set_trim(trim);
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      const auto c = static_cast<std::size_t>(cell_index(t, z));
      const RowMatrixXd cx = gather_x(data.x(), rows[c]);
      const Eigen::VectorXi ca = gather_i(data.a(), rows[c]);
      const Eigen::VectorXd cy = gather_d(data.y(), rows[c]);
      if (ca.minCoeff() == ca.maxCoeff()) {
        throw std::runtime_error("fit_parametric: degenerate cell " + cell_name(t, z) +
                                 ": treatment is constant (a=" +
                                 std::to_string(ca.minCoeff()) + ")");
      }
      try {
        model.mu_a_[c] = fit_logistic(cx, ca, opts);
      } catch (const std::runtime_error& err) {
        throw std::runtime_error("fit_parametric: cell " + cell_name(t, z) + ": " +
                                 err.what());
      }
      model.diagnostics_.mu_a_iterations[c] = model.mu_a_[c].iterations;
      model.diagnostics_.mu_a_grad_norm[c] = model.mu_a_[c].grad_norm;
      model.mu_y_[c] = fit_ols(cx, cy);
    }
  }

  Eigen::VectorXi labels(static_cast<Eigen::Index>(data.size()));
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    labels[i] = cell_index(data.t()[i], data.z()[i]);
  }
  model.pi_ = fit_multinomial(data.x(), labels, 4, opts);
  model.diagnostics_.pi_iterations = model.pi_.iterations;
  model.diagnostics_.pi_grad_norm = model.pi_.grad_norm;
  return model;
}

// ---------------------------------------------------------------------------
// Bagged-tree cell fits

double TreeCellNuisances::mu_a(int t, int z, const VecRef& x) const {
  const double raw = mu_a_[static_cast<std::size_t>(cell_index(t, z))].predict(x);
  return std::clamp(raw, 0.0, 1.0);
}

double TreeCellNuisances::mu_y(int t, int z, const VecRef& x) const {
  return mu_y_[static_cast<std::size_t>(cell_index(t, z))].predict(x);
}

double TreeCellNuisances::pi_raw(int t, int z, const VecRef& x) const {
  // Clip each cell-indicator regression into the trimmed band, then
  // renormalize so the four cells form a probability vector.
  const double lo = trim_.trim_eps;
  const double hi = 1.0 - trim_.trim_eps;
  std::array<double, 4> probs{};
  double total = 0.0;
  for (int c = 0; c < 4; ++c) {
    probs[static_cast<std::size_t>(c)] =
        std::clamp(pi_cells_[static_cast<std::size_t>(c)].predict(x), lo, hi);
    total += probs[static_cast<std::size_t>(c)];
  }
  return probs[static_cast<std::size_t>(cell_index(t, z))] / total;
}

TreeCellNuisances fit_nonparametric(const Dataset& data, const TreeConfig& config,
                                    const TrimConfig& trim, std::uint64_t seed) {
  const auto rows = cell_rows(data);
  check_cell_occupancy(data, rows);

  TreeCellNuisances model;
  model.set_trim(trim);
  model.mu_a_.reserve(4);
  model.mu_y_.reserve(4);
  model.pi_cells_.reserve(4);
  for (int c = 0; c < 4; ++c) {
    const int t = c / 2;
    const int z = c % 2;
    const auto& cell = rows[static_cast<std::size_t>(c)];
    const RowMatrixXd cx = gather_x(data.x(), cell);
    const Eigen::VectorXd ca = gather_i(data.a(), cell).cast<double>();
    const Eigen::VectorXd cy = gather_d(data.y(), cell);
    try {
      model.mu_a_.push_back(BaggedTrees::fit(cx, ca, config, mix_seed(seed, 1, c)));
      model.mu_y_.push_back(BaggedTrees::fit(cx, cy, config, mix_seed(seed, 2, c)));
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("fit_nonparametric: cell " + cell_name(t, z) + ": " +
                               err.what());
    }
  }
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd indicator(static_cast<Eigen::Index>(data.size()));
    for (Eigen::Index i = 0; i < indicator.size(); ++i) {
      indicator[i] = cell_index(data.t()[i], data.z()[i]) == c ? 1.0 : 0.0;
    }
    model.pi_cells_.push_back(
        BaggedTrees::fit(data.x(), indicator, config, mix_seed(seed, 3, c)));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Cross-fitting

std::vector<int> fold_split(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("fold_split: need K >= 2");
  if (static_cast<std::size_t>(folds) > n) {
    throw std::invalid_argument("fold_split: K exceeds n");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x666f6c6473ULL));
  // Fisher-Yates with our own engine so the split is a pure function of
  // (n, K, seed).
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

const CellNuisanceModel& CrossFitNuisances::model_for(std::size_t unit) const {
  return *fits_[static_cast<std::size_t>(fold_[unit])];
}

CrossFitNuisances crossfit(const Dataset& data, const CrossFitOptions& options) {
  const std::size_t n = data.size();
  CrossFitNuisances out;
  out.fold_ = fold_split(n, options.folds, options.seed);

  for (int k = 0; k < options.folds; ++k) {
    std::vector<int> train_rows;
    train_rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (out.fold_[i] != k) train_rows.push_back(static_cast<int>(i));
    }
    RowMatrixXd tx = gather_x(data.x(), train_rows);
    Dataset train(std::move(tx), gather_i(data.a(), train_rows),
                  gather_d(data.y(), train_rows), gather_i(data.t(), train_rows),
                  gather_i(data.z(), train_rows), data.covariate_names(),
                  data.augmented());
    try {
      if (options.fitter == FitterKind::parametric) {
        out.fits_.push_back(std::make_unique<ParametricCellNuisances>(
            fit_parametric(train, options.trim, options.newton)));
      } else {
        out.fits_.push_back(std::make_unique<TreeCellNuisances>(fit_nonparametric(
            train, options.tree, options.trim, mix_seed(options.seed, 17, k))));
      }
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("crossfit: training split excluding fold " +
                               std::to_string(k) + ": " + err.what());
    }
  }
  return out;
}

NuisanceView::NuisanceView(const Dataset& data, const CellNuisanceModel& single)
    : data_(&data), lookup_([&single](std::size_t) -> const CellNuisanceModel& {
        return single;
      }) {}

NuisanceView::NuisanceView(const Dataset& data, const CrossFitNuisances& cross_fit)
    : data_(&data), lookup_([&cross_fit](std::size_t i) -> const CellNuisanceModel& {
        return cross_fit.model_for(i);
      }) {
  if (cross_fit.fold_assignment().size() != data.size()) {
    throw std::invalid_argument("NuisanceView: fold assignment does not match dataset");
  }
}

// ---------------------------------------------------------------------------
// Panel nuisances

double PanelNuisanceModel::pi_z(const VecRef& x, TrimStats* stats) const {
  const double raw = pi_z_raw(x);
  const double lo = trim_.trim_eps;
  const double hi = 1.0 - trim_.trim_eps;
  if (raw < lo || raw > hi) {
    if (stats != nullptr) ++stats->pi_trims;
    return std::clamp(raw, lo, hi);
  }
  return raw;
}

double PanelNuisanceModel::dd_a_raw(const VecRef& x) const {
  return trend_a(1, x) - trend_a(0, x);
}

double PanelNuisanceModel::dd_a(const VecRef& x, TrimStats* stats) const {
  return apply_delta_floor(dd_a_raw(x), trim_.delta_floor, stats);
}

double PanelNuisanceModel::dd_y(const VecRef& x) const {
  return trend_y(1, x) - trend_y(0, x);
}

double PanelNuisanceModel::cate(const VecRef& x, TrimStats* stats) const {
  return dd_y(x) / dd_a(x, stats);
}

double ParametricPanelNuisances::trend_y(int z, const VecRef& x) const {
  return trend_y_[static_cast<std::size_t>(z)].predict(x);
}

double ParametricPanelNuisances::trend_a(int z, const VecRef& x) const {
  return trend_a_[static_cast<std::size_t>(z)].predict(x);
}

double ParametricPanelNuisances::pi_z_raw(const VecRef& x) const {
  return pi_z_.predict_prob(x);
}

ParametricPanelNuisances fit_panel(const PanelDataset& data, const TrimConfig& trim,
                                   const NewtonOptions& opts) {
  std::array<std::vector<int>, 2> rows;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(data.z()[i])].push_back(static_cast<int>(i));
  }
  for (int z = 0; z < 2; ++z) {
    if (rows[static_cast<std::size_t>(z)].empty()) {
      throw std::runtime_error("fit_panel: empty instrument group z=" + std::to_string(z));
    }
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(z)].size()) < data.dim() + 2) {
      throw std::runtime_error("fit_panel: instrument group z=" + std::to_string(z) +
                               " has too few rows");
    }
  }

  ParametricPanelNuisances model;
  model.set_trim(trim);
  for (int z = 0; z < 2; ++z) {
    const auto& group = rows[static_cast<std::size_t>(z)];
    const RowMatrixXd gx = gather_x(data.x(), group);
    Eigen::VectorXd ydiff(static_cast<Eigen::Index>(group.size()));
    Eigen::VectorXd adiff(static_cast<Eigen::Index>(group.size()));
    for (std::size_t k = 0; k < group.size(); ++k) {
      const int i = group[k];
      ydiff[static_cast<Eigen::Index>(k)] = data.y1()[i] - data.y0()[i];
      adiff[static_cast<Eigen::Index>(k)] =
          static_cast<double>(data.a1()[i] - data.a0()[i]);
    }
    model.trend_y_[static_cast<std::size_t>(z)] = fit_ols(gx, ydiff);
    model.trend_a_[static_cast<std::size_t>(z)] = fit_ols(gx, adiff);
  }
  model.pi_z_ = fit_logistic(data.x(), data.z(), opts);
  return model;
}

double TreePanelNuisances::trend_y(int z, const VecRef& x) const {
  return trend_y_[static_cast<std::size_t>(z)].predict(x);
}

double TreePanelNuisances::trend_a(int z, const VecRef& x) const {
  // Trend of a binary treatment lives in [-1, 1].
  return std::clamp(trend_a_[static_cast<std::size_t>(z)].predict(x), -1.0, 1.0);
}

double TreePanelNuisances::pi_z_raw(const VecRef& x) const {
  return std::clamp(pi_z_[0].predict(x), trim_.trim_eps, 1.0 - trim_.trim_eps);
}

TreePanelNuisances fit_panel_nonparametric(const PanelDataset& data,
                                           const TreeConfig& config,
                                           const TrimConfig& trim, std::uint64_t seed) {
  std::array<std::vector<int>, 2> rows;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(data.z()[i])].push_back(static_cast<int>(i));
  }
  for (int z = 0; z < 2; ++z) {
    if (rows[static_cast<std::size_t>(z)].empty()) {
      throw std::runtime_error("fit_panel_nonparametric: empty instrument group z=" +
                               std::to_string(z));
    }
  }

  TreePanelNuisances model;
  model.set_trim(trim);
  for (int z = 0; z < 2; ++z) {
    const auto& group = rows[static_cast<std::size_t>(z)];
    const RowMatrixXd gx = gather_x(data.x(), group);
    Eigen::VectorXd ydiff(static_cast<Eigen::Index>(group.size()));
    Eigen::VectorXd adiff(static_cast<Eigen::Index>(group.size()));
    for (std::size_t k = 0; k < group.size(); ++k) {
      const int i = group[k];
      ydiff[static_cast<Eigen::Index>(k)] = data.y1()[i] - data.y0()[i];
      adiff[static_cast<Eigen::Index>(k)] =
          static_cast<double>(data.a1()[i] - data.a0()[i]);
    }
    model.trend_y_.push_back(BaggedTrees::fit(gx, ydiff, config, mix_seed(seed, 4, z)));
    model.trend_a_.push_back(BaggedTrees::fit(gx, adiff, config, mix_seed(seed, 5, z)));
  }
  Eigen::VectorXd z_indicator = data.z().cast<double>();
  model.pi_z_.push_back(BaggedTrees::fit(data.x(), z_indicator, config, mix_seed(seed, 6)));
  return model;
}

// ---------------------------------------------------------------------------
// Single-period instrument propensity

double FittedPeriodPropensity::prob_z1(int period, const VecRef& x) const {
  return models_[static_cast<std::size_t>(period)].predict_prob(x);
}

FittedPeriodPropensity fit_period_propensity(const Dataset& data,
                                             const NewtonOptions& opts) {
  std::array<std::vector<int>, 2> rows;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(data.t()[i])].push_back(static_cast<int>(i));
  }
  FittedPeriodPropensity model;
  for (int t = 0; t < 2; ++t) {
    const auto& period_rows = rows[static_cast<std::size_t>(t)];
    if (period_rows.empty()) {
      throw std::runtime_error("fit_period_propensity: no rows with t=" +
                               std::to_string(t));
    }
    const RowMatrixXd px = gather_x(data.x(), period_rows);
    const Eigen::VectorXi pz = gather_i(data.z(), period_rows);
    try {
      model.models_[static_cast<std::size_t>(t)] = fit_logistic(px, pz, opts);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("fit_period_propensity: period t=" + std::to_string(t) +
                               ": " + err.what());
    }
  }
  return model;
}

}  // namespace idid
