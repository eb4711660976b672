#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "idid/dataset.hpp"
#include "idid/regression.hpp"
#include "idid/trees.hpp"

namespace idid {

// Probability floor applied to estimated cell probabilities and the
// denominator floor applied to the treatment-trend double difference.
// Floors keep every inverse-probability weight bounded; how often they bind
// is reported so users can see when the data are fragile.
struct TrimConfig {
  double trim_eps = 0.01;
  double delta_floor = 0.05;
};

struct TrimStats {
  long pi_trims = 0;
  long delta_floors = 0;

  void merge(const TrimStats& other) {
    pi_trims += other.pi_trims;
    delta_floors += other.delta_floors;
  }
};

inline int cell_index(int t, int z) { return 2 * t + z; }

// Conditional-mean and cell-probability functions over the four (t,z) cells.
// Implementations: maximum-likelihood fits, bagged-tree fits, and test
// doubles (closed-form truths, deliberately corrupted models).
class CellNuisanceModel {
 public:
  virtual ~CellNuisanceModel() = default;

  // Pr(A=1 | T=t, Z=z, X=x), in [0,1].
  virtual double mu_a(int t, int z, const VecRef& x) const = 0;
  // E[Y | T=t, Z=z, X=x].
  virtual double mu_y(int t, int z, const VecRef& x) const = 0;
  // Pr(T=t, Z=z | X=x) before trimming.
  virtual double pi_raw(int t, int z, const VecRef& x) const = 0;

  const TrimConfig& trim() const { return trim_; }
  void set_trim(const TrimConfig& trim) { trim_ = trim; }

  // Trimmed cell probability.
  double pi(int t, int z, const VecRef& x, TrimStats* stats = nullptr) const;

  // Double difference mu(1,1) - mu(0,1) - mu(1,0) + mu(0,0).
  double delta_a_raw(const VecRef& x) const;
  double delta_y(const VecRef& x) const;

  // Floored double difference for the treatment trend: values inside
  // (-floor, floor) are replaced by sign * floor, with sign(0) taken as +1.
  double delta_a(const VecRef& x, TrimStats* stats = nullptr) const;

  // delta_y / floored delta_a.
  double cate(const VecRef& x, TrimStats* stats = nullptr) const;

 protected:
  TrimConfig trim_;
};

double apply_delta_floor(double value, double floor, TrimStats* stats);

struct CellFitDiagnostics {
  std::array<int, 4> mu_a_iterations{};
  std::array<double, 4> mu_a_grad_norm{};
  int pi_iterations = 0;
  double pi_grad_norm = 0.0;
};

// Per-cell maximum-likelihood fits: logistic regression for the treatment
// mean and least squares for the outcome mean in each (t,z) cell, plus one
// saturated 4-category multinomial for the cell probabilities.
class ParametricCellNuisances : public CellNuisanceModel {
 public:
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

  const CellFitDiagnostics& diagnostics() const { return diagnostics_; }
  const LogisticModel& mu_a_model(int t, int z) const;
  const LinearModel& mu_y_model(int t, int z) const;
  const MultinomialModel& pi_model() const { return pi_; }

  friend ParametricCellNuisances fit_parametric(const Dataset&, const TrimConfig&,
                                                const NewtonOptions&);

 private:
  std::array<LogisticModel, 4> mu_a_;
  std::array<LinearModel, 4> mu_y_;
  MultinomialModel pi_;
  CellFitDiagnostics diagnostics_;
};

ParametricCellNuisances fit_parametric(const Dataset& data, const TrimConfig& trim = {},
                                       const NewtonOptions& opts = {});

// Bagged-tree fits per cell; the four cell-indicator regressions are clipped
// to [trim_eps, 1-trim_eps] and renormalized to a probability vector.
class TreeCellNuisances : public CellNuisanceModel {
 public:
  double mu_a(int t, int z, const VecRef& x) const override;
  double mu_y(int t, int z, const VecRef& x) const override;
  double pi_raw(int t, int z, const VecRef& x) const override;

  friend TreeCellNuisances fit_nonparametric(const Dataset&, const TreeConfig&,
                                             const TrimConfig&, std::uint64_t);

 private:
  std::vector<BaggedTrees> mu_a_;
  std::vector<BaggedTrees> mu_y_;
  std::vector<BaggedTrees> pi_cells_;
};

TreeCellNuisances fit_nonparametric(const Dataset& data, const TreeConfig& config = {},
                                    const TrimConfig& trim = {}, std::uint64_t seed = 0);

enum class FitterKind { parametric, nonparametric };

struct CrossFitOptions {
  int folds = 4;
  FitterKind fitter = FitterKind::parametric;
  std::uint64_t seed = 0;
  TrimConfig trim;
  NewtonOptions newton;
  TreeConfig tree;
};

// Deterministic fold labels in {0..K-1}: a seeded shuffle dealt round-robin,
// so fold sizes differ by at most one.
std::vector<int> fold_split(std::size_t n, int folds, std::uint64_t seed);

// K models, each trained with one fold held out; unit i is always scored by
// the model that never saw fold(i).
class CrossFitNuisances {
 public:
  const CellNuisanceModel& model_for(std::size_t unit) const;
  int fold_of(std::size_t unit) const { return fold_[unit]; }
  int folds() const { return static_cast<int>(fits_.size()); }
  const std::vector<int>& fold_assignment() const { return fold_; }

  friend CrossFitNuisances crossfit(const Dataset&, const CrossFitOptions&);

 private:
  std::vector<int> fold_;
  std::vector<std::unique_ptr<CellNuisanceModel>> fits_;
};

CrossFitNuisances crossfit(const Dataset& data, const CrossFitOptions& options);

// Per-unit nuisance lookup for a fixed dataset; score construction does not
// care whether predictions come from one fit, cross-fit models, or oracles.
class NuisanceView {
 public:
  NuisanceView(const Dataset& data, const CellNuisanceModel& single);
  NuisanceView(const Dataset& data, const CrossFitNuisances& cross_fit);

  const Dataset& data() const { return *data_; }
  const CellNuisanceModel& model(std::size_t unit) const { return lookup_(unit); }

 private:
  const Dataset* data_;
  std::function<const CellNuisanceModel&(std::size_t)> lookup_;
};

// Panel nuisances: within-instrument-arm trend regressions and the
// instrument propensity.
class PanelNuisanceModel {
 public:
  virtual ~PanelNuisanceModel() = default;

  // E[Y1 - Y0 | X=x, Z=z].
  virtual double trend_y(int z, const VecRef& x) const = 0;
  // E[A1 - A0 | X=x, Z=z].
  virtual double trend_a(int z, const VecRef& x) const = 0;
  // Pr(Z=1 | X=x) before trimming.
  virtual double pi_z_raw(const VecRef& x) const = 0;

  const TrimConfig& trim() const { return trim_; }
  void set_trim(const TrimConfig& trim) { trim_ = trim; }

  double pi_z(const VecRef& x, TrimStats* stats = nullptr) const;

  // trend(z=1) - trend(z=0) differences; the A difference is floored.
  double dd_a_raw(const VecRef& x) const;
  double dd_a(const VecRef& x, TrimStats* stats = nullptr) const;
  double dd_y(const VecRef& x) const;
  double cate(const VecRef& x, TrimStats* stats = nullptr) const;

 protected:
  TrimConfig trim_;
};

class ParametricPanelNuisances : public PanelNuisanceModel {
 public:
  double trend_y(int z, const VecRef& x) const override;
  double trend_a(int z, const VecRef& x) const override;
  double pi_z_raw(const VecRef& x) const override;

  friend ParametricPanelNuisances fit_panel(const PanelDataset&, const TrimConfig&,
                                            const NewtonOptions&);

 private:
  std::array<LinearModel, 2> trend_y_;
  std::array<LinearModel, 2> trend_a_;
  LogisticModel pi_z_;
};

ParametricPanelNuisances fit_panel(const PanelDataset& data, const TrimConfig& trim = {},
                                   const NewtonOptions& opts = {});

class TreePanelNuisances : public PanelNuisanceModel {
 public:
  double trend_y(int z, const VecRef& x) const override;
  double trend_a(int z, const VecRef& x) const override;
  double pi_z_raw(const VecRef& x) const override;

  friend TreePanelNuisances fit_panel_nonparametric(const PanelDataset&, const TreeConfig&,
                                                    const TrimConfig&, std::uint64_t);

 private:
  std::vector<BaggedTrees> trend_y_;
  std::vector<BaggedTrees> trend_a_;
  std::vector<BaggedTrees> pi_z_;
};

TreePanelNuisances fit_panel_nonparametric(const PanelDataset& data,
                                           const TreeConfig& config = {},
                                           const TrimConfig& trim = {},
                                           std::uint64_t seed = 0);

// Instrument propensity within one time period, Pr(Z=1 | X=x, T=t); used by
// the single-period baselines.
class PeriodPropensityModel {
 public:
  virtual ~PeriodPropensityModel() = default;
  virtual double prob_z1(int period, const VecRef& x) const = 0;
};

class FittedPeriodPropensity : public PeriodPropensityModel {
 public:
  double prob_z1(int period, const VecRef& x) const override;

  friend FittedPeriodPropensity fit_period_propensity(const Dataset&, const NewtonOptions&);

 private:
  std::array<LogisticModel, 2> models_;
};

FittedPeriodPropensity fit_period_propensity(const Dataset& data,
                                             const NewtonOptions& opts = {});

}  // namespace idid
