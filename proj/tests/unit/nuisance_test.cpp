#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idid/nuisance.hpp"
#include "idid/simulate.hpp"
#include "oracle.hpp"

using namespace idid;

namespace {

// Fixed cell values, for arithmetic checks.
class StubCells : public CellNuisanceModel {
 public:
  StubCells(std::array<double, 4> mu_a_cells, std::array<double, 4> mu_y_cells,
            TrimConfig trim = {}) {
    set_trim(trim);
    mu_a_cells_ = mu_a_cells;
    mu_y_cells_ = mu_y_cells;
  }
  double mu_a(int t, int z, const VecRef&) const override {
    return mu_a_cells_[static_cast<std::size_t>(cell_index(t, z))];
  }
  double mu_y(int t, int z, const VecRef&) const override {
    return mu_y_cells_[static_cast<std::size_t>(cell_index(t, z))];
  }
  double pi_raw(int, int, const VecRef&) const override { return 0.25; }

 private:
  std::array<double, 4> mu_a_cells_;
  std::array<double, 4> mu_y_cells_;
};

// A small deterministic dataset that keeps every (t,z) cell balanced in a
// and regular enough for leave-one-out refits.
Dataset balanced_grid_dataset(int rows_per_cell) {
  const int n = 4 * rows_per_cell;
  RowMatrixXd x(n, 2);
  Eigen::VectorXi a(n), t(n), z(n);
  Eigen::VectorXd y(n);
  int i = 0;
  for (int cell = 0; cell < 4; ++cell) {
    for (int k = 0; k < rows_per_cell; ++k, ++i) {
      x(i, 0) = -1.0 + 2.0 * k / (rows_per_cell - 1);
      x(i, 1) = 0.5 - 1.0 * k / (rows_per_cell - 1);
      t[i] = cell / 2;
      z[i] = cell % 2;
      a[i] = k % 2;
      y[i] = 1.0 + 2.0 * x(i, 0) - x(i, 1) + 0.1 * a[i];
    }
  }
  return Dataset(std::move(x), std::move(a), std::move(y), std::move(t), std::move(z),
                 {"x1", "x2"});
}

}  // namespace

TEST_CASE("double differences follow the cell arithmetic") {
  // mu_a cells keep the logistic range; the y cells carry the (5,3,2,1) case.
  const StubCells stub({0.9, 0.8, 0.3, 0.6}, {1.0, 2.0, 3.0, 5.0});
  Eigen::VectorXd x(2);
  x << 0.0, 0.0;
  // delta: cell(1,1) - cell(0,1) - cell(1,0) + cell(0,0); y cells laid out as
  // cell_index = 2t + z -> {y(0,0)=1, y(0,1)=2, y(1,0)=3, y(1,1)=5}.
  CHECK(stub.delta_y(x) == doctest::Approx(5.0 - 2.0 - 3.0 + 1.0));
  CHECK(stub.delta_a_raw(x) == doctest::Approx(0.6 - 0.8 - 0.3 + 0.9));
}

TEST_CASE("a vanishing treatment trend is floored with positive sign") {
  const StubCells stub({0.5, 0.5, 0.5, 0.5}, {1.0, 1.0, 1.0, 1.0});
  Eigen::VectorXd x(2);
  x << 0.0, 0.0;
  CHECK(stub.delta_a_raw(x) == 0.0);
  TrimStats stats;
  CHECK(stub.delta_a(x, &stats) == doctest::Approx(0.05));  // sign(0) taken as +1
  CHECK(stats.delta_floors == 1);

  const StubCells negative({0.5, 0.5, 0.52, 0.5}, {1.0, 1.0, 1.0, 1.0});
  CHECK(negative.delta_a_raw(x) == doctest::Approx(-0.02));
  CHECK(negative.delta_a(x) == doctest::Approx(-0.05));
}

TEST_CASE("delta equals the double difference of cell predictions exactly") {
  const auto& oracle = testing::shared_oracle_cells(ScenarioName::main);
  for (double x1 : {-1.0, 0.0, 1.5}) {
    for (double x2 : {-0.5, 0.25}) {
      Eigen::VectorXd x(2);
      x << x1, x2;
      const double direct = oracle.mu_a(1, 1, x) - oracle.mu_a(0, 1, x) -
                            oracle.mu_a(1, 0, x) + oracle.mu_a(0, 0, x);
      CHECK(oracle.delta_a_raw(x) == direct);
    }
  }
}

TEST_CASE("parametric fit on the simulated design" * doctest::timeout(300)) {
  Scenario scenario;
  scenario.n = 5000;
  scenario.seed = 42;
  const auto sim = simulate_cross_section(scenario);
  const ParametricCellNuisances fit = fit_parametric(sim.data);

  SUBCASE("cell probabilities are close to one quarter") {
    for (std::size_t i = 0; i < sim.data.size(); i += 97) {
      const Eigen::VectorXd x = sim.data.covariate_row(i).transpose();
      for (int t = 0; t < 2; ++t) {
        for (int z = 0; z < 2; ++z) {
          CHECK(std::abs(fit.pi_raw(t, z, x) - 0.25) < 0.03);
        }
      }
    }
  }

  SUBCASE("cell probabilities sum to one before trimming") {
    for (std::size_t i = 0; i < sim.data.size(); i += 511) {
      const Eigen::VectorXd x = sim.data.covariate_row(i).transpose();
      double total = 0.0;
      for (int t = 0; t < 2; ++t) {
        for (int z = 0; z < 2; ++z) total += fit.pi_raw(t, z, x);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
  }

  SUBCASE("treatment trend sign matches the brute-force structural draw") {
    Eigen::VectorXd origin(2);
    origin << 0.0, 0.0;
    const double brute =
        testing::brute_force_treat_prob(ScenarioName::main, 1, 1, 0.0, 0.0, 1000000, 9) -
        testing::brute_force_treat_prob(ScenarioName::main, 0, 1, 0.0, 0.0, 1000000, 10) -
        testing::brute_force_treat_prob(ScenarioName::main, 1, 0, 0.0, 0.0, 1000000, 11) +
        testing::brute_force_treat_prob(ScenarioName::main, 0, 0, 0.0, 0.0, 1000000, 12);
    CHECK(std::abs(brute) > 0.5);  // this design carries a strong trend shift
    const double fitted = fit.delta_a_raw(origin);
    CHECK(fitted * brute > 0.0);
    // The quadrature oracle agrees with the brute-force draw.
    const auto& oracle = testing::shared_oracle_cells(ScenarioName::main);
    CHECK(oracle.delta_a_raw(origin) == doctest::Approx(brute).epsilon(0.02));
  }
}

TEST_CASE("constant outcomes are reproduced exactly in every cell") {
  Dataset data = balanced_grid_dataset(12);
  RowMatrixXd x = data.x();
  Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.size()), 7.0);
  const Dataset constant(std::move(x), data.a(), std::move(y), data.t(), data.z(),
                         data.covariate_names());
  const ParametricCellNuisances fit = fit_parametric(constant);
  Eigen::VectorXd probe(2);
  probe << 0.3, -0.4;
  for (int t = 0; t < 2; ++t) {
    for (int z = 0; z < 2; ++z) {
      CHECK(fit.mu_y(t, z, probe) == doctest::Approx(7.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("a constant-treatment cell is a degenerate-cell error") {
  Dataset data = balanced_grid_dataset(12);
  Eigen::VectorXi a = data.a();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (data.t()[i] == 1 && data.z()[i] == 1) a[i] = 1;
  }
  RowMatrixXd x = data.x();
  Eigen::VectorXd y = data.y();
  const Dataset degenerate(std::move(x), std::move(a), std::move(y), data.t(), data.z(),
                           data.covariate_names());
  CHECK_THROWS_WITH_AS(fit_parametric(degenerate),
                       "fit_parametric: degenerate cell (t=1,z=1): treatment is "
                       "constant (a=1)",
                       std::runtime_error);
}

TEST_CASE("empty cells are named in the error") {
  Dataset data = balanced_grid_dataset(12);
  // Move every (1,1) row into (1,0): cell (1,1) becomes empty.
  Eigen::VectorXi z = data.z();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (data.t()[i] == 1 && z[i] == 1) z[i] = 0;
  }
  RowMatrixXd x = data.x();
  Eigen::VectorXd y = data.y();
  Eigen::VectorXi a = data.a();
  const Dataset missing(std::move(x), std::move(a), std::move(y), data.t(), std::move(z),
                        data.covariate_names());
  CHECK_THROWS_WITH_AS(fit_parametric(missing), "nuisance fit: empty cell (t=1,z=1)",
                       std::runtime_error);
}

TEST_CASE("tree backend captures a within-cell step function") {
  // One cell carries a deterministic step in x1; n = 2000 over four cells.
  Scenario scenario;
  scenario.n = 2000;
  scenario.seed = 3;
  auto sim = simulate_cross_section(scenario);
  RowMatrixXd x = sim.data.x();
  Eigen::VectorXd y = sim.data.y();
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    y[idx] = x(idx, 0) > 0.0 ? 4.0 : -1.0;
  }
  const Dataset stepped(std::move(x), sim.data.a(), std::move(y), sim.data.t(),
                        sim.data.z(), sim.data.covariate_names());
  const TreeCellNuisances fit = fit_nonparametric(stepped, TreeConfig{}, TrimConfig{}, 5);

  double sse = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < stepped.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (stepped.t()[idx] != 0 || stepped.z()[idx] != 0) continue;
    const Eigen::VectorXd probe = stepped.covariate_row(i).transpose();
    if (std::abs(probe[0]) < 0.1) continue;
    const double truth = probe[0] > 0.0 ? 4.0 : -1.0;
    const double err = fit.mu_y(0, 0, probe) - truth;
    sse += err * err;
    ++count;
  }
  // Var(y) of the two-level step is at most the squared gap over 4.
  CHECK(sse / count <= 0.05 * 6.25);

  SUBCASE("tree treatment means stay inside the unit interval") {
    for (std::size_t i = 0; i < stepped.size(); i += 37) {
      const Eigen::VectorXd probe = stepped.covariate_row(i).transpose();
      for (int t = 0; t < 2; ++t) {
        for (int z = 0; z < 2; ++z) {
          const double p = fit.mu_a(t, z, probe);
          CHECK(p >= 0.0);
          CHECK(p <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("fold split is a balanced deterministic partition") {
  const auto folds = fold_split(10000, 4, 77);
  std::array<int, 4> sizes{};
  for (int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 4);
    ++sizes[static_cast<std::size_t>(f)];
  }
  for (int s : sizes) CHECK(s == 2500);
  CHECK(fold_split(10000, 4, 77) == folds);
  CHECK(fold_split(10000, 4, 78) != folds);

  const auto uneven = fold_split(10, 3, 1);
  std::array<int, 3> counts{};
  for (int f : uneven) ++counts[static_cast<std::size_t>(f)];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);

  CHECK_THROWS_AS(fold_split(10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(fold_split(3, 4, 0), std::invalid_argument);
}

TEST_CASE("four-fold crossfit on the simulated design" * doctest::timeout(300)) {
  Scenario scenario;
  scenario.n = 10000;
  scenario.seed = 21;
  const auto sim = simulate_cross_section(scenario);
  CrossFitOptions options;
  options.folds = 4;
  options.seed = 5;
  const CrossFitNuisances cf = crossfit(sim.data, options);
  CHECK(cf.folds() == 4);
  std::array<int, 4> sizes{};
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    ++sizes[static_cast<std::size_t>(cf.fold_of(i))];
  }
  for (int s : sizes) CHECK(s == 2500);
}

TEST_CASE("leave-one-out crossfit keeps predictions finite") {
  const Dataset data = balanced_grid_dataset(10);  // n = 40
  CrossFitOptions options;
  options.folds = 40;
  options.seed = 9;
  const CrossFitNuisances cf = crossfit(data, options);
  CHECK(cf.folds() == 40);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd x = data.covariate_row(i).transpose();
    const auto& model = cf.model_for(i);
    for (int t = 0; t < 2; ++t) {
      for (int z = 0; z < 2; ++z) {
        CHECK(std::isfinite(model.mu_a(t, z, x)));
        CHECK(std::isfinite(model.mu_y(t, z, x)));
        CHECK(std::isfinite(model.pi_raw(t, z, x)));
      }
    }
  }
}

TEST_CASE("out-of-fold predictions ignore permutations inside the fold") {
  Scenario scenario;
  scenario.n = 1200;
  scenario.seed = 8;
  const auto sim = simulate_cross_section(scenario);
  CrossFitOptions options;
  options.folds = 3;
  options.seed = 31;
  const CrossFitNuisances cf = crossfit(sim.data, options);

  // Reverse the rows of fold 0 among themselves.
  std::vector<std::size_t> fold_rows;
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    if (cf.fold_of(i) == 0) fold_rows.push_back(i);
  }
  RowMatrixXd x = sim.data.x();
  Eigen::VectorXi a = sim.data.a(), t = sim.data.t(), z = sim.data.z();
  Eigen::VectorXd y = sim.data.y();
  for (std::size_t k = 0; k < fold_rows.size() / 2; ++k) {
    const auto i = static_cast<Eigen::Index>(fold_rows[k]);
    const auto j = static_cast<Eigen::Index>(fold_rows[fold_rows.size() - 1 - k]);
    x.row(i).swap(x.row(j));
    std::swap(a[i], a[j]);
    std::swap(t[i], t[j]);
    std::swap(z[i], z[j]);
    std::swap(y[i], y[j]);
  }
  const Dataset permuted(std::move(x), std::move(a), std::move(y), std::move(t),
                         std::move(z), sim.data.covariate_names());
  const CrossFitNuisances cf2 = crossfit(permuted, options);

  for (std::size_t k = 0; k < fold_rows.size(); ++k) {
    const std::size_t before = fold_rows[k];
    const std::size_t after = fold_rows[fold_rows.size() - 1 - k];
    // The unit moved from slot `before` to `after`; both slots sit in fold 0,
    // whose out-of-fold model never saw fold 0, so the prediction is bitwise
    // unchanged.
    const Eigen::VectorXd xi = sim.data.covariate_row(before).transpose();
    CHECK(cf.model_for(before).mu_y(1, 0, xi) == cf2.model_for(after).mu_y(1, 0, xi));
  }
}

TEST_CASE("panel fits recover flat and unit trends") {
  Scenario scenario;
  scenario.n = 5000;
  scenario.seed = 14;
  scenario.panel = true;
  const auto sim = simulate_panel(scenario);

  SUBCASE("instrument propensity near one half") {
    const ParametricPanelNuisances fit = fit_panel(sim.data);
    Eigen::VectorXd x(2);
    for (double x1 : {-1.0, 0.0, 1.0}) {
      for (double x2 : {-1.0, 0.0, 1.0}) {
        x << x1, x2;
        CHECK(std::abs(fit.pi_z_raw(x) - 0.5) < 0.03);
      }
    }
  }

  SUBCASE("equal outcomes give zero trend, forced adoption gives unit trend") {
    RowMatrixXd x = sim.data.x();
    Eigen::VectorXd y0 = sim.data.y0();
    Eigen::VectorXd y1 = y0;
    Eigen::VectorXi a0 = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(sim.data.size()));
    Eigen::VectorXi a1 = Eigen::VectorXi::Ones(static_cast<Eigen::Index>(sim.data.size()));
    const PanelDataset flat(std::move(x), sim.data.z(), std::move(a0), std::move(y0),
                            std::move(a1), std::move(y1), sim.data.covariate_names());
    const ParametricPanelNuisances fit = fit_panel(flat);
    Eigen::VectorXd probe(2);
    probe << 0.7, -0.3;
    for (int z = 0; z < 2; ++z) {
      CHECK(fit.trend_y(z, probe) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(fit.trend_a(z, probe) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("an empty instrument group is an error") {
    RowMatrixXd x = sim.data.x();
    Eigen::VectorXd y0 = sim.data.y0(), y1 = sim.data.y1();
    Eigen::VectorXi a0 = sim.data.a0(), a1 = sim.data.a1();
    Eigen::VectorXi z = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(sim.data.size()));
    const PanelDataset one_arm(std::move(x), std::move(z), std::move(a0), std::move(y0),
                               std::move(a1), std::move(y1), sim.data.covariate_names());
    CHECK_THROWS_AS(fit_panel(one_arm), std::runtime_error);
  }
}
