#pragma once

#include <Eigen/Dense>

#include "idid/dataset.hpp"

namespace idid {

// Design matrix [1 | x] built from raw covariate rows.
RowMatrixXd design_with_intercept(const RowMatrixXd& x);

double expit(double v);

// Ordinary least squares. coef[0] is the intercept.
struct LinearModel {
  Eigen::VectorXd coef;

  double predict(const VecRef& x_raw) const;
};

LinearModel fit_ols(const RowMatrixXd& x_raw, const Eigen::VectorXd& y);

// Binary logistic regression fitted by damped Newton with step-halving.
struct LogisticModel {
  Eigen::VectorXd coef;
  int iterations = 0;
  double grad_norm = 0.0;

  double predict_prob(const VecRef& x_raw) const;
};

struct NewtonOptions {
  int max_iterations = 100;
  double gradient_tol = 1e-8;
};

// Throws if the response is constant (complete separation of the trivial
// kind) or if Newton fails to converge; the error carries the iteration
// count.
LogisticModel fit_logistic(const RowMatrixXd& x_raw, const Eigen::VectorXi& y01,
                           const NewtonOptions& opts = {});

// Multinomial logistic regression over k categories (baseline category 0),
// fitted by damped Newton on the full parameter block.
struct MultinomialModel {
  int categories = 0;
  Eigen::MatrixXd coef;  // (categories-1) x (1+p), row k-1 for category k
  int iterations = 0;
  double grad_norm = 0.0;

  // Probabilities for all categories; sums to 1.
  Eigen::VectorXd predict_probs(const VecRef& x_raw) const;
};

MultinomialModel fit_multinomial(const RowMatrixXd& x_raw, const Eigen::VectorXi& labels,
                                 int categories, const NewtonOptions& opts = {});

}  // namespace idid
