#include "idid/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace idid {

RowMatrixXd design_with_intercept(const RowMatrixXd& x) {
  RowMatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

double expit(double v) {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double LinearModel::predict(const VecRef& x_raw) const {
  if (x_raw.size() + 1 != coef.size()) {
    throw std::invalid_argument("LinearModel::predict: dimension mismatch");
  }
  return coef[0] + coef.tail(coef.size() - 1).dot(x_raw);
}

LinearModel fit_ols(const RowMatrixXd& x_raw, const Eigen::VectorXd& y) {
  if (x_raw.rows() != y.size()) throw std::invalid_argument("fit_ols: shape mismatch");
  if (x_raw.rows() < x_raw.cols() + 1) {
    throw std::invalid_argument("fit_ols: fewer rows than parameters");
  }
  const RowMatrixXd d = design_with_intercept(x_raw);
  // Normal equations via LDLT; the designs here are small and well scaled.
  Eigen::MatrixXd gram = d.transpose() * d;
  Eigen::VectorXd rhs = d.transpose() * y;
  LinearModel model;
  model.coef = gram.ldlt().solve(rhs);
  return model;
}

double LogisticModel::predict_prob(const VecRef& x_raw) const {
  if (x_raw.size() + 1 != coef.size()) {
    throw std::invalid_argument("LogisticModel::predict_prob: dimension mismatch");
  }
  return expit(coef[0] + coef.tail(coef.size() - 1).dot(x_raw));
}

namespace {

double logistic_loglik(const RowMatrixXd& d, const Eigen::VectorXi& y,
                       const Eigen::VectorXd& beta) {
  double ll = 0.0;
  const Eigen::VectorXd lp = d * beta;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    // log p(y|x) = y*lp - log(1+exp(lp)), computed stably.
    const double v = lp[i];
    const double log1pexp = v > 30.0 ? v : std::log1p(std::exp(v));
    ll += y[i] * v - log1pexp;
  }
  return ll;
}

}  // namespace

LogisticModel fit_logistic(const RowMatrixXd& x_raw, const Eigen::VectorXi& y01,
                           const NewtonOptions& opts) {
  const Eigen::Index n = x_raw.rows();
  if (n != y01.size()) throw std::invalid_argument("fit_logistic: shape mismatch");
  const int y_min = y01.minCoeff();
  const int y_max = y01.maxCoeff();
  if (y_min < 0 || y_max > 1) throw std::invalid_argument("fit_logistic: response not binary");
  if (y_min == y_max) {
    throw std::runtime_error("fit_logistic: degenerate response (all " +
                             std::to_string(y_min) + ")");
  }
  const RowMatrixXd d = design_with_intercept(x_raw);
  const Eigen::Index p1 = d.cols();
  if (n < p1) throw std::invalid_argument("fit_logistic: fewer rows than parameters");

  // Coefficients larger than this on centered covariates mean the likelihood
  // is climbing a separation ridge rather than approaching an optimum.
  constexpr double kCoefCap = 50.0;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p1);
  double ll = logistic_loglik(d, y01, beta);
  LogisticModel model;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::VectorXd lp = d * beta;
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = expit(lp[i]);
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad = d.transpose() * (y01.cast<double>() - prob);
    model.iterations = it;
    // Mean-scaled gradient so the tolerance is sample-size free.
    model.grad_norm = grad.lpNorm<Eigen::Infinity>() / static_cast<double>(n);
    if (model.grad_norm < opts.gradient_tol) {
      // A numerically perfect fit means the classes are separated and the
      // likelihood has no maximizer.
      double max_resid = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        max_resid = std::max(max_resid, std::abs(y01[i] - prob[i]));
      }
      if (max_resid < 1e-6) {
        throw std::runtime_error("fit_logistic: classes are separated (detected after " +
                                 std::to_string(it) + " iterations)");
      }
      model.coef = beta;
      return model;
    }
    Eigen::MatrixXd hess = d.transpose() * w.asDiagonal() * d;
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      const Eigen::VectorXd candidate = beta + lambda * step;
      const double cand_ll = logistic_loglik(d, y01, candidate);
      if (cand_ll > ll) {
        beta = candidate;
        ll = cand_ll;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (beta.lpNorm<Eigen::Infinity>() > kCoefCap) {
      throw std::runtime_error(
          "fit_logistic: coefficients diverged (separation) after " +
          std::to_string(it) + " iterations");
    }
    if (!accepted) {
      // The likelihood plateaued at double precision. Close to the optimum
      // that is convergence; far from it the data are separated.
      if (model.grad_norm < 1e3 * opts.gradient_tol) {
        model.coef = beta;
        return model;
      }
      throw std::runtime_error(
          "fit_logistic: no ascent step found (possible separation) after " +
          std::to_string(it) + " iterations");
    }
  }
  throw std::runtime_error("fit_logistic: not converged after " +
                           std::to_string(opts.max_iterations) +
                           " iterations (possible separation)");
}

Eigen::VectorXd MultinomialModel::predict_probs(const VecRef& x_raw) const {
  if (x_raw.size() + 1 != coef.cols()) {
    throw std::invalid_argument("MultinomialModel::predict_probs: dimension mismatch");
  }
  Eigen::VectorXd lp(categories);
  lp[0] = 0.0;
  for (int k = 1; k < categories; ++k) {
    lp[k] = coef(k - 1, 0) + coef.row(k - 1).tail(coef.cols() - 1).dot(x_raw);
  }
  const double m = lp.maxCoeff();
  Eigen::VectorXd probs = (lp.array() - m).exp();
  probs /= probs.sum();
  return probs;
}

namespace {

double multinomial_loglik(const RowMatrixXd& d, const Eigen::VectorXi& labels,
                          const Eigen::MatrixXd& coef, int categories) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    Eigen::VectorXd lp(categories);
    lp[0] = 0.0;
    for (int k = 1; k < categories; ++k) lp[k] = coef.row(k - 1).dot(d.row(i));
    const double m = lp.maxCoeff();
    const double lse = m + std::log((lp.array() - m).exp().sum());
    ll += lp[labels[i]] - lse;
  }
  return ll;
}

}  // namespace

MultinomialModel fit_multinomial(const RowMatrixXd& x_raw, const Eigen::VectorXi& labels,
                                 int categories, const NewtonOptions& opts) {
  const Eigen::Index n = x_raw.rows();
  if (n != labels.size()) throw std::invalid_argument("fit_multinomial: shape mismatch");
  if (categories < 2) throw std::invalid_argument("fit_multinomial: need >= 2 categories");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= categories) {
      throw std::invalid_argument("fit_multinomial: label out of range at row " +
                                  std::to_string(i));
    }
  }
  const RowMatrixXd d = design_with_intercept(x_raw);
  const Eigen::Index p1 = d.cols();
  const Eigen::Index dim = static_cast<Eigen::Index>(categories - 1) * p1;
  if (n < p1 * (categories - 1)) {
    throw std::invalid_argument("fit_multinomial: fewer rows than parameters");
  }

  MultinomialModel model;
  model.categories = categories;
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(categories - 1, p1);
  double ll = multinomial_loglik(d, labels, coef, categories);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd lp(categories);
      lp[0] = 0.0;
      for (int k = 1; k < categories; ++k) lp[k] = coef.row(k - 1).dot(d.row(i));
      const double m = lp.maxCoeff();
      Eigen::VectorXd probs = (lp.array() - m).exp();
      probs /= probs.sum();
      for (int k = 1; k < categories; ++k) {
        const double resid = (labels[i] == k ? 1.0 : 0.0) - probs[k];
        grad.segment((k - 1) * p1, p1) += resid * d.row(i).transpose();
        for (int l = 1; l < categories; ++l) {
          const double wkl = probs[k] * ((k == l ? 1.0 : 0.0) - probs[l]);
          hess.block((k - 1) * p1, (l - 1) * p1, p1, p1) +=
              wkl * d.row(i).transpose() * d.row(i);
        }
      }
    }
    model.iterations = it;
    model.grad_norm = grad.lpNorm<Eigen::Infinity>() / static_cast<double>(n);
    if (model.grad_norm < opts.gradient_tol) {
      model.coef = coef;
      return model;
    }
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      Eigen::MatrixXd candidate = coef;
      for (int k = 1; k < categories; ++k) {
        candidate.row(k - 1) += lambda * step.segment((k - 1) * p1, p1).transpose();
      }
      const double cand_ll = multinomial_loglik(d, labels, candidate, categories);
      if (cand_ll > ll) {
        coef = candidate;
        ll = cand_ll;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (coef.lpNorm<Eigen::Infinity>() > 50.0) {
      throw std::runtime_error(
          "fit_multinomial: coefficients diverged (separation) after " +
          std::to_string(it) + " iterations");
    }
    if (!accepted) {
      if (model.grad_norm < 1e3 * opts.gradient_tol) {
        model.coef = coef;
        return model;
      }
      throw std::runtime_error(
          "fit_multinomial: no ascent step found (possible separation) after " +
          std::to_string(it) + " iterations");
    }
  }
  throw std::runtime_error("fit_multinomial: not converged after " +
                           std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace idid
