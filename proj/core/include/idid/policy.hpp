#pragma once

#include <Eigen/Dense>
#include <span>

#include "idid/dataset.hpp"

namespace idid {

// Linear decision rule over intercept-augmented covariates: treat iff the
// linear score is strictly positive. Coefficients are stored L2-normalized;
// the rule is invariant to positive rescaling, so the unit sphere gives one
// representative per policy.
class LinearPolicy {
 public:
  // Normalizes eta. Throws if eta is empty, non-finite, or all zero.
  explicit LinearPolicy(Eigen::VectorXd eta);

  // 1 iff eta'x > 0. A score of exactly zero assigns 0.
  int decide(const VecRef& x) const;

  // Decisions for every row of an augmented covariate matrix.
  Eigen::VectorXi decide_all(const RowMatrixXd& x) const;

  const Eigen::VectorXd& eta() const { return eta_; }
  Eigen::Index dim() const { return eta_.size(); }

 private:
  Eigen::VectorXd eta_;
};

// Majority vote across policies: 1 iff strictly more than half decide 1.
// An exact tie (possible with an even count) resolves to 0.
int majority_decision(std::span<const LinearPolicy> policies, const VecRef& x);

}  // namespace idid
