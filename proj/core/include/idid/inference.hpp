#pragma once

#include "idid/dataset.hpp"
#include "idid/policy.hpp"
#include "idid/scores.hpp"

namespace idid {

struct ValueInference {
  double m_hat = 0.0;
  double sigma2_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
  std::size_t n = 0;
};

// Plug-in inference for the estimated objective at a fixed policy: the point
// estimate is the mean of s_i * d(x_i), the variance is the sample variance
// of the same products, and the interval is the normal-quantile band
// m_hat +/- z_{1-alpha/2} sqrt(sigma2_hat / n). Only defined for scores that
// enter the objective linearly in the decision.
ValueInference variance_plugin(const ScoreVector& scores, const Dataset& augmented,
                               const LinearPolicy& policy, double alpha);

}  // namespace idid
