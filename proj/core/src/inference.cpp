#include "idid/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "idid/stats.hpp"

namespace idid {

ValueInference variance_plugin(const ScoreVector& scores, const Dataset& augmented,
                               const LinearPolicy& policy, double alpha) {
  if (scores.form != ObjectiveForm::linear_in_d) {
    throw std::invalid_argument(
        "variance_plugin: requires scores that pair linearly with the decision");
  }
  if (!augmented.augmented()) {
    throw std::invalid_argument("variance_plugin: dataset must be intercept-augmented");
  }
  const std::size_t n = augmented.size();
  if (static_cast<std::size_t>(scores.values.size()) != n) {
    throw std::invalid_argument("variance_plugin: score length mismatch");
  }
  if (n < 2) throw std::invalid_argument("variance_plugin: need n >= 2");
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("variance_plugin: alpha must be in (0, 1]");
  }

  const Eigen::VectorXi decisions = policy.decide_all(augmented.x());
  std::vector<double> products(n);
  for (std::size_t i = 0; i < n; ++i) {
    products[i] = scores.values[static_cast<Eigen::Index>(i)] *
                  static_cast<double>(decisions[static_cast<Eigen::Index>(i)]);
  }

  ValueInference out;
  out.n = n;
  out.alpha = alpha;
  out.m_hat = mean(products);
  out.sigma2_hat = sample_variance(products);
  // alpha = 1 gives the median quantile, i.e. a zero-width interval.
  const double quantile = alpha == 1.0 ? 0.0 : normal_quantile(1.0 - alpha / 2.0);
  const double half_width = quantile * std::sqrt(out.sigma2_hat / static_cast<double>(n));
  out.lo = out.m_hat - half_width;
  out.hi = out.m_hat + half_width;
  return out;
}

}  // namespace idid
