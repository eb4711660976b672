#include "idid/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace idid {

LinearPolicy::LinearPolicy(Eigen::VectorXd eta) : eta_(std::move(eta)) {
  if (eta_.size() == 0) throw std::invalid_argument("LinearPolicy: empty coefficients");
  if (!eta_.allFinite()) throw std::invalid_argument("LinearPolicy: non-finite coefficients");
  const double norm = eta_.norm();
  if (norm == 0.0) throw std::invalid_argument("LinearPolicy: zero coefficient vector");
  eta_ /= norm;
}

int LinearPolicy::decide(const VecRef& x) const {
  if (x.size() != eta_.size()) {
    throw std::invalid_argument("LinearPolicy::decide: dimension mismatch (x has " +
                                std::to_string(x.size()) + ", policy has " +
                                std::to_string(eta_.size()) + ")");
  }
  return eta_.dot(x) > 0.0 ? 1 : 0;
}

Eigen::VectorXi LinearPolicy::decide_all(const RowMatrixXd& x) const {
  if (x.cols() != eta_.size()) {
    throw std::invalid_argument("LinearPolicy::decide_all: dimension mismatch");
  }
  const Eigen::VectorXd score = x * eta_;
  Eigen::VectorXi out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = score[i] > 0.0 ? 1 : 0;
  return out;
}

int majority_decision(std::span<const LinearPolicy> policies, const VecRef& x) {
  if (policies.empty()) throw std::invalid_argument("majority_decision: no policies");
  std::size_t votes = 0;
  for (const auto& p : policies) votes += static_cast<std::size_t>(p.decide(x));
  return 2 * votes > policies.size() ? 1 : 0;
}

}  // namespace idid
