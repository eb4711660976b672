#include "idid/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace idid {

namespace {

void check_shape(Eigen::Index n, Eigen::Index rows, const char* what) {
  if (rows != n) {
    throw std::invalid_argument(std::string("Dataset: column '") + what +
                                "' length does not match covariate rows");
  }
}

bool is_binary(int v) { return v == 0 || v == 1; }

}  // namespace

Dataset::Dataset(RowMatrixXd x, Eigen::VectorXi a, Eigen::VectorXd y, Eigen::VectorXi t,
                 Eigen::VectorXi z, std::vector<std::string> covariate_names,
                 bool augmented)
    : x_(std::move(x)),
      a_(std::move(a)),
      y_(std::move(y)),
      t_(std::move(t)),
      z_(std::move(z)),
      covariate_names_(std::move(covariate_names)),
      augmented_(augmented) {
  const Eigen::Index n = x_.rows();
  if (n < 1) throw std::invalid_argument("Dataset: n >= 1 violated");
  check_shape(n, a_.size(), "a");
  check_shape(n, y_.size(), "y");
  check_shape(n, t_.size(), "t");
  check_shape(n, z_.size(), "z");
  if (static_cast<Eigen::Index>(covariate_names_.size()) != x_.cols()) {
    throw std::invalid_argument("Dataset: covariate_names size does not match dimension");
  }
}

Observation Dataset::row(std::size_t i) const {
  const auto idx = static_cast<Eigen::Index>(i);
  return Observation{x_.row(idx).transpose(), a_[idx], y_[idx], t_[idx], z_[idx]};
}

PanelDataset::PanelDataset(RowMatrixXd x, Eigen::VectorXi z, Eigen::VectorXi a0,
                           Eigen::VectorXd y0, Eigen::VectorXi a1, Eigen::VectorXd y1,
                           std::vector<std::string> covariate_names, bool augmented)
    : x_(std::move(x)),
      z_(std::move(z)),
      a0_(std::move(a0)),
      y0_(std::move(y0)),
      a1_(std::move(a1)),
      y1_(std::move(y1)),
      covariate_names_(std::move(covariate_names)),
      augmented_(augmented) {
  const Eigen::Index n = x_.rows();
  if (n < 1) throw std::invalid_argument("PanelDataset: n >= 1 violated");
  check_shape(n, z_.size(), "z");
  check_shape(n, a0_.size(), "a0");
  check_shape(n, y0_.size(), "y0");
  check_shape(n, a1_.size(), "a1");
  check_shape(n, y1_.size(), "y1");
  if (static_cast<Eigen::Index>(covariate_names_.size()) != x_.cols()) {
    throw std::invalid_argument("PanelDataset: covariate_names size does not match dimension");
  }
}

PanelObservation PanelDataset::row(std::size_t i) const {
  const auto idx = static_cast<Eigen::Index>(i);
  return PanelObservation{x_.row(idx).transpose(), z_[idx], a0_[idx],
                          a1_[idx],                y0_[idx], y1_[idx]};
}

std::vector<std::string> validate(const Dataset& data) {
  std::vector<std::string> violations;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row = "row " + std::to_string(i);
    if (!is_binary(data.a()[i])) violations.push_back(row + ": a not in {0,1}");
    if (!is_binary(data.t()[i])) violations.push_back(row + ": t not in {0,1}");
    if (!is_binary(data.z()[i])) violations.push_back(row + ": z not in {0,1}");
    if (!std::isfinite(data.y()[i])) violations.push_back(row + ": y not finite");
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      if (!std::isfinite(data.x()(i, j))) {
        violations.push_back(row + ": x" + std::to_string(j + 1) + " not finite");
      }
    }
    if (data.augmented() && data.dim() > 0 && data.x()(i, 0) != 1.0) {
      violations.push_back(row + ": intercept coordinate != 1");
    }
  }
  return violations;
}

std::vector<std::string> validate(const PanelDataset& data) {
  std::vector<std::string> violations;
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row = "row " + std::to_string(i);
    if (!is_binary(data.z()[i])) violations.push_back(row + ": z not in {0,1}");
    if (!is_binary(data.a0()[i])) violations.push_back(row + ": a0 not in {0,1}");
    if (!is_binary(data.a1()[i])) violations.push_back(row + ": a1 not in {0,1}");
    if (!std::isfinite(data.y0()[i])) violations.push_back(row + ": y0 not finite");
    if (!std::isfinite(data.y1()[i])) violations.push_back(row + ": y1 not finite");
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      if (!std::isfinite(data.x()(i, j))) {
        violations.push_back(row + ": x" + std::to_string(j + 1) + " not finite");
      }
    }
    if (data.augmented() && data.dim() > 0 && data.x()(i, 0) != 1.0) {
      violations.push_back(row + ": intercept coordinate != 1");
    }
  }
  return violations;
}

namespace {

RowMatrixXd prepend_ones(const RowMatrixXd& x) {
  RowMatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

std::vector<std::string> prepend_intercept_name(std::vector<std::string> names) {
  names.insert(names.begin(), "intercept");
  return names;
}

}  // namespace

Dataset augment_with_intercept(const Dataset& data) {
  if (data.augmented()) {
    throw std::invalid_argument("augment_with_intercept: dataset already augmented");
  }
  return Dataset(prepend_ones(data.x()), data.a(), data.y(), data.t(), data.z(),
                 prepend_intercept_name(data.covariate_names()), true);
}

PanelDataset augment_with_intercept(const PanelDataset& data) {
  if (data.augmented()) {
    throw std::invalid_argument("augment_with_intercept: dataset already augmented");
  }
  return PanelDataset(prepend_ones(data.x()), data.z(), data.a0(), data.y0(), data.a1(),
                      data.y1(), prepend_intercept_name(data.covariate_names()), true);
}

}  // namespace idid
