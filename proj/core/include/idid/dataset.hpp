#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace idid {

// Rows of the covariate matrix are contiguous so row views bind cheaply.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

// One sampled unit from the repeated cross-section: covariates, binary
// treatment, outcome, time period and binary instrument.
struct Observation {
  Eigen::VectorXd x;
  int a = 0;
  double y = 0.0;
  int t = 0;
  int z = 0;
};

// One unit followed over both periods: instrument plus treatment/outcome at
// each time point.
struct PanelObservation {
  Eigen::VectorXd x;
  int z = 0;
  int a0 = 0;
  int a1 = 0;
  double y0 = 0.0;
  double y1 = 0.0;
};

// Column-oriented container for cross-sectional observations. Immutable after
// construction; safe to share across threads.
class Dataset {
 public:
  Dataset(RowMatrixXd x, Eigen::VectorXi a, Eigen::VectorXd y, Eigen::VectorXi t,
          Eigen::VectorXi z, std::vector<std::string> covariate_names,
          bool augmented = false);

  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  Eigen::Index dim() const { return x_.cols(); }
  bool augmented() const { return augmented_; }

  const RowMatrixXd& x() const { return x_; }
  const Eigen::VectorXi& a() const { return a_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXi& t() const { return t_; }
  const Eigen::VectorXi& z() const { return z_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  auto covariate_row(std::size_t i) const { return x_.row(static_cast<Eigen::Index>(i)); }

  Observation row(std::size_t i) const;

 private:
  RowMatrixXd x_;
  Eigen::VectorXi a_;
  Eigen::VectorXd y_;
  Eigen::VectorXi t_;
  Eigen::VectorXi z_;
  std::vector<std::string> covariate_names_;
  bool augmented_;
};

class PanelDataset {
 public:
  PanelDataset(RowMatrixXd x, Eigen::VectorXi z, Eigen::VectorXi a0, Eigen::VectorXd y0,
               Eigen::VectorXi a1, Eigen::VectorXd y1,
               std::vector<std::string> covariate_names, bool augmented = false);

  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  Eigen::Index dim() const { return x_.cols(); }
  bool augmented() const { return augmented_; }

  const RowMatrixXd& x() const { return x_; }
  const Eigen::VectorXi& z() const { return z_; }
  const Eigen::VectorXi& a0() const { return a0_; }
  const Eigen::VectorXd& y0() const { return y0_; }
  const Eigen::VectorXi& a1() const { return a1_; }
  const Eigen::VectorXd& y1() const { return y1_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  auto covariate_row(std::size_t i) const { return x_.row(static_cast<Eigen::Index>(i)); }

  PanelObservation row(std::size_t i) const;

 private:
  RowMatrixXd x_;
  Eigen::VectorXi z_;
  Eigen::VectorXi a0_;
  Eigen::VectorXd y0_;
  Eigen::VectorXi a1_;
  Eigen::VectorXd y1_;
  std::vector<std::string> covariate_names_;
  bool augmented_;
};

// Every invariant violation, phrased with the offending row index. Empty
// result means the dataset is valid.
std::vector<std::string> validate(const Dataset& data);
std::vector<std::string> validate(const PanelDataset& data);

// Prepends a constant-1 coordinate to every covariate vector, so linear
// policies carry their own intercept. Rejects already-augmented input and
// empty datasets.
Dataset augment_with_intercept(const Dataset& data);
PanelDataset augment_with_intercept(const PanelDataset& data);

}  // namespace idid
