#pragma once

#include <string>
#include <vector>

#include "idid/nuisance.hpp"
#include "idid/scores.hpp"
#include "idid/search.hpp"
#include "idid/simulate.hpp"

namespace idid {

struct BenchmarkConfig {
  ScenarioName scenario = ScenarioName::main;
  std::size_t n = 5000;
  int replications = 100;
  std::vector<EstimatorTag> estimators = all_estimators();
  FitterKind fitter = FitterKind::parametric;
  int folds = 4;
  std::size_t test_size = 100000;
  std::uint64_t seed = 0;
  SearchConfig search;
  TrimConfig trim;
  TreeConfig tree;
  NewtonOptions newton;
  int threads = 0;  // 0 = auto, capped by IDID_THREADS
};

struct ReplicateRow {
  int replicate = 0;
  EstimatorTag estimator = EstimatorTag::wald;
  double pcd = 0.0;
  // Distance between the learned and the known optimal coefficient vector.
  double eta_error = 0.0;
};

struct EstimatorSummary {
  EstimatorTag estimator = EstimatorTag::wald;
  double median_pcd = 0.0;
  double iqr_pcd = 0.0;
  double median_eta_error = 0.0;
};

struct ReplicateFailure {
  int replicate = 0;
  std::string message;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<ReplicateRow> rows;  // replicate-major, estimators in config order
  std::vector<EstimatorSummary> summary;
  std::vector<ReplicateFailure> failures;
  TrimStats trims;
  // "pass" / "fail" when the estimator set allows the comparative check
  // (accuracy of wald/mr over the single-period baselines, spread of wald/mr
  // at most that of the weighting estimators), else "not_applicable".
  std::string ordering_check = "not_applicable";
};

// Per replicate r: simulate with seed base+r, fit nuisances per the fitter
// (the nonparametric fitter is always cross-fitted), learn one policy per
// estimator, and score it against the shared test draw. Replicates run in
// parallel; a replicate that throws is recorded and skipped.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// `replicate,estimator,pcd,n,scenario,seed` rows in deterministic order.
std::string pcd_csv(const BenchmarkReport& report);
std::string summary_json(const BenchmarkReport& report);

}  // namespace idid
