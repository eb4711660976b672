#pragma once

#include <cstdint>
#include <vector>

#include "idid/dataset.hpp"
#include "idid/policy.hpp"
#include "idid/scores.hpp"

namespace idid {

// Everything needed to score a candidate coefficient vector: augmented
// covariates, per-unit scores, and (for the classification forms) the labels
// the decisions are matched against.
struct ObjectiveSpec {
  RowMatrixXd x;  // n x (p+1), intercept column first
  Eigen::VectorXd scores;
  ObjectiveForm form = ObjectiveForm::linear_in_d;
  Eigen::VectorXi match;  // a or z, required for the match_* forms

  static ObjectiveSpec from_scores(const Dataset& augmented, const ScoreVector& scores);
};

// Mean objective at eta; positive rescaling of eta cannot change it.
double evaluate_objective(const ObjectiveSpec& spec, const Eigen::VectorXd& eta);

struct SearchConfig {
  int population = 60;
  int generations = 150;
  int restarts = 5;
  std::uint64_t seed = 0;
  double mutation_scale = 0.3;
  double mutation_decay = 0.98;
  int tournament = 3;
  int elites = 2;
  // Stop a restart once the best value has not improved for this many
  // generations.
  int convergence_window = 40;
};

struct SearchResult {
  LinearPolicy policy;
  double objective = 0.0;
  // Best objective seen so far, one entry per completed generation.
  std::vector<double> trace;
};

// Evolutionary search over unit-norm coefficient vectors: tangent-space
// Gaussian mutations, tournament selection and elitism, independent
// restarts, then a pattern-search polish that walks candidates across nearby
// decision flips. Deterministic given the seed. The objective is piecewise
// constant, so exact ties are routine; ties prefer the candidate with the
// larger mean decision margin.
SearchResult learn_policy(const ObjectiveSpec& spec, const SearchConfig& config);

// Exhaustive argmax over a spherical grid with the given angular step in
// degrees. Only for policy dimensions 1-3; the search tests use it as an
// independent reference.
SearchResult grid_oracle(const ObjectiveSpec& spec, double resolution_degrees);

}  // namespace idid
