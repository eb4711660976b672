#include "idid/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "idid/rng.hpp"

namespace idid {

ObjectiveSpec ObjectiveSpec::from_scores(const Dataset& augmented,
                                         const ScoreVector& scores) {
  if (!augmented.augmented()) {
    throw std::invalid_argument("ObjectiveSpec: dataset must be intercept-augmented");
  }
  if (static_cast<std::size_t>(scores.values.size()) != augmented.size()) {
    throw std::invalid_argument("ObjectiveSpec: score length does not match dataset");
  }
  ObjectiveSpec spec;
  spec.x = augmented.x();
  spec.scores = scores.values;
  spec.form = scores.form;
  if (scores.form == ObjectiveForm::match_treatment) {
    spec.match = augmented.a();
  } else if (scores.form == ObjectiveForm::match_instrument) {
    spec.match = augmented.z();
  }
  return spec;
}

namespace {

struct Evaluation {
  double objective = 0.0;
  double margin = 0.0;  // mean |eta'x|, used only to break exact ties
};

// Objective and mean margin in one pass over the precomputed linear scores.
Evaluation evaluate_with_margin(const ObjectiveSpec& spec, const Eigen::VectorXd& eta,
                                Eigen::VectorXd& buffer) {
  buffer.noalias() = spec.x * eta;
  const Eigen::Index n = buffer.size();
  double acc = 0.0;
  double margin = 0.0;
  switch (spec.form) {
    case ObjectiveForm::linear_in_d:
      for (Eigen::Index i = 0; i < n; ++i) {
        if (buffer[i] > 0.0) acc += spec.scores[i];
        margin += std::abs(buffer[i]);
      }
      break;
    case ObjectiveForm::match_treatment:
    case ObjectiveForm::match_instrument:
      for (Eigen::Index i = 0; i < n; ++i) {
        const int d = buffer[i] > 0.0 ? 1 : 0;
        if (d == spec.match[i]) acc += spec.scores[i];
        margin += std::abs(buffer[i]);
      }
      break;
  }
  return {acc / static_cast<double>(n), margin / static_cast<double>(n)};
}

bool better(const Evaluation& a, const Evaluation& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  return a.margin > b.margin;
}

void check_spec(const ObjectiveSpec& spec) {
  if (spec.x.rows() == 0 || spec.x.cols() == 0) {
    throw std::invalid_argument("ObjectiveSpec: empty covariate matrix");
  }
  if (spec.scores.size() != spec.x.rows()) {
    throw std::invalid_argument("ObjectiveSpec: score length mismatch");
  }
  if (spec.form != ObjectiveForm::linear_in_d && spec.match.size() != spec.x.rows()) {
    throw std::invalid_argument("ObjectiveSpec: match labels required for this form");
  }
}

Eigen::VectorXd random_unit_vector(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < dim; ++j) v[j] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

// Gaussian step in the tangent space at eta, renormalized onto the sphere.
Eigen::VectorXd mutate(Rng& rng, const Eigen::VectorXd& eta, double sigma) {
  const Eigen::Index dim = eta.size();
  Eigen::VectorXd noise(dim);
  for (Eigen::Index j = 0; j < dim; ++j) noise[j] = rng.normal();
  noise -= noise.dot(eta) * eta;
  Eigen::VectorXd candidate = eta + sigma * noise;
  const double norm = candidate.norm();
  if (norm < 1e-12) return random_unit_vector(rng, dim);
  return candidate / norm;
}

struct Candidate {
  Eigen::VectorXd eta;
  Evaluation eval;
};

// Hill-climb along coordinate directions with shrinking steps. Each accepted
// move crosses at least one decision boundary or improves the tie-break
// margin, so the walk terminates.
Candidate polish(const ObjectiveSpec& spec, Candidate current, Eigen::VectorXd& buffer) {
  const Eigen::Index dim = current.eta.size();
  for (double step = 0.2; step >= 1e-4; step *= 0.5) {
    bool improved = true;
    int rounds = 0;
    while (improved && rounds < 50) {
      improved = false;
      ++rounds;
      for (Eigen::Index j = 0; j < dim; ++j) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = current.eta;
          trial[j] += sign * step;
          const double norm = trial.norm();
          if (norm < 1e-12) continue;
          trial /= norm;
          const Evaluation eval = evaluate_with_margin(spec, trial, buffer);
          if (better(eval, current.eval)) {
            current.eta = std::move(trial);
            current.eval = eval;
            improved = true;
          }
        }
      }
    }
  }
  return current;
}

}  // namespace

double evaluate_objective(const ObjectiveSpec& spec, const Eigen::VectorXd& eta) {
  check_spec(spec);
  if (eta.size() != spec.x.cols()) {
    throw std::invalid_argument("evaluate_objective: dimension mismatch");
  }
  Eigen::VectorXd buffer(spec.x.rows());
  return evaluate_with_margin(spec, eta, buffer).objective;
}

SearchResult learn_policy(const ObjectiveSpec& spec, const SearchConfig& config) {
  check_spec(spec);
  if (config.population < 1 || config.generations < 1 || config.restarts < 1 ||
      config.tournament < 1 || config.convergence_window < 1) {
    throw std::invalid_argument("SearchConfig: all counts must be >= 1");
  }
  if (!(config.mutation_scale > 0.0)) {
    throw std::invalid_argument("SearchConfig: mutation scale must be positive");
  }
  const Eigen::Index dim = spec.x.cols();
  const int pop_size = config.population;
  const int elites = std::min(config.elites, pop_size);

  Eigen::VectorXd buffer(spec.x.rows());
  Candidate best;
  bool have_best = false;
  std::vector<double> trace;

  for (int restart = 0; restart < config.restarts; ++restart) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(restart), 0x736561726368ULL));

    std::vector<Candidate> population(static_cast<std::size_t>(pop_size));
    for (auto& c : population) {
      c.eta = random_unit_vector(rng, dim);
      c.eval = evaluate_with_margin(spec, c.eta, buffer);
    }

    Candidate restart_best = population[0];
    for (const auto& c : population) {
      if (better(c.eval, restart_best.eval)) restart_best = c;
    }
    int stall = 0;

    std::vector<int> order(static_cast<std::size_t>(pop_size));
    for (int g = 0; g < config.generations; ++g) {
      const double sigma = config.mutation_scale * std::pow(config.mutation_decay, g);

      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int i, int j) {
        const auto& a = population[static_cast<std::size_t>(i)].eval;
        const auto& b = population[static_cast<std::size_t>(j)].eval;
        if (a.objective != b.objective) return a.objective > b.objective;
        if (a.margin != b.margin) return a.margin > b.margin;
        return i < j;
      });

      std::vector<Candidate> next;
      next.reserve(static_cast<std::size_t>(pop_size));
      for (int e = 0; e < elites; ++e) {
        next.push_back(population[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]);
      }
      while (static_cast<int>(next.size()) < pop_size) {
        int winner = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(pop_size));
        for (int k = 1; k < config.tournament; ++k) {
          const int rival =
              static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(pop_size));
          if (better(population[static_cast<std::size_t>(rival)].eval,
                     population[static_cast<std::size_t>(winner)].eval)) {
            winner = rival;
          }
        }
        Candidate child;
        child.eta = mutate(rng, population[static_cast<std::size_t>(winner)].eta, sigma);
        child.eval = evaluate_with_margin(spec, child.eta, buffer);
        next.push_back(std::move(child));
      }
      population = std::move(next);

      bool improved = false;
      for (const auto& c : population) {
        if (better(c.eval, restart_best.eval)) {
          restart_best = c;
          improved = true;
        }
      }
      // Trace is best-so-far across the whole run, not just this restart.
      const double run_best = have_best
                                  ? std::max(best.eval.objective,
                                             restart_best.eval.objective)
                                  : restart_best.eval.objective;
      trace.push_back(run_best);
      stall = improved ? 0 : stall + 1;
      if (stall >= config.convergence_window) break;
    }

    restart_best = polish(spec, std::move(restart_best), buffer);
    if (!have_best || better(restart_best.eval, best.eval)) {
      best = restart_best;
      have_best = true;
    }
  }

  return SearchResult{LinearPolicy(best.eta), best.eval.objective, std::move(trace)};
}

SearchResult grid_oracle(const ObjectiveSpec& spec, double resolution_degrees) {
  check_spec(spec);
  if (!(resolution_degrees > 0.0)) {
    throw std::invalid_argument("grid_oracle: resolution must be positive");
  }
  const Eigen::Index dim = spec.x.cols();
  if (dim > 3) {
    throw std::invalid_argument("grid_oracle: policy dimension must be <= 3, got " +
                                std::to_string(dim));
  }
  constexpr double kDegree = M_PI / 180.0;

  std::vector<Eigen::VectorXd> candidates;
  if (dim == 1) {
    candidates.push_back(Eigen::VectorXd::Constant(1, 1.0));
    candidates.push_back(Eigen::VectorXd::Constant(1, -1.0));
  } else if (dim == 2) {
    const auto steps = static_cast<long>(std::ceil(360.0 / resolution_degrees));
    for (long k = 0; k < steps; ++k) {
      const double angle = static_cast<double>(k) * resolution_degrees * kDegree;
      Eigen::VectorXd eta(2);
      eta << std::cos(angle), std::sin(angle);
      candidates.push_back(std::move(eta));
    }
  } else {
    const auto polar_steps = static_cast<long>(std::floor(180.0 / resolution_degrees));
    const auto azimuth_steps = static_cast<long>(std::ceil(360.0 / resolution_degrees));
    for (long i = 0; i <= polar_steps; ++i) {
      const double polar = static_cast<double>(i) * resolution_degrees * kDegree;
      const double sp = std::sin(polar);
      const double cp = std::cos(polar);
      const long arc = (i == 0 || i == polar_steps) && sp < 1e-12 ? 1 : azimuth_steps;
      for (long k = 0; k < arc; ++k) {
        const double azimuth = static_cast<double>(k) * resolution_degrees * kDegree;
        Eigen::VectorXd eta(3);
        eta << sp * std::cos(azimuth), sp * std::sin(azimuth), cp;
        candidates.push_back(std::move(eta));
      }
    }
    if (std::abs(static_cast<double>(polar_steps) * resolution_degrees - 180.0) > 1e-12) {
      Eigen::VectorXd south(3);
      south << 0.0, 0.0, -1.0;
      candidates.push_back(std::move(south));
    }
  }

  Eigen::VectorXd buffer(spec.x.rows());
  Candidate best;
  best.eta = candidates.front();
  best.eval = evaluate_with_margin(spec, best.eta, buffer);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const Evaluation eval = evaluate_with_margin(spec, candidates[k], buffer);
    if (better(eval, best.eval)) {
      best.eta = candidates[k];
      best.eval = eval;
    }
  }
  return SearchResult{LinearPolicy(best.eta), best.eval.objective, {}};
}

}  // namespace idid
