#include "idid/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "idid/parallel.hpp"
#include "idid/stats.hpp"

namespace idid {

namespace {

struct ReplicateOutcome {
  bool failed = false;
  std::string message;
  std::vector<ReplicateRow> rows;
  TrimStats trims;
};

ReplicateOutcome run_replicate(const BenchmarkConfig& config, int replicate,
                               const Dataset& test) {
  ReplicateOutcome outcome;
  try {
    Scenario scenario{config.scenario, config.n, config.seed + static_cast<std::uint64_t>(replicate),
                      false};
    const SimulatedCrossSection sim = simulate_cross_section(scenario);

    // One nuisance fit serves every estimator in this replicate.
    ParametricCellNuisances parametric;
    CrossFitNuisances cross_fit;
    std::unique_ptr<NuisanceView> view;
    if (config.fitter == FitterKind::parametric) {
      parametric = fit_parametric(sim.data, config.trim, config.newton);
      view = std::make_unique<NuisanceView>(sim.data, parametric);
    } else {
      CrossFitOptions options;
      options.folds = config.folds;
      options.fitter = FitterKind::nonparametric;
      options.seed = mix_seed(config.seed, static_cast<std::uint64_t>(replicate), 0xcfULL);
      options.trim = config.trim;
      options.newton = config.newton;
      options.tree = config.tree;
      cross_fit = crossfit(sim.data, options);
      view = std::make_unique<NuisanceView>(sim.data, cross_fit);
    }

    const bool needs_iv =
        std::any_of(config.estimators.begin(), config.estimators.end(), [](EstimatorTag t) {
          return t == EstimatorTag::iv_t0 || t == EstimatorTag::iv_t1;
        });
    std::unique_ptr<FittedPeriodPropensity> period_propensity;
    if (needs_iv) {
      period_propensity = std::make_unique<FittedPeriodPropensity>(
          fit_period_propensity(sim.data, config.newton));
    }

    const Dataset augmented = augment_with_intercept(sim.data);
    const LinearPolicy optimal = true_optimal_policy();

    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      const EstimatorTag tag = config.estimators[e];
      const ScoreVector scores =
          build_estimator_scores(tag, *view, period_propensity.get(), &outcome.trims);
      const ObjectiveSpec spec = ObjectiveSpec::from_scores(augmented, scores);
      SearchConfig search = config.search;
      search.seed = mix_seed(config.seed, static_cast<std::uint64_t>(replicate),
                             0x100 + static_cast<std::uint64_t>(e));
      const SearchResult result = learn_policy(spec, search);
      ReplicateRow row;
      row.replicate = replicate;
      row.estimator = tag;
      row.pcd = pcd(result.policy, test);
      row.eta_error = (result.policy.eta() - optimal.eta()).norm();
      outcome.rows.push_back(row);
    }
  } catch (const std::exception& err) {
    outcome.failed = true;
    outcome.message = err.what();
    outcome.rows.clear();
  }
  return outcome;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.replications < 1) {
    throw std::invalid_argument("run_benchmark: replications >= 1 required");
  }
  if (config.estimators.empty()) {
    throw std::invalid_argument("run_benchmark: no estimators requested");
  }

  BenchmarkReport report;
  report.config = config;

  // Shared test draw, generated once and never mutated.
  Scenario test_scenario{config.scenario, config.test_size,
                         mix_seed(config.seed, 0x74657374ULL), false};
  const Dataset test = simulate_cross_section(test_scenario).data;

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.replications));
  const unsigned threads = resolve_thread_count(config.threads);
  parallel_for(static_cast<std::size_t>(config.replications), threads,
               [&](std::size_t r) {
                 outcomes[r] = run_replicate(config, static_cast<int>(r), test);
               });

  for (int r = 0; r < config.replications; ++r) {
    auto& outcome = outcomes[static_cast<std::size_t>(r)];
    if (outcome.failed) {
      report.failures.push_back({r, outcome.message});
      continue;
    }
    report.trims.merge(outcome.trims);
    for (auto& row : outcome.rows) report.rows.push_back(row);
  }

  std::map<EstimatorTag, std::vector<double>> pcds;
  std::map<EstimatorTag, std::vector<double>> eta_errors;
  for (const auto& row : report.rows) {
    pcds[row.estimator].push_back(row.pcd);
    eta_errors[row.estimator].push_back(row.eta_error);
  }
  for (EstimatorTag tag : config.estimators) {
    if (!pcds.count(tag)) continue;
    EstimatorSummary s;
    s.estimator = tag;
    s.median_pcd = median(pcds[tag]);
    s.iqr_pcd = interquartile_range(pcds[tag]);
    s.median_eta_error = median(eta_errors[tag]);
    report.summary.push_back(s);
  }

  const auto find_summary = [&](EstimatorTag tag) -> const EstimatorSummary* {
    for (const auto& s : report.summary) {
      if (s.estimator == tag) return &s;
    }
    return nullptr;
  };
  const auto* wald = find_summary(EstimatorTag::wald);
  const auto* mr1 = find_summary(EstimatorTag::mr1);
  const auto* mr2 = find_summary(EstimatorTag::mr2);
  const auto* ipw1 = find_summary(EstimatorTag::ipw1);
  const auto* ipw2 = find_summary(EstimatorTag::ipw2);
  const auto* iv0 = find_summary(EstimatorTag::iv_t0);
  const auto* iv1 = find_summary(EstimatorTag::iv_t1);
  if (wald && mr1 && mr2 && ipw1 && ipw2 && iv0 && iv1) {
    bool pass = true;
    for (const auto* strong : {wald, mr1, mr2}) {
      pass = pass && strong->median_pcd >= iv0->median_pcd + 0.05;
      pass = pass && strong->median_pcd >= iv1->median_pcd + 0.05;
    }
    const double max_strong_iqr =
        std::max({wald->iqr_pcd, mr1->iqr_pcd, mr2->iqr_pcd});
    const double min_ipw_iqr = std::min(ipw1->iqr_pcd, ipw2->iqr_pcd);
    pass = pass && max_strong_iqr <= min_ipw_iqr;
    report.ordering_check = pass ? "pass" : "fail";
  }
  return report;
}

std::string pcd_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "replicate,estimator,pcd,n,scenario,seed\n";
  for (const auto& row : report.rows) {
    os << row.replicate << ',' << to_string(row.estimator) << ',' << row.pcd << ','
       << report.config.n << ',' << to_string(report.config.scenario) << ','
       << report.config.seed + static_cast<std::uint64_t>(row.replicate) << '\n';
  }
  return os.str();
}

namespace {

std::string json_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string summary_json(const BenchmarkReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "{\n";
  os << "  \"scenario\": \"" << to_string(report.config.scenario) << "\",\n";
  os << "  \"n\": " << report.config.n << ",\n";
  os << "  \"replications\": " << report.config.replications << ",\n";
  os << "  \"seed\": " << report.config.seed << ",\n";
  os << "  \"fitter\": \""
     << (report.config.fitter == FitterKind::parametric ? "parametric" : "nonparametric")
     << "\",\n";
  os << "  \"estimators\": [\n";
  for (std::size_t i = 0; i < report.summary.size(); ++i) {
    const auto& s = report.summary[i];
    os << "    {\"estimator\": \"" << to_string(s.estimator)
       << "\", \"median_pcd\": " << s.median_pcd << ", \"iqr_pcd\": " << s.iqr_pcd
       << ", \"median_eta_error\": " << s.median_eta_error << "}"
       << (i + 1 < report.summary.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"trim_events\": {\"pi_trims\": " << report.trims.pi_trims
     << ", \"delta_floors\": " << report.trims.delta_floors << "},\n";
  os << "  \"failures\": [";
  for (std::size_t i = 0; i < report.failures.size(); ++i) {
    os << (i ? ", " : "") << "{\"replicate\": " << report.failures[i].replicate
       << ", \"message\": \"" << json_escape(report.failures[i].message) << "\"}";
  }
  os << "],\n";
  os << "  \"ordering_check\": \"" << report.ordering_check << "\"\n";
  os << "}\n";
  return os.str();
}

}  // namespace idid
