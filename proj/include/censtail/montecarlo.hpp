#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "censtail/asymptotics.hpp"
#include "censtail/estimators.hpp"
#include "censtail/selection.hpp"

namespace censtail {

/// One simulation scenario: a censoring scheme, sample size, replication
/// count and the estimators to sweep.
struct ScenarioConfig {
  std::string name = "scenario";
  CensoringScheme scheme;
  std::size_t n = 500;
  std::size_t replications = 200;
  std::uint64_t master_seed = 1;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::size_t> k_grid;   // empty: 2 .. n-1
  double selection_nu = 0.3;
  std::size_t selection_k_min = 10;  // the smallest-k region is unstable
  std::size_t selection_k_max = 0;   // 0: n-1

  std::vector<std::size_t> resolved_k_grid() const {
    if (!k_grid.empty()) return k_grid;
    std::vector<std::size_t> grid;
    grid.reserve(n - 2);
    for (std::size_t k = 2; k <= n - 1; ++k) grid.push_back(k);
    return grid;
  }

  void validate() const {
    if (replications < 1)
      throw std::invalid_argument("replications must be >= 1");
    if (n < 50) throw std::invalid_argument("n must be >= 50");
    if (estimators.empty())
      throw std::invalid_argument("estimator set must not be empty");
    for (std::size_t k : resolved_k_grid())
      if (k < 2 || k > n - 1)
        throw std::invalid_argument("k grid must lie in [2, n-1]");
    if (!(selection_nu >= 0.0 && selection_nu <= 0.5))
      throw std::invalid_argument("nu must lie in [0, 1/2]");
  }
};

/// Total variation of a path over consecutive defined entries.
inline double tv_smoothness(const EstimatorPath& path) {
  if (path.defined_count() < 2)
    throw std::invalid_argument("tv_smoothness needs >= 2 defined entries");
  double tv = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  for (const Estimate& e : path.estimates) {
    if (!e.defined()) continue;
    if (have_prev) tv += std::abs(e.value - prev);
    prev = e.value;
    have_prev = true;
  }
  return tv;
}

struct CellStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double bias = std::numeric_limits<double>::quiet_NaN();
  double mse = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();
  std::size_t defined_count = 0;
};

struct ReplicationSelection {
  bool defined = false;
  std::size_t k_star = 0;
  double estimate = std::numeric_limits<double>::quiet_NaN();
};

/// Aggregates of one scenario run. Raw estimates are retained for modest
/// replication counts so bias/MSE/variance stay recomputable.
struct SimulationSummary {
  std::string scenario;
  double true_gamma1 = 0.0;
  std::vector<std::string> estimator_ids;
  std::vector<std::string> estimator_kernels;
  std::vector<std::size_t> k_grid;
  std::vector<std::vector<CellStats>> cells;          // [estimator][k index]
  std::vector<double> mean_tv;                        // per estimator
  std::vector<std::size_t> tv_defined;                // reps entering mean_tv
  std::vector<std::vector<ReplicationSelection>> selection; // [estimator][rep]
  std::vector<std::vector<std::vector<Estimate>>> raw;      // [rep][estimator][k]
};

namespace detail {

struct RepResult {
  std::vector<std::vector<Estimate>> paths; // [estimator][k index]
  std::vector<double> tv;                   // NaN when undefined
  std::vector<ReplicationSelection> sel;
};

inline RepResult run_replication(const ScenarioConfig& config,
                                 const std::vector<std::size_t>& k_grid,
                                 std::size_t rep) {
  const std::uint64_t seed = rng::derive(config.master_seed, 2, rep);
  const CensoredSample sample = sample_censored(config.scheme, config.n, seed);
  const TailData data(sample);
  RepResult out;
  out.paths.reserve(config.estimators.size());
  const std::size_t sel_max =
      config.selection_k_max == 0 ? config.n - 1 : config.selection_k_max;
  for (const EstimatorSpec& spec : config.estimators) {
    EstimatorPath path;
    try {
      path = compute_path(data, spec, k_grid);
    } catch (const std::exception&) {
      // a failed tau1 search leaves holes, never aborts the sweep
      path.estimator = estimator_name(spec.kind);
      path.kernel = spec.kernel_label();
      path.k_values = k_grid;
      path.estimates.assign(
          k_grid.size(), Estimate::undefined(EstimateStatus::rho_singular));
    }
    double tv = std::numeric_limits<double>::quiet_NaN();
    if (path.defined_count() >= 2) tv = tv_smoothness(path);
    out.tv.push_back(tv);
    ReplicationSelection sel;
    try {
      const SelectionResult rt =
          reiss_thomas(path, config.selection_nu, config.selection_k_min, sel_max);
      sel.defined = true;
      sel.k_star = rt.k_star;
      for (std::size_t i = 0; i < path.k_values.size(); ++i)
        if (path.k_values[i] == rt.k_star) sel.estimate = path.estimates[i].value;
    } catch (const std::invalid_argument&) {
      sel.defined = false;
    }
    out.sel.push_back(sel);
    out.paths.push_back(std::move(path.estimates));
  }
  return out;
}

} // namespace detail

/// Run one scenario. Replications are independent work units derived from
/// (master_seed, replication index); aggregation walks replications in
/// index order, so the summary is identical for any thread count.
inline SimulationSummary run_scenario(const ScenarioConfig& config,
                                      unsigned threads = 1) {
  config.validate();
  const std::vector<std::size_t> k_grid = config.resolved_k_grid();
  const std::size_t reps = config.replications;

  std::vector<detail::RepResult> results(reps);
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads <= 1 || reps == 1) {
    for (std::size_t r = 0; r < reps; ++r)
      results[r] = detail::run_replication(config, k_grid, r);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= reps) return;
        results[r] = detail::run_replication(config, k_grid, r);
      }
    };
    std::vector<std::thread> pool;
    const unsigned count = std::min<std::size_t>(threads, reps);
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SimulationSummary summary;
  summary.scenario = config.name;
  summary.true_gamma1 = config.scheme.gamma1();
  summary.k_grid = k_grid;
  for (const EstimatorSpec& spec : config.estimators) {
    summary.estimator_ids.emplace_back(estimator_name(spec.kind));
    summary.estimator_kernels.push_back(spec.kernel_label());
  }

  const std::size_t n_est = config.estimators.size();
  const double gamma1 = summary.true_gamma1;
  summary.cells.assign(n_est, std::vector<CellStats>(k_grid.size()));
  summary.mean_tv.assign(n_est, 0.0);
  summary.tv_defined.assign(n_est, 0);
  summary.selection.assign(n_est, {});

  for (std::size_t e = 0; e < n_est; ++e) {
    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
      double sum = 0.0;
      std::size_t m = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const Estimate& est = results[r].paths[e][ki];
        if (est.defined()) {
          sum += est.value;
          ++m;
        }
      }
      CellStats& cell = summary.cells[e][ki];
      cell.defined_count = m;
      if (m == 0) continue;
      const double mean = sum / static_cast<double>(m);
      double var = 0.0, mse = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const Estimate& est = results[r].paths[e][ki];
        if (!est.defined()) continue;
        var += (est.value - mean) * (est.value - mean);
        mse += (est.value - gamma1) * (est.value - gamma1);
      }
      cell.mean = mean;
      cell.bias = mean - gamma1;
      cell.variance = var / static_cast<double>(m);
      cell.mse = mse / static_cast<double>(m);
    }
    double tv_sum = 0.0;
    std::size_t tv_m = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (std::isnan(results[r].tv[e])) continue;
      tv_sum += results[r].tv[e];
      ++tv_m;
    }
    summary.mean_tv[e] = tv_m ? tv_sum / static_cast<double>(tv_m)
                              : std::numeric_limits<double>::quiet_NaN();
    summary.tv_defined[e] = tv_m;
    summary.selection[e].reserve(reps);
    for (std::size_t r = 0; r < reps; ++r)
      summary.selection[e].push_back(results[r].sel[e]);
  }

  if (reps <= 1000) {
    summary.raw.resize(reps);
    for (std::size_t r = 0; r < reps; ++r)
      summary.raw[r] = std::move(results[r].paths);
  }
  return summary;
}

struct NormalityCheck {
  double empirical_variance = 0.0;
  double reference_sigma2 = 0.0;
  double ratio = 0.0;
  std::size_t defined_replications = 0;
};

/// Empirical variance of sqrt(k) (gamma-hat - gamma1) at a single k against
/// the asymptotic variance constant of the configured estimator's kernel.
inline NormalityCheck normality_check(const ScenarioConfig& config,
                                      std::size_t k, unsigned threads = 1) {
  if (config.estimators.size() != 1)
    throw std::invalid_argument("normality_check expects exactly one estimator");
  ScenarioConfig one = config;
  one.k_grid = {k};
  const SimulationSummary summary = run_scenario(one, threads);
  double sum = 0.0;
  std::size_t m = 0;
  std::vector<double> values;
  values.reserve(config.replications);
  for (const auto& rep : summary.raw) {
    const Estimate& e = rep[0][0];
    if (!e.defined()) continue;
    values.push_back(e.value);
    sum += e.value;
    ++m;
  }
  if (m < 2) throw std::runtime_error("normality_check: too few defined estimates");
  const double mean = sum / static_cast<double>(m);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m - 1);
  NormalityCheck out;
  out.defined_replications = m;
  out.empirical_variance = static_cast<double>(k) * var;
  const AsymptoticContext ctx = AsymptoticContext::from(config.scheme);
  out.reference_sigma2 = sigma2(config.estimators[0].kernel, ctx);
  out.ratio = out.empirical_variance / out.reference_sigma2;
  return out;
}

} // namespace censtail
