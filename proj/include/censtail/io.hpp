#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "censtail/montecarlo.hpp"

namespace censtail {

/// Input that fails contract checks before any computation starts.
/// Mapped to exit code 2 by the CLI.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io {

/// Locale-independent float formatting at 17 significant digits; parses
/// back bit-exact.
inline std::string format_double(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  if (s == "nan" || s == "-nan")
    return std::numeric_limits<double>::quiet_NaN();
  double out = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ValidationError(where + ": malformed number '" + std::string(s) + "'");
  return out;
}

inline long long parse_int(std::string_view s, const std::string& where) {
  long long out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ValidationError(where + ": malformed integer '" + std::string(s) + "'");
  return out;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace io

/// Parse a censored-data CSV with header "z,delta". Rejects non-positive z,
/// indicators outside {0,1} and files with fewer than 2 rows, with
/// row-numbered diagnostics.
inline CensoredSample read_data_file(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || io::trim(line) != "z,delta")
    throw ValidationError(name + ":1: expected header \"z,delta\"");
  ++lineno;
  std::vector<double> z;
  std::vector<std::uint8_t> delta;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view trimmed = io::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = io::split(trimmed, ',');
    const std::string where = name + ":" + std::to_string(lineno);
    if (fields.size() != 2)
      throw ValidationError(where + ": expected 2 fields, got " +
                            std::to_string(fields.size()));
    const double zv = io::parse_double(io::trim(fields[0]), where);
    if (!(zv > 0.0) || !std::isfinite(zv))
      throw ValidationError(where + ": z must be positive");
    const std::string_view dv = io::trim(fields[1]);
    if (dv != "0" && dv != "1")
      throw ValidationError(where + ": delta must be 0 or 1");
    z.push_back(zv);
    delta.push_back(dv == "1" ? 1 : 0);
  }
  if (z.size() < 2)
    throw ValidationError(name + ": fewer than 2 rows of data");
  return CensoredSample(std::move(z), std::move(delta));
}

/// Estimator-path CSV: estimator,kernel,k,estimate,defined.
inline void write_path_csv(std::ostream& out,
                           const std::vector<EstimatorPath>& paths) {
  out << "estimator,kernel,k,estimate,defined\n";
  for (const EstimatorPath& p : paths)
    for (std::size_t i = 0; i < p.k_values.size(); ++i) {
      const Estimate& e = p.estimates[i];
      out << p.estimator << ',' << p.kernel << ',' << p.k_values[i] << ','
          << io::format_double(e.value) << ',' << (e.defined() ? 1 : 0)
          << '\n';
    }
}

inline std::vector<EstimatorPath> read_path_csv(std::istream& in,
                                                const std::string& name) {
  std::string line;
  if (!std::getline(in, line) ||
      io::trim(line) != "estimator,kernel,k,estimate,defined")
    throw ValidationError(name + ":1: expected path CSV header");
  std::vector<EstimatorPath> paths;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view trimmed = io::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = io::split(trimmed, ',');
    const std::string where = name + ":" + std::to_string(lineno);
    if (fields.size() != 5)
      throw ValidationError(where + ": expected 5 fields");
    const std::string est(fields[0]);
    const std::string kern(fields[1]);
    if (paths.empty() || paths.back().estimator != est ||
        paths.back().kernel != kern) {
      paths.push_back({est, kern, {}, {}});
    }
    EstimatorPath& p = paths.back();
    const long long k = io::parse_int(fields[2], where);
    if (k < 2) throw ValidationError(where + ": k must be >= 2");
    const double value = io::parse_double(fields[3], where);
    const long long defined = io::parse_int(fields[4], where);
    if (defined != 0 && defined != 1)
      throw ValidationError(where + ": defined must be 0 or 1");
    p.k_values.push_back(static_cast<std::size_t>(k));
    p.estimates.push_back(defined
                              ? Estimate::of(value)
                              : Estimate::undefined(
                                    EstimateStatus::km_zero_denominator));
  }
  if (paths.empty()) throw ValidationError(name + ": no path rows");
  return paths;
}

/// Per-cell scenario summary: scenario,estimator,kernel,k,mean,bias,mse,
/// variance,defined_count.
inline void write_summary_csv(std::ostream& out, const SimulationSummary& s) {
  out << "scenario,estimator,kernel,k,mean,bias,mse,variance,defined_count\n";
  for (std::size_t e = 0; e < s.estimator_ids.size(); ++e)
    for (std::size_t ki = 0; ki < s.k_grid.size(); ++ki) {
      const CellStats& c = s.cells[e][ki];
      out << s.scenario << ',' << s.estimator_ids[e] << ','
          << s.estimator_kernels[e] << ',' << s.k_grid[ki] << ','
          << io::format_double(c.mean) << ',' << io::format_double(c.bias)
          << ',' << io::format_double(c.mse) << ','
          << io::format_double(c.variance) << ',' << c.defined_count << '\n';
    }
}

inline void write_smoothness_csv(std::ostream& out,
                                 const SimulationSummary& s) {
  out << "scenario,estimator,mean_tv\n";
  for (std::size_t e = 0; e < s.estimator_ids.size(); ++e)
    out << s.scenario << ',' << s.estimator_ids[e] << ','
        << io::format_double(s.mean_tv[e]) << '\n';
}

/// Per-scenario threshold-selection table, printed to standard output by
/// the simulate command.
inline void write_kstar_table(std::ostream& out, const SimulationSummary& s,
                              bool header) {
  if (header)
    out << "scenario,estimator,mean_kstar,mean_estimate_at_kstar,"
           "defined_replications\n";
  for (std::size_t e = 0; e < s.estimator_ids.size(); ++e) {
    double k_sum = 0.0, est_sum = 0.0;
    std::size_t m = 0;
    for (const ReplicationSelection& sel : s.selection[e]) {
      if (!sel.defined || std::isnan(sel.estimate)) continue;
      k_sum += static_cast<double>(sel.k_star);
      est_sum += sel.estimate;
      ++m;
    }
    const double mk = m ? k_sum / static_cast<double>(m)
                        : std::numeric_limits<double>::quiet_NaN();
    const double me = m ? est_sum / static_cast<double>(m)
                        : std::numeric_limits<double>::quiet_NaN();
    out << s.scenario << ',' << s.estimator_ids[e] << ','
        << io::format_double(mk) << ',' << io::format_double(me) << ',' << m
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Line-oriented key=value run configuration.

namespace io {

struct KeyValues {
  std::map<std::string, std::string, std::less<>> entries;

  const std::string* find(std::string_view key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }
  std::string get(std::string_view key, std::string fallback) const {
    const std::string* v = find(key);
    return v ? *v : std::move(fallback);
  }
};

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "scenario", "family.f", "gamma.f", "zeta.f", "family.g", "gamma.g",
      "zeta.g", "n", "replications", "seed", "estimators", "kernel",
      "bab_kernel", "variant", "nu", "k_min", "k_max", "beta1", "adaptive"};
  return keys;
}

inline ParetoTypeModel model_from_keys(const KeyValues& kv, const char* suffix,
                                       const std::string& where) {
  const std::string family = kv.get(std::string("family.") + suffix, "burr");
  const std::string gamma_key = std::string("gamma.") + suffix;
  const double gamma = parse_double(kv.get(gamma_key, "1"), where);
  if (!(gamma > 0.0))
    throw ValidationError(where + ": " + gamma_key + ": gamma must be positive");
  const double zeta = parse_double(kv.get(std::string("zeta.") + suffix, "1"), where);
  if (family == "burr") {
    if (!(zeta > 0.0))
      throw ValidationError(where + ": zeta must be positive");
    return ParetoTypeModel::burr(gamma, zeta);
  }
  if (family == "frechet") return ParetoTypeModel::frechet(gamma);
  if (family == "exact-pareto") return ParetoTypeModel::exact_pareto(gamma);
  throw ValidationError(where + ": unknown family '" + family + "'");
}

inline std::vector<EstimatorSpec> estimators_from_keys(const KeyValues& kv,
                                                       const std::string& where) {
  const std::string list = kv.get("estimators", "kernel,worms,efg,bab");
  const Kernel kernel = kernel_from_name(kv.get("kernel", "triweight"));
  const BabKernelId bab = bab_kernel_from_name(kv.get("bab_kernel", "bab2"));
  const std::string variant = kv.get("variant", "shifted");
  if (variant != "shifted" && variant != "unshifted")
    throw ValidationError(where + ": variant must be shifted or unshifted");
  const std::string* beta1_raw = kv.find("beta1");
  const std::string* adaptive_raw = kv.find("adaptive");
  std::optional<double> beta1;
  if (beta1_raw) {
    beta1 = parse_double(*beta1_raw, where);
    if (!(*beta1 > 0.0))
      throw ValidationError(where + ": beta1 must be positive");
  }
  bool adaptive = false;
  if (adaptive_raw) {
    if (*adaptive_raw == "true" || *adaptive_raw == "1")
      adaptive = true;
    else if (*adaptive_raw != "false" && *adaptive_raw != "0")
      throw ValidationError(where + ": adaptive must be true or false");
  }
  if (beta1 && adaptive)
    throw ValidationError(where + ": beta1 and adaptive are mutually exclusive");

  std::vector<EstimatorSpec> specs;
  for (std::string_view id : split(list, ',')) {
    id = trim(id);
    if (id.empty()) continue;
    EstimatorSpec spec;
    spec.kind = estimator_from_name(id);
    if (spec.kind == EstimatorKind::kernel && variant == "unshifted")
      spec.kind = EstimatorKind::kernel_unshifted;
    spec.kernel = kernel;
    spec.bab = bab;
    if (spec.kind == EstimatorKind::bias_reduced) {
      if (!beta1 && !adaptive)
        throw ValidationError(where +
                              ": bias-reduced needs beta1=<value> or adaptive=true");
      spec.beta1 = beta1;
    }
    specs.push_back(spec);
  }
  if (specs.empty()) throw ValidationError(where + ": empty estimator list");
  return specs;
}

inline ScenarioConfig scenario_from_keys(const KeyValues& kv,
                                         const std::string& name) {
  const std::string where = "scenario " + name;
  ScenarioConfig config;
  config.name = name;
  const ParetoTypeModel f = model_from_keys(kv, "f", where);
  if (kv.get("family.g", "burr") == "none") {
    config.scheme = CensoringScheme::uncensored_scheme(f);
  } else {
    config.scheme = CensoringScheme::censored(f, model_from_keys(kv, "g", where));
  }
  const long long n = parse_int(kv.get("n", "500"), where);
  if (n < 50) throw ValidationError(where + ": n must be >= 50");
  config.n = static_cast<std::size_t>(n);
  const long long reps = parse_int(kv.get("replications", "200"), where);
  if (reps < 1) throw ValidationError(where + ": replications must be >= 1");
  config.replications = static_cast<std::size_t>(reps);
  config.master_seed =
      static_cast<std::uint64_t>(parse_int(kv.get("seed", "1"), where));
  config.estimators = estimators_from_keys(kv, where);
  const long long k_min = parse_int(kv.get("k_min", "2"), where);
  const long long k_max = parse_int(kv.get("k_max", std::to_string(n - 1)), where);
  if (k_min < 2 || k_max > n - 1 || k_min > k_max)
    throw ValidationError(where + ": need 2 <= k_min <= k_max <= n-1");
  config.k_grid.clear();
  for (long long k = k_min; k <= k_max; ++k)
    config.k_grid.push_back(static_cast<std::size_t>(k));
  config.selection_nu = parse_double(kv.get("nu", "0.3"), where);
  if (!(config.selection_nu >= 0.0 && config.selection_nu <= 0.5))
    throw ValidationError(where + ": nu must lie in [0, 1/2]");
  config.selection_k_min = static_cast<std::size_t>(std::max<long long>(k_min, 10));
  config.selection_k_max = static_cast<std::size_t>(k_max);
  config.validate();
  return config;
}

} // namespace io

/// Parse a simulate run configuration: global key=value defaults followed
/// by one or more "scenario = <name>" blocks. Unknown keys are rejected.
inline std::vector<ScenarioConfig> parse_run_config(std::istream& in,
                                                    const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  io::KeyValues defaults;
  std::vector<std::pair<std::string, io::KeyValues>> blocks;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view trimmed = io::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    const std::string where = name + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos)
      throw ValidationError(where + ": expected key=value");
    const std::string key(io::trim(trimmed.substr(0, eq)));
    const std::string value(io::trim(trimmed.substr(eq + 1)));
    const auto& known = io::known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ValidationError(where + ": unknown key '" + key + "'");
    if (key == "scenario") {
      for (const auto& block : blocks)
        if (block.first == value)
          throw ValidationError(where + ": duplicate scenario '" + value + "'");
      blocks.emplace_back(value, defaults);
    } else if (blocks.empty()) {
      defaults.entries[key] = value;
    } else {
      blocks.back().second.entries[key] = value;
    }
  }
  if (blocks.empty())
    throw ValidationError(name + ": no scenario blocks (need scenario = <name>)");
  std::vector<ScenarioConfig> out;
  out.reserve(blocks.size());
  for (const auto& [scen_name, kv] : blocks)
    out.push_back(io::scenario_from_keys(kv, scen_name));
  return out;
}

} // namespace censtail
