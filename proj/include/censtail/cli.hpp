#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "censtail/io.hpp"

namespace censtail::cli {

namespace detail {

inline CensoredSample load_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file: " + path);
  return read_data_file(in, path);
}

struct EstimateOptions {
  std::string input;
  std::vector<std::string> estimators{"kernel"};
  std::string kernel = "triweight";
  std::string bab_kernel = "bab2";
  std::string variant = "shifted";
  std::size_t k_min = 2;
  std::size_t k_max = 0; // 0: n-1
  std::size_t k_step = 1;
  double beta1 = 0.0;
  bool adaptive = false;
};

inline int run_estimate(const EstimateOptions& opt, std::ostream& out) {
  const CensoredSample sample = load_data(opt.input);
  const TailData data(sample);
  const std::size_t n = data.n();
  const std::size_t k_max = opt.k_max == 0 ? n - 1 : opt.k_max;
  if (opt.k_min < 2 || k_max > n - 1 || opt.k_min > k_max)
    throw ValidationError("need 2 <= k_min <= k_max <= n-1");
  if (opt.k_step < 1) throw ValidationError("k_step must be >= 1");
  if (opt.variant != "shifted" && opt.variant != "unshifted")
    throw ValidationError("variant must be shifted or unshifted");
  std::vector<std::size_t> k_grid;
  for (std::size_t k = opt.k_min; k <= k_max; k += opt.k_step)
    k_grid.push_back(k);

  std::vector<EstimatorPath> paths;
  for (const std::string& id : opt.estimators) {
    EstimatorSpec spec;
    try {
      spec.kind = estimator_from_name(id);
      spec.kernel = kernel_from_name(opt.kernel);
      spec.bab = bab_kernel_from_name(opt.bab_kernel);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    if (spec.kind == EstimatorKind::kernel && opt.variant == "unshifted")
      spec.kind = EstimatorKind::kernel_unshifted;
    if (spec.kind == EstimatorKind::bias_reduced) {
      if (opt.beta1 > 0.0 && opt.adaptive)
        throw ValidationError("--beta1 and --adaptive are mutually exclusive");
      if (opt.beta1 > 0.0)
        spec.beta1 = opt.beta1;
      else if (!opt.adaptive)
        throw ValidationError("bias-reduced needs --beta1 or --adaptive");
    }
    paths.push_back(compute_path(data, spec, k_grid));
  }
  write_path_csv(out, paths);
  return 0;
}

struct SelectKOptions {
  std::string input;
  double nu = 0.3;
  std::size_t k_min = 10;
  std::size_t k_max = std::numeric_limits<std::size_t>::max();
};

inline int run_select_k(const SelectKOptions& opt, std::ostream& out) {
  std::ifstream in(opt.input);
  if (!in) throw ValidationError("cannot open path file: " + opt.input);
  const std::vector<EstimatorPath> paths = read_path_csv(in, opt.input);
  out << "estimator,kernel,nu,k_star,criterion\n";
  for (const EstimatorPath& p : paths) {
    SelectionResult sel;
    try {
      sel = reiss_thomas(p, opt.nu, opt.k_min, opt.k_max);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string(e.what()) + " (" + p.estimator + ")");
    }
    out << p.estimator << ',' << p.kernel << ',' << io::format_double(opt.nu)
        << ',' << sel.k_star << ','
        << io::format_double(sel.criterion_at_kstar) << '\n';
  }
  return 0;
}

struct AsymptoticsOptions {
  std::string family_f = "burr";
  double gamma_f = 0.5;
  double zeta_f = 1.0;
  std::string family_g = "burr";
  double gamma_g = 1.0;
  double zeta_g = 1.0;
  bool uncensored = false;
  std::vector<std::string> kernels{"indicator", "biweight", "triweight",
                                   "quadweight"};
  std::size_t n = 500;
};

inline ParetoTypeModel make_model(const std::string& family, double gamma,
                                  double zeta) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (family == "burr") {
    if (!(zeta > 0.0)) throw ValidationError("zeta must be positive");
    return ParetoTypeModel::burr(gamma, zeta);
  }
  if (family == "frechet") return ParetoTypeModel::frechet(gamma);
  if (family == "exact-pareto") return ParetoTypeModel::exact_pareto(gamma);
  throw ValidationError("unknown family '" + family + "'");
}

inline int run_asymptotics(const AsymptoticsOptions& opt, std::ostream& out) {
  const ParetoTypeModel f = make_model(opt.family_f, opt.gamma_f, opt.zeta_f);
  const CensoringScheme scheme =
      opt.uncensored
          ? CensoringScheme::uncensored_scheme(f)
          : CensoringScheme::censored(
                f, make_model(opt.family_g, opt.gamma_g, opt.zeta_g));
  const AsymptoticContext ctx = AsymptoticContext::from(scheme);

  out << "kernel,sigma2,m_k,sigma2_star,g,h,phi,k_star,k_scan\n";
  for (const std::string& name : opt.kernels) {
    Kernel kernel;
    try {
      kernel = kernel_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    auto column = [&](auto&& fn) -> std::string {
      try {
        return io::format_double(fn());
      } catch (const std::domain_error&) {
        return "invalid";
      }
    };
    const std::string s2 = column([&] { return sigma2(kernel, ctx); });
    const std::string mk = column([&] { return mean_bias_constant(kernel, ctx); });
    const std::string s2s = column([&] { return sigma2_star(kernel, ctx); });
    const std::string g = column([&] {
      const double t = ctx.hall_f.beta * ctx.gamma1;
      if (!std::isfinite(t)) throw std::domain_error("no second-order term");
      return bias_ratio_g(kernel, t);
    });
    const std::string h = column([&] { return variance_ratio_h(kernel, ctx.p); });
    const std::string phi = column([&] {
      return phi_optimal(kernel, ctx.p, ctx.alpha());
    });
    const std::string k_star = column([&] {
      return static_cast<double>(optimal_k_kernel(kernel, ctx, opt.n).k);
    });
    const std::string k_scan = column([&] {
      if (mean_bias_constant(kernel, ctx) == 0.0)
        throw std::domain_error("no interior optimum");
      return static_cast<double>(amse_argmin(kernel, ctx, opt.n));
    });
    out << kernel.name() << ',' << s2 << ',' << mk << ',' << s2s << ',' << g
        << ',' << h << ',' << phi << ',' << k_star << ',' << k_scan << '\n';
  }
  return 0;
}

struct SimulateOptions {
  std::string config;
  std::string output_dir = ".";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

inline int run_simulate(const SimulateOptions& opt, std::ostream& out) {
  std::ifstream in(opt.config);
  if (!in) throw ValidationError("cannot open config file: " + opt.config);
  std::vector<ScenarioConfig> scenarios = parse_run_config(in, opt.config);
  std::filesystem::create_directories(opt.output_dir);
  bool header = true;
  for (ScenarioConfig& scenario : scenarios) {
    if (opt.seed) scenario.master_seed = *opt.seed;
    const SimulationSummary summary = run_scenario(scenario, opt.threads);
    const std::filesystem::path dir(opt.output_dir);
    {
      std::ofstream file(dir / (scenario.name + "_summary.csv"),
                         std::ios::binary);
      if (!file) throw std::runtime_error("cannot write summary CSV");
      write_summary_csv(file, summary);
    }
    {
      std::ofstream file(dir / (scenario.name + "_smoothness.csv"),
                         std::ios::binary);
      if (!file) throw std::runtime_error("cannot write smoothness CSV");
      write_smoothness_csv(file, summary);
    }
    write_kstar_table(out, summary, header);
    header = false;
  }
  return 0;
}

} // namespace detail

/// Entry point shared by the binary and the tests: argv-style arguments
/// (without the program name), explicit output and error streams.
/// Exit codes: 0 success, 2 validation failure, 3 numerical failure.
inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"kernel tail-index estimation for right-censored heavy-tailed data"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = 1;
  std::string output_dir = ".";
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
  app.add_option("--output-dir", output_dir, "directory for output files");
  app.add_option("--threads", threads, "worker threads (0 = auto)");

  detail::EstimateOptions est;
  CLI::App* estimate = app.add_subcommand("estimate", "estimator paths for a data file");
  estimate->add_option("input", est.input, "censored data CSV (z,delta)")->required();
  estimate->add_option("--estimator", est.estimators, "estimator ids");
  estimate->add_option("--kernel", est.kernel, "kernel id");
  estimate->add_option("--bab-kernel", est.bab_kernel, "two-argument kernel id");
  estimate->add_option("--variant", est.variant, "shifted|unshifted");
  estimate->add_option("--k-min", est.k_min, "smallest k");
  estimate->add_option("--k-max", est.k_max, "largest k (0 = n-1)");
  estimate->add_option("--k-step", est.k_step, "k stride");
  estimate->add_option("--beta1", est.beta1, "known beta1 for bias reduction");
  estimate->add_flag("--adaptive", est.adaptive, "adaptive tau1 grid search");

  detail::SelectKOptions sel;
  CLI::App* select_k = app.add_subcommand("select-k", "Reiss-Thomas threshold choice");
  select_k->add_option("input", sel.input, "estimator path CSV")->required();
  select_k->add_option("--nu", sel.nu, "criterion exponent in [0, 1/2]");
  select_k->add_option("--k-min", sel.k_min, "smallest candidate k");
  select_k->add_option("--k-max", sel.k_max, "largest candidate k");

  detail::AsymptoticsOptions asym;
  CLI::App* asymptotics = app.add_subcommand("asymptotics", "limit-law constants table");
  asymptotics->add_option("--family-f", asym.family_f, "censored family");
  asymptotics->add_option("--gamma-f", asym.gamma_f, "censored tail index");
  asymptotics->add_option("--zeta-f", asym.zeta_f, "censored Burr shape");
  asymptotics->add_option("--family-g", asym.family_g, "censoring family");
  asymptotics->add_option("--gamma-g", asym.gamma_g, "censoring tail index");
  asymptotics->add_option("--zeta-g", asym.zeta_g, "censoring Burr shape");
  asymptotics->add_flag("--uncensored", asym.uncensored, "no censoring");
  asymptotics->add_option("--kernel", asym.kernels, "kernel ids");
  asymptotics->add_option("--n", asym.n, "sample size for k*");

  detail::SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo scenario runs");
  simulate->add_option("--config", sim.config, "run configuration file")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (estimate->parsed()) return detail::run_estimate(est, out);
    if (select_k->parsed()) return detail::run_select_k(sel, out);
    if (asymptotics->parsed()) return detail::run_asymptotics(asym, out);
    if (simulate->parsed()) {
      sim.output_dir = output_dir;
      sim.threads = threads;
      if (seed_opt->count() > 0) sim.seed = seed_value;
      return detail::run_simulate(sim, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

} // namespace censtail::cli
