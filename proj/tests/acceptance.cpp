// Acceptance suite: every criterion runs at its stated tolerance and prints
// one PASS/FAIL line with the measured quantities.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "censtail/cli.hpp"
#include "censtail/io.hpp"
#include "censtail/montecarlo.hpp"

using namespace censtail;

namespace {

namespace fs = std::filesystem;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[criterion %02d] %s  %s  (%.1fs)\n", criterion,
              pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
}

const std::vector<TailData>& shared_samples() {
  static const std::vector<TailData> samples = [] {
    const auto scheme = CensoringScheme::censored(
        ParetoTypeModel::burr(0.5, 1.0), ParetoTypeModel::burr(1.0, 1.0));
    std::vector<TailData> out;
    out.reserve(100);
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      out.emplace_back(sample_censored(scheme, 200, 10000 + seed));
    return out;
  }();
  return samples;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

} // namespace

TEST_CASE("criterion 01: indicator kernel reduction") {
  Timer timer;
  double max_shifted = 0.0, max_unshifted = 0.0;
  for (const TailData& d : shared_samples())
    for (std::size_t k = 2; k <= 150; ++k) {
      const Estimate w = worms(d, k);
      const Estimate kw =
          kernel_estimator(d, k, kernel_indicator, KernelVariant::shifted);
      REQUIRE(w.defined() == kw.defined());
      if (w.defined())
        max_shifted = std::max(max_shifted, std::abs(w.value - kw.value));
      const Estimate wt = worms_tilde(d, k);
      const Estimate kwu =
          kernel_estimator(d, k, kernel_indicator, KernelVariant::unshifted);
      REQUIRE(wt.defined() == kwu.defined());
      if (wt.defined())
        max_unshifted = std::max(max_unshifted, std::abs(wt.value - kwu.value));
    }
  const bool pass = max_shifted <= 1e-12 && max_unshifted <= 1e-12;
  report(1, pass,
         "max |kernel(K1,shifted)-worms| = " + fmt(max_shifted) +
             ", max |kernel(K1,unshifted)-worms~| = " + fmt(max_unshifted),
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 02: product-limit jump identity") {
  Timer timer;
  double max_residual = 0.0;
  for (const TailData& d : shared_samples())
    max_residual =
        std::max(max_residual, verify_km_jump_identity(d.sample, d.n() - 1));
  const bool pass = max_residual <= 1e-12;
  report(2, pass, "max residual = " + fmt(max_residual), timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 03: telescoped and spacing forms agree") {
  Timer timer;
  double max_gap = 0.0;
  for (const TailData& d : shared_samples())
    for (const Kernel& kern :
         {kernel_biweight, kernel_triweight, kernel_quadweight})
      for (std::size_t k = 2; k <= 150; ++k) {
        const Estimate direct =
            kernel_estimator(d, k, kern, KernelVariant::unshifted);
        const Estimate tele = kernel_estimator_telescoped(d, k, kern);
        REQUIRE(direct.defined() == tele.defined());
        if (direct.defined())
          max_gap = std::max(max_gap, std::abs(direct.value - tele.value));
      }
  const bool pass = max_gap <= 1e-12;
  report(3, pass, "max |direct-telescoped| = " + fmt(max_gap), timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 04: no-censoring reductions") {
  Timer timer;
  double max_efg = 0.0, max_cdm = 0.0, max_bab = 0.0;
  bool phat_ok = true;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const TailData d(sample_censored(
        CensoringScheme::uncensored_scheme(ParetoTypeModel::burr(0.5, 1.0)),
        200, 20000 + seed));
    for (std::size_t k = 2; k <= 150; ++k) {
      if (phat(d, k) != 1.0) phat_ok = false;
      const double h = hill(d, k);
      max_efg = std::max(max_efg, std::abs(efg(d, k).value - h));
      max_cdm = std::max(
          max_cdm, std::abs(cdm_kernel(d, k, kernel_indicator) -
                            static_cast<double>(k) / (k + 1.0) * h));
      max_bab = std::max(
          max_bab, std::abs(bab_kernel_estimator(d, k, BabKernelId::bab0).value -
                            efg(d, k).value));
    }
  }
  const bool pass =
      phat_ok && max_efg <= 1e-12 && max_cdm <= 1e-12 && max_bab <= 1e-12;
  report(4, pass,
         "p-hat==1: " + std::string(phat_ok ? "yes" : "no") +
             ", |efg-hill| = " + fmt(max_efg) + ", |cdm(K1)-(k/(k+1))hill| = " +
             fmt(max_cdm) + ", |bab(K0)-efg| = " + fmt(max_bab),
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 05: eta/rho closed forms and bias cancellation") {
  Timer timer;
  const EtaIntegrals e = eta_integrals(kernel_indicator, -1.0);
  const double rho_val = rho(kernel_indicator, -1.0);
  const double worst_eta =
      std::max({std::abs(e.eta1 - 0.25), std::abs(e.eta2 - 0.5),
                std::abs(e.eta3 - 1.0 / 6.0), std::abs(rho_val - 12.0)});
  double worst_cancel = 0.0;
  for (const Kernel& kern :
       {kernel_indicator, kernel_biweight, kernel_triweight, kernel_quadweight})
    for (int i = 1; i <= 30; ++i) {
      const double tau = -0.1 * i;
      const EtaIntegrals et = eta_integrals(kern, tau);
      const double r = rho(kern, tau);
      worst_cancel = std::max(
          worst_cancel, std::abs((1.0 + et.eta1 * r) * et.eta2 - r * et.eta3));
    }
  const bool pass = worst_eta <= 1e-8 && worst_cancel <= 1e-10;
  report(5, pass,
         "max closed-form gap = " + fmt(worst_eta) +
             ", max cancellation residual = " + fmt(worst_cancel),
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 06: limit-law constants of the indicator kernel") {
  Timer timer;
  double worst_sigma = 0.0;
  for (double p = 0.55; p <= 0.951; p += 0.05)
    for (double gamma1 : {0.5, 1.0, 2.0}) {
      AsymptoticContext ctx;
      ctx.gamma1 = gamma1;
      ctx.p = p;
      const double expected = p * gamma1 * gamma1 / (2.0 * p - 1.0);
      worst_sigma = std::max(worst_sigma,
                             std::abs(sigma2(kernel_indicator, ctx) - expected));
    }
  double worst_m = 0.0;
  const double grid[][4] = {{0.5, 1.0, 1.0, 1.0},
                            {1.0, 1.0, 2.0, 1.0},
                            {0.5, 1.0, 1.0, 0.5},
                            {0.4, 2.0, 1.0, 1.0}};
  for (const auto& row : grid) {
    const AsymptoticContext ctx = AsymptoticContext::from(
        CensoringScheme::censored(ParetoTypeModel::burr(row[0], row[1]),
                                  ParetoTypeModel::burr(row[2], row[3])));
    REQUIRE(ctx.hall_f.beta <= ctx.hall_g.beta);
    const double g = ctx.composite.gamma;
    const double reference = -g * g * ctx.hall_f.beta * ctx.hall_f.D *
                             std::pow(ctx.composite.C, -g * ctx.hall_f.beta) /
                             ctx.p / (1.0 + ctx.hall_f.beta * g / ctx.p);
    worst_m = std::max(worst_m, std::abs(mean_bias_constant(kernel_indicator, ctx) -
                                         reference));
  }
  const bool pass = worst_sigma <= 1e-8 && worst_m <= 1e-8;
  report(6, pass,
         "max sigma2 gap = " + fmt(worst_sigma) + ", max m gap = " + fmt(worst_m),
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 07: bias and variance ratio orderings") {
  Timer timer;
  bool pass = true;
  for (double t = 0.1; t <= 5.0 + 1e-9; t += 0.1) {
    const double g2 = bias_ratio_g(kernel_biweight, t);
    const double g3 = bias_ratio_g(kernel_triweight, t);
    const double g4 = bias_ratio_g(kernel_quadweight, t);
    if (!(g2 < 1.0 && g3 < 1.0 && g4 < 1.0 && g4 < g3 && g3 < g2)) pass = false;
  }
  for (double p = 0.55; p <= 0.951; p += 0.05) {
    const double h2 = variance_ratio_h(kernel_biweight, p);
    const double h3 = variance_ratio_h(kernel_triweight, p);
    const double h4 = variance_ratio_h(kernel_quadweight, p);
    if (!(h2 > 1.0 && h3 > 1.0 && h4 > 1.0 && h4 > h3 && h3 > h2)) pass = false;
  }
  report(7, pass, "g < 1 with g4 < g3 < g2; h > 1 with h4 > h3 > h2",
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 08: power-spacing statistic converges to the estimator") {
  Timer timer;
  double worst_rel = 0.0, ratio_lo = 10.0, ratio_hi = 0.0;
  const auto scheme = CensoringScheme::censored(ParetoTypeModel::burr(0.5, 1.0),
                                                ParetoTypeModel::burr(1.0, 1.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TailData d(sample_censored(scheme, 200, 30000 + seed));
    const std::size_t k = 100;
    const double base =
        kernel_estimator(d, k, kernel_triweight, KernelVariant::shifted).value;
    const double gap1 =
        std::abs(t_statistic(d, k, 1e-4, kernel_triweight).value - base);
    const double gap2 =
        std::abs(t_statistic(d, k, 5e-5, kernel_triweight).value - base);
    worst_rel = std::max(worst_rel, gap1 / std::abs(base));
    const double ratio = gap1 / gap2;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }
  const bool pass = worst_rel <= 1e-3 && ratio_lo >= 1.5 && ratio_hi <= 4.0;
  report(8, pass,
         "max relative gap = " + fmt(worst_rel) + ", halving ratio in [" +
             fmt(ratio_lo) + ", " + fmt(ratio_hi) + "]",
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 09: asymptotic normality at desk scale") {
  Timer timer;
  bool pass = true;
  std::string detail;
  for (const Kernel& kern : {kernel_triweight, kernel_indicator}) {
    ScenarioConfig config;
    config.scheme =
        CensoringScheme::uncensored_scheme(ParetoTypeModel::exact_pareto(1.0));
    config.n = 2000;
    config.replications = 500;
    config.master_seed = 11;
    EstimatorSpec spec;
    spec.kind = EstimatorKind::kernel;
    spec.kernel = kern;
    config.estimators = {spec};
    const NormalityCheck nc = normality_check(config, 100, 2);
    if (!(nc.ratio >= 0.75 && nc.ratio <= 1.25)) pass = false;
    detail += std::string(kern.name()) + " ratio = " + fmt(nc.ratio) + "  ";
  }
  report(9, pass, detail, timer.seconds());
  CHECK(pass);
}

// The bias-reduced construction measurably moves the mean away from the
// target on this scenario: its power-spacing statistic does not exhibit the
// second-order recentering the correction assumes, so the bracket comes out
// with the wrong sign. Implemented exactly as defined and reported honestly.
TEST_CASE("criterion 10: bias reduction at the prescribed scale") {
  Timer timer;
  const auto scheme = CensoringScheme::censored(ParetoTypeModel::burr(0.5, 1.0),
                                                ParetoTypeModel::burr(1.0, 1.0));
  const std::size_t n = 500;
  const int reps = 200;
  std::vector<std::size_t> ks;
  for (std::size_t k = 100; k <= 300; ++k) ks.push_back(k);
  std::vector<double> base_sum(ks.size(), 0.0), red_sum(ks.size(), 0.0);
  std::vector<double> base_mse(ks.size(), 0.0), red_mse(ks.size(), 0.0);
  std::vector<int> counts(ks.size(), 0);
  for (int rep = 0; rep < reps; ++rep) {
    const TailData d(sample_censored(scheme, n, 50000 + rep));
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const Estimate base =
          kernel_estimator(d, ks[i], kernel_triweight, KernelVariant::shifted);
      const Estimate red =
          bias_reduced_known_beta1(d, ks[i], kernel_triweight, 1.0);
      if (!base.defined() || !red.defined()) continue;
      base_sum[i] += base.value;
      red_sum[i] += red.value;
      base_mse[i] += (base.value - 0.5) * (base.value - 0.5);
      red_mse[i] += (red.value - 0.5) * (red.value - 0.5);
      ++counts[i];
    }
  }
  double base_abs_bias = 0.0, red_abs_bias = 0.0, base_m = 0.0, red_m = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    base_abs_bias += std::abs(base_sum[i] / counts[i] - 0.5);
    red_abs_bias += std::abs(red_sum[i] / counts[i] - 0.5);
    base_m += base_mse[i] / counts[i];
    red_m += red_mse[i] / counts[i];
  }
  base_abs_bias /= static_cast<double>(ks.size());
  red_abs_bias /= static_cast<double>(ks.size());
  base_m /= static_cast<double>(ks.size());
  red_m /= static_cast<double>(ks.size());
  const bool bias_improves = red_abs_bias < base_abs_bias;
  const bool mse_bounded = red_m <= 2.0 * base_m;
  report(10, bias_improves && mse_bounded,
         "mean |bias|: reduced = " + fmt(red_abs_bias) + " vs base = " +
             fmt(base_abs_bias) + "; MSE ratio = " + fmt(red_m / base_m),
         timer.seconds());
  CHECK_MESSAGE(bias_improves,
                "the bias-reduced estimator does not lower the mean absolute "
                "bias on the prescribed scenario");
  CHECK_MESSAGE(mse_bounded, "MSE inflation exceeds the 2x bound");
}

TEST_CASE("criterion 11: smoothness dominance of the kernel path") {
  Timer timer;
  bool pass = true;
  std::string detail;
  for (double gamma1 : {0.5, 1.0}) {
    const double gamma2 = gamma1 == 0.5 ? 1.0 : 0.5;
    ScenarioConfig config;
    config.name = "tv";
    config.scheme = CensoringScheme::censored(
        ParetoTypeModel::burr(gamma1, 1.0), ParetoTypeModel::burr(gamma2, 1.0));
    config.n = 500;
    config.replications = 200;
    config.master_seed = 21;
    EstimatorSpec kernel_spec;
    kernel_spec.kind = EstimatorKind::kernel;
    kernel_spec.kernel = kernel_triweight;
    EstimatorSpec worms_spec;
    worms_spec.kind = EstimatorKind::worms;
    config.estimators = {kernel_spec, worms_spec};
    config.k_grid.clear();
    for (std::size_t k = 10; k <= 250; ++k) config.k_grid.push_back(k);
    const SimulationSummary s = run_scenario(config, 2);
    int smoother = 0, total = 0;
    for (std::size_t r = 0; r < s.raw.size(); ++r) {
      EstimatorPath kp, wp;
      kp.k_values = wp.k_values = config.k_grid;
      kp.estimates = s.raw[r][0];
      wp.estimates = s.raw[r][1];
      if (kp.defined_count() < 2 || wp.defined_count() < 2) continue;
      ++total;
      if (tv_smoothness(kp) < tv_smoothness(wp)) ++smoother;
    }
    const double fraction = static_cast<double>(smoother) / total;
    if (!(fraction >= 0.8)) pass = false;
    detail += "p=" + std::string(gamma1 == 0.5 ? "2/3" : "1/3") +
              " fraction = " + fmt(fraction) + "  ";
  }
  report(11, pass, detail, timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 12: optimal-k consistency") {
  Timer timer;
  long long worst = 0;
  const std::vector<AsymptoticContext> ctxs = {
      AsymptoticContext::from(CensoringScheme::censored(
          ParetoTypeModel::burr(0.5, 1.0), ParetoTypeModel::burr(1.0, 1.0))),
      AsymptoticContext::from(CensoringScheme::censored(
          ParetoTypeModel::burr(1.0, 1.0), ParetoTypeModel::burr(2.0, 1.0))),
      AsymptoticContext::from(CensoringScheme::censored(
          ParetoTypeModel::burr(0.5, 2.0), ParetoTypeModel::burr(1.0, 1.0))),
      AsymptoticContext::from(CensoringScheme::censored(
          ParetoTypeModel::burr(0.5, 1.0), ParetoTypeModel::frechet(1.0)))};
  for (const auto& ctx : ctxs)
    for (const Kernel& kern :
         {kernel_indicator, kernel_biweight, kernel_triweight, kernel_quadweight})
      for (std::size_t n : {200, 500, 2000}) {
        const OptimalK opt = optimal_k_kernel(kern, ctx, n);
        const std::size_t scan = amse_argmin(kern, ctx, n);
        worst = std::max(worst, std::llabs(static_cast<long long>(opt.k) -
                                           static_cast<long long>(scan)));
      }
  const bool ratio_exact = optimal_k_ratio(kernel_indicator, ctxs[0]) == 1.0;
  const bool pass = worst <= 2 && ratio_exact;
  report(12, pass,
         "max |closed form - scan| = " + std::to_string(worst) +
             ", ratio(K1) exact = " + (ratio_exact ? "yes" : "no"),
         timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 13: simulate command determinism across thread counts") {
  Timer timer;
  const fs::path root =
      fs::temp_directory_path() / "censtail_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config_path = root / "run.cfg";
  {
    std::ofstream config(config_path, std::ios::binary);
    config << "n = 150\nreplications = 40\nseed = 33\n"
              "estimators = kernel,worms,efg\nkernel = triweight\n"
              "scenario = weak\ngamma.f = 0.5\ngamma.g = 1.0\n"
              "scenario = strong\ngamma.f = 1.0\ngamma.g = 0.5\n";
  }
  auto run_once = [&](const std::string& tag, const std::string& threads) {
    const fs::path dir = root / tag;
    std::ostringstream out, err;
    const int code = cli::run_cli({"--output-dir", dir.string(), "--threads",
                                   threads, "simulate", "--config",
                                   config_path.string()},
                                  out, err);
    REQUIRE(code == 0);
    std::string blob = out.str();
    for (const char* scenario : {"weak", "strong"})
      for (const char* kind : {"_summary.csv", "_smoothness.csv"}) {
        std::ifstream file(dir / (scenario + std::string(kind)),
                           std::ios::binary);
        REQUIRE(file.good());
        std::ostringstream buf;
        buf << file.rdbuf();
        blob += buf.str();
      }
    return blob;
  };
  const std::string t1_a = run_once("t1a", "1");
  const std::string t1_b = run_once("t1b", "1");
  const std::string t8_a = run_once("t8a", "8");
  const std::string t8_b = run_once("t8b", "8");
  const bool pass = t1_a == t1_b && t8_a == t8_b && t1_a == t8_a;
  report(13, pass,
         std::string("rerun identical: ") + (t1_a == t1_b ? "yes" : "no") +
             " (1 thread), " + (t8_a == t8_b ? "yes" : "no") +
             " (8 threads); cross-thread identical: " +
             (t1_a == t8_a ? "yes" : "no"),
         timer.seconds());
  fs::remove_all(root);
  CHECK(pass);
}
