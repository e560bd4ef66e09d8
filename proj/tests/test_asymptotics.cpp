#include <doctest.h>

#include <cmath>
#include <vector>

#include "censtail/asymptotics.hpp"
#include "oracles.hpp"

using namespace censtail;

namespace {

AsymptoticContext burr_burr(double gamma1, double gamma2, double zeta1 = 1.0,
                            double zeta2 = 1.0) {
  return AsymptoticContext::from(
      CensoringScheme::censored(ParetoTypeModel::burr(gamma1, zeta1),
                                ParetoTypeModel::burr(gamma2, zeta2)));
}

// context with prescribed (gamma1, p) and unit Hall constants, for the
// closed-form spot checks
AsymptoticContext synthetic(double gamma1, double p, double beta1, double D1) {
  AsymptoticContext ctx;
  ctx.gamma1 = gamma1;
  ctx.p = p;
  ctx.hall_f = {gamma1, 1.0, D1, beta1, -beta1 * gamma1};
  ctx.hall_g = {gamma1 * p / (1.0 - p), 1.0, D1, beta1 + 1.0, -1.0};
  ctx.composite.gamma = gamma1 * p;
  ctx.composite.C = 1.0;
  ctx.composite.beta_star = beta1;
  ctx.composite.D_star = D1;
  ctx.composite.p = p;
  return ctx;
}

} // namespace

TEST_CASE("sigma2 matches the indicator closed form") {
  for (double p = 0.55; p <= 0.96; p += 0.05)
    for (double gamma1 : {0.5, 1.0, 2.0}) {
      const AsymptoticContext ctx = synthetic(gamma1, p, 1.0, -1.0);
      CHECK(sigma2(kernel_indicator, ctx) ==
            doctest::Approx(p * gamma1 * gamma1 / (2.0 * p - 1.0)).epsilon(1e-8));
    }
  AsymptoticContext zero = synthetic(0.0, 0.75, 1.0, -1.0);
  CHECK(sigma2(kernel_triweight, zero) == 0.0);
  AsymptoticContext bad = synthetic(1.0, 0.5, 1.0, -1.0);
  CHECK_THROWS_AS(sigma2(kernel_triweight, bad), std::domain_error);
}

TEST_CASE("sigma2 of the triweight kernel at p = 1 (Wallis oracle)") {
  const AsymptoticContext ctx = AsymptoticContext::from(
      CensoringScheme::uncensored_scheme(ParetoTypeModel::burr(1.0, 1.0)));
  // (35/16)^2 * 12!! / 13!! = 700/429
  CHECK(sigma2(kernel_triweight, ctx) ==
        doctest::Approx(700.0 / 429.0).epsilon(1e-8));
}

TEST_CASE("mean bias constant") {
  // indicator anchor: -gamma^2 beta1 D1 C^{-gamma beta1} / (p (1 + beta1 gamma / p))
  for (double gamma1 : {0.5, 1.0})
    for (double gamma2 : {1.0, 2.0}) {
      const AsymptoticContext ctx = burr_burr(gamma1, gamma2);
      const double g = ctx.composite.gamma;
      const double p = ctx.p;
      const double beta1 = ctx.hall_f.beta;
      const double D1 = ctx.hall_f.D;
      const double anchor = -g * g * beta1 * D1 *
                            std::pow(ctx.composite.C, -g * beta1) / p /
                            (1.0 + beta1 * g / p);
      CHECK(mean_bias_constant(kernel_indicator, ctx) ==
            doctest::Approx(anchor).epsilon(1e-8));
      CHECK(mean_bias_constant_indicator(ctx) ==
            doctest::Approx(anchor).epsilon(1e-12));
    }

  // beta1 > beta2 gates the bias off
  const AsymptoticContext gated = burr_burr(0.5, 1.0, 0.5, 2.0);
  CHECK(gated.hall_f.beta > gated.hall_g.beta);
  CHECK(mean_bias_constant(kernel_triweight, gated) == 0.0);

  const AsymptoticContext ctx = burr_burr(1.0, 2.0); // beta1 gamma1 = 1
  CHECK(std::abs(mean_bias_constant(kernel_triweight, ctx)) <
        std::abs(mean_bias_constant(kernel_indicator, ctx)));
}

TEST_CASE("bias and variance ratios tie the modules together") {
  const AsymptoticContext ctx = burr_burr(0.5, 1.0);
  const double t = ctx.hall_f.beta * ctx.gamma1;
  for (const Kernel& k : {kernel_biweight, kernel_triweight, kernel_quadweight}) {
    CHECK(std::abs(mean_bias_constant(k, ctx)) /
              std::abs(mean_bias_constant(kernel_indicator, ctx)) ==
          doctest::Approx(bias_ratio_g(k, t)).epsilon(1e-8));
    CHECK(sigma2(k, ctx) / sigma2(kernel_indicator, ctx) ==
          doctest::Approx(variance_ratio_h(k, ctx.p)).epsilon(1e-8));
  }
}

TEST_CASE("sigma2_star closed-form spot value") {
  // gamma1 = 1, p = 2/3, tau1 = -1: eta1 = 1/4, rho = 12, and
  // (2/3) int t^{-1/2} (4 - 12 t)^2 dt = 256/15
  const AsymptoticContext ctx = AsymptoticContext::from(CensoringScheme::censored(
      ParetoTypeModel::burr(1.0, 1.0), ParetoTypeModel::burr(2.0, 1.0)));
  CHECK(ctx.p == doctest::Approx(2.0 / 3.0));
  CHECK(ctx.hall_f.tau == doctest::Approx(-1.0));
  CHECK(sigma2_star(kernel_indicator, ctx) ==
        doctest::Approx(256.0 / 15.0).epsilon(1e-8));

  for (const Kernel& k : {kernel_biweight, kernel_triweight, kernel_quadweight}) {
    const double v = sigma2_star(k, ctx);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }

  const AsymptoticContext pareto = AsymptoticContext::from(
      CensoringScheme::uncensored_scheme(ParetoTypeModel::exact_pareto(1.0)));
  CHECK_THROWS_AS(sigma2_star(kernel_triweight, pareto), std::domain_error);

  AsymptoticContext zero = synthetic(0.0, 0.75, 1.0, -1.0);
  CHECK(sigma2_star(kernel_triweight, zero) == 0.0);
}

TEST_CASE("amse shape") {
  // no bias term: strictly decreasing in k
  const AsymptoticContext gated = burr_burr(0.5, 1.0, 0.5, 2.0);
  const std::size_t n = 200;
  const double s2 = sigma2(kernel_triweight, gated);
  CHECK(amse(kernel_triweight, gated, 1, n) == doctest::Approx(s2));
  CHECK(amse(kernel_triweight, gated, n - 1, n) ==
        doctest::Approx(s2 / static_cast<double>(n - 1)));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < n; k += 10) {
    const double v = amse(kernel_triweight, gated, k, n);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("amse argmin matches an independently coded scan") {
  const AsymptoticContext ctx = burr_burr(0.5, 1.0);
  const std::size_t n = 500;
  const double s2 = sigma2(kernel_triweight, ctx);
  const double m = mean_bias_constant(kernel_triweight, ctx);
  const double rate = 2.0 * ctx.composite.gamma * ctx.composite.beta_star;
  std::size_t best_k = 2;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= n - 1; ++k) {
    const double v = s2 / static_cast<double>(k) +
                     std::pow(static_cast<double>(k) / n, rate) * m * m;
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  CHECK(amse_argmin(kernel_triweight, ctx, n) == best_k);
  for (std::size_t k : {10, 100, 400})
    CHECK(amse(kernel_triweight, ctx, k, n) ==
          doctest::Approx(s2 / static_cast<double>(k) +
                          std::pow(static_cast<double>(k) / n, rate) * m * m)
              .epsilon(1e-14));
}

TEST_CASE("optimal k agrees with the exhaustive scan") {
  const std::vector<AsymptoticContext> ctxs = {
      burr_burr(0.5, 1.0), burr_burr(1.0, 2.0), burr_burr(0.5, 1.0, 2.0, 1.0),
      AsymptoticContext::from(CensoringScheme::censored(
          ParetoTypeModel::burr(0.5, 1.0), ParetoTypeModel::frechet(1.0)))};
  for (const auto& ctx : ctxs)
    for (const Kernel& k :
         {kernel_indicator, kernel_biweight, kernel_triweight, kernel_quadweight})
      for (std::size_t n : {200, 500, 2000}) {
        const OptimalK opt = optimal_k_kernel(k, ctx, n);
        const std::size_t scan = amse_argmin(k, ctx, n);
        const long long diff = static_cast<long long>(opt.k) -
                               static_cast<long long>(scan);
        CHECK(std::abs(diff) <= 2);
      }
}

TEST_CASE("optimal k for the unsmoothed estimator is the indicator case") {
  for (const auto& ctx : {burr_burr(0.5, 1.0), burr_burr(1.0, 2.0)})
    for (std::size_t n : {200, 500, 1000, 5000})
      CHECK(optimal_k_worms(ctx, n).k == optimal_k_kernel(kernel_indicator, ctx, n).k);
}

TEST_CASE("optimal k error and clamping behavior") {
  const AsymptoticContext pareto = AsymptoticContext::from(
      CensoringScheme::uncensored_scheme(ParetoTypeModel::exact_pareto(1.0)));
  CHECK_THROWS_AS(optimal_k_kernel(kernel_triweight, pareto, 500),
                  std::domain_error);
  const AsymptoticContext gated = burr_burr(0.5, 1.0, 0.5, 2.0);
  CHECK_THROWS_AS(optimal_k_kernel(kernel_triweight, gated, 500),
                  std::domain_error);
  const OptimalK clamped = optimal_k_kernel(kernel_triweight, burr_burr(0.5, 1.0), 6);
  CHECK(clamped.clamped);
  CHECK(clamped.k == 5);
}

TEST_CASE("optimal k ratio") {
  const AsymptoticContext ctx = burr_burr(0.5, 1.0);
  CHECK(optimal_k_ratio(kernel_indicator, ctx) == 1.0);
  for (const Kernel& k : {kernel_biweight, kernel_triweight, kernel_quadweight}) {
    const double r = optimal_k_ratio(k, ctx);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
  }
}

TEST_CASE("bias cancellation identity inside sigma2_star") {
  for (const Kernel& k :
       {kernel_indicator, kernel_biweight, kernel_triweight, kernel_quadweight})
    for (double tau = -0.1; tau >= -3.0 - 1e-9; tau -= 0.1) {
      const EtaIntegrals e = eta_integrals(k, tau);
      const double r = rho(k, tau);
      CHECK(std::abs((1.0 + e.eta1 * r) * e.eta2 - r * e.eta3) <= 1e-10);
    }
}

TEST_CASE("adaptive and fixed quadratures agree on the variance constants") {
  const AsymptoticContext ctx = burr_burr(0.5, 1.0);
  for (const Kernel& k :
       {kernel_indicator, kernel_biweight, kernel_triweight, kernel_quadweight}) {
    CHECK(sigma2(k, ctx, quad::Rule::adaptive) ==
          doctest::Approx(sigma2(k, ctx, quad::Rule::gauss50)).epsilon(1e-9));
    CHECK(mean_bias_constant(k, ctx, quad::Rule::adaptive) ==
          doctest::Approx(mean_bias_constant(k, ctx, quad::Rule::gauss50))
              .epsilon(1e-9));
    CHECK(sigma2_star(k, ctx, quad::Rule::adaptive) ==
          doctest::Approx(sigma2_star(k, ctx, quad::Rule::gauss50)).epsilon(1e-9));
  }
}

TEST_CASE("sigma2_star with an independent oracle") {
  const AsymptoticContext ctx = burr_burr(1.0, 2.0); // p = 2/3, tau1 = -1
  const Kernel k = kernel_triweight;
  const EtaIntegrals e = eta_integrals(k, -1.0);
  const double r = rho(k, -1.0);
  // substitution v = s^{1/2} removes the t^{-1/2} weight:
  // int t^{-1/2} w(t)^2 K(t)^2 dt = 2 int w(v^2)^2 K(v^2)^2 dv
  const double integral = 2.0 * oracle::integrate(
      [&](double v) {
        const double t = v * v;
        const double w = (1.0 + e.eta1 * r) - r * t;
        const double kv = k.eval(t);
        return w * w * kv * kv;
      },
      0.0, 1.0);
  CHECK(sigma2_star(k, ctx) ==
        doctest::Approx(ctx.p * integral).epsilon(1e-8));
}
