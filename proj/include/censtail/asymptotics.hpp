#pragma once

#include <cmath>
#include <stdexcept>

#include "censtail/kernels.hpp"
#include "censtail/models.hpp"

namespace censtail {

/// Everything the limit-law constants need about a censoring scheme.
struct AsymptoticContext {
  double gamma1 = 1.0;
  double p = 1.0;
  HallConstants hall_f;
  HallConstants hall_g;
  CompositeTail composite;

  static AsymptoticContext from(const CensoringScheme& scheme) {
    AsymptoticContext ctx;
    ctx.gamma1 = scheme.gamma1();
    ctx.p = scheme.p();
    ctx.hall_f = hall_constants(scheme.f_model);
    ctx.hall_g = scheme.uncensored
                     ? HallConstants{scheme.f_model.gamma, 1.0, 0.0,
                                     std::numeric_limits<double>::infinity(),
                                     -std::numeric_limits<double>::infinity()}
                     : hall_constants(scheme.g_model);
    ctx.composite = composite_tail(scheme);
    return ctx;
  }

  /// Indicator of the second-order term of F driving the bias.
  bool bias_active() const {
    return hall_f.beta <= hall_g.beta && hall_f.D != 0.0;
  }

  double alpha() const { return hall_f.beta * composite.gamma; }

  /// scriptD = 1{beta1 <= beta2} D1 C^{-alpha} / p.
  double script_d() const {
    if (!bias_active()) return 0.0;
    return hall_f.D * std::pow(composite.C, -alpha()) / p;
  }
};

namespace detail {

inline void require_weak_censoring(double p) {
  if (!(p > 0.5) || !(p <= 1.0))
    throw std::domain_error("asymptotic variance needs p in (1/2, 1]");
}

} // namespace detail

/// Asymptotic variance of the kernel estimator:
///   sigma_K^2 = gamma1^2 int s^{1-1/p} K^2(s) ds.
inline double sigma2(Kernel k, const AsymptoticContext& ctx,
                     quad::Rule rule = quad::Rule::adaptive) {
  detail::require_weak_censoring(ctx.p);
  const double integral = quad::integrate_power_weighted(
      1.0 - 1.0 / ctx.p,
      [&](double s) { const double v = k.eval(s); return v * v; }, rule);
  return ctx.gamma1 * ctx.gamma1 * integral;
}

/// Asymptotic mean-bias constant m_K, gated by the indicator that the
/// second-order term of F dominates. Includes the proportion factor p, the
/// normalization the indicator-kernel anchor fixes; the MSE function and
/// the optimal-k algebra rely on this same constant.
inline double mean_bias_constant(Kernel k, const AsymptoticContext& ctx,
                                 quad::Rule rule = quad::Rule::adaptive) {
  if (!ctx.bias_active()) return 0.0;
  const double beta1 = ctx.hall_f.beta;
  const double t = beta1 * ctx.gamma1;
  const double integral = quad::integrate_power_weighted(
      t, [&](double s) { return k.eval(s); }, rule);
  return -beta1 * ctx.hall_f.D *
         std::pow(ctx.composite.C, -ctx.composite.gamma * beta1) *
         ctx.gamma1 * ctx.gamma1 * ctx.p * integral;
}

/// Closed-form mean-bias constant of the indicator kernel, used as the
/// anchor for the optimal-k specialization.
inline double mean_bias_constant_indicator(const AsymptoticContext& ctx) {
  if (!ctx.bias_active()) return 0.0;
  const double beta1 = ctx.hall_f.beta;
  const double g = ctx.composite.gamma;
  return -g * g * beta1 * ctx.hall_f.D * std::pow(ctx.composite.C, -g * beta1) /
         ctx.p / (1.0 + beta1 * g / ctx.p);
}

/// Asymptotic variance of the bias-reduced estimator:
///   sigma_K*^2 = p gamma1^2 int t^{1-1/p} ((1+eta1 rho) - rho t^{-tau1})^2
///   K^2(t) dt with eta1, rho taken at tau1 = -beta1 gamma1.
inline double sigma2_star(Kernel k, const AsymptoticContext& ctx,
                          quad::Rule rule = quad::Rule::adaptive) {
  detail::require_weak_censoring(ctx.p);
  const double tau1 = -ctx.hall_f.beta * ctx.gamma1;
  if (!std::isfinite(tau1))
    throw std::domain_error("sigma2_star: second-order parameter undefined");
  const EtaIntegrals eta = eta_integrals(k, tau1, rule);
  const double den = eta.eta3 / eta.eta2 - eta.eta1;
  if (std::abs(den) < 1e-12) throw std::domain_error("rho(tau1) is singular");
  const double r = 1.0 / den;
  const double a = 1.0 + eta.eta1 * r;
  const double integral = quad::integrate_power_weighted(
      1.0 - 1.0 / ctx.p,
      [&](double t) {
        const double w = a - r * std::pow(t, -tau1);
        const double v = k.eval(t);
        return w * w * v * v;
      },
      rule);
  return ctx.p * ctx.gamma1 * ctx.gamma1 * integral;
}

/// Asymptotic MSE  M(k) = sigma_K^2 / k + (k/n)^{2 gamma beta*} m_K^2.
inline double amse(Kernel k, const AsymptoticContext& ctx, std::size_t kk,
                   std::size_t n) {
  if (kk < 1 || kk >= n) throw std::invalid_argument("amse needs 1 <= k < n");
  const double s2 = sigma2(k, ctx);
  const double m = mean_bias_constant(k, ctx);
  double bias_term = 0.0;
  if (m != 0.0) {
    const double rate = 2.0 * ctx.composite.gamma * ctx.composite.beta_star;
    bias_term = std::pow(static_cast<double>(kk) / static_cast<double>(n), rate) * m * m;
  }
  return s2 / static_cast<double>(kk) + bias_term;
}

/// Exhaustive scan of M(k) over [2, n-1].
inline std::size_t amse_argmin(Kernel k, const AsymptoticContext& ctx,
                               std::size_t n) {
  if (n < 4) throw std::invalid_argument("amse_argmin needs n >= 4");
  const double s2 = sigma2(k, ctx);
  const double m = mean_bias_constant(k, ctx);
  const double rate = 2.0 * ctx.composite.gamma * ctx.composite.beta_star;
  std::size_t best_k = 2;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t kk = 2; kk <= n - 1; ++kk) {
    double v = s2 / static_cast<double>(kk);
    if (m != 0.0)
      v += std::pow(static_cast<double>(kk) / static_cast<double>(n), rate) * m * m;
    if (v < best) {
      best = v;
      best_k = kk;
    }
  }
  return best_k;
}

struct OptimalK {
  std::size_t k = 0;
  bool clamped = false;
};

namespace detail {

// Stationary point of sigma2/k + (k/n)^{2a} m^2: the integer part of
// (sigma2 n^{2a} / (2a m^2))^{1/(2a+1)}, clamped into [2, n-1].
inline OptimalK optimal_k_from_constants(double s2, double m, double a,
                                         std::size_t n) {
  if (m == 0.0)
    throw std::domain_error("optimal k: no interior optimum without a bias term");
  const double kc = std::pow(
      s2 * std::pow(static_cast<double>(n), 2.0 * a) / (2.0 * a * m * m),
      1.0 / (2.0 * a + 1.0));
  OptimalK out;
  double k = std::floor(kc);
  if (k < 2.0) {
    k = 2.0;
    out.clamped = true;
  }
  if (k > static_cast<double>(n - 1)) {
    k = static_cast<double>(n - 1);
    out.clamped = true;
  }
  out.k = static_cast<std::size_t>(k);
  return out;
}

} // namespace detail

/// Number of top order statistics minimizing the asymptotic MSE: the exact
/// stationarity point of sigma2/k + (k/n)^{2a} m^2, floored and clamped.
/// amse_argmin exposes the exhaustive scan for side-by-side reporting.
inline OptimalK optimal_k_kernel(Kernel k, const AsymptoticContext& ctx,
                                 std::size_t n) {
  const double m = mean_bias_constant(k, ctx);
  if (m == 0.0)
    throw std::domain_error("optimal k: no interior optimum without a bias term");
  const double s2 = sigma2(k, ctx);
  return detail::optimal_k_from_constants(s2, m, ctx.alpha(), n);
}

/// The indicator-kernel specialization in closed form (no quadrature).
inline OptimalK optimal_k_worms(const AsymptoticContext& ctx, std::size_t n) {
  detail::require_weak_censoring(ctx.p);
  const double m = mean_bias_constant_indicator(ctx);
  if (m == 0.0)
    throw std::domain_error("optimal k: no interior optimum without a bias term");
  const double s2 = ctx.p * ctx.gamma1 * ctx.gamma1 / (2.0 * ctx.p - 1.0);
  return detail::optimal_k_from_constants(s2, m, ctx.alpha(), n);
}

/// Ratio of optimal k counts relative to the indicator kernel, the exact
/// quotient of the two Phi factors.
inline double optimal_k_ratio(Kernel k, const AsymptoticContext& ctx) {
  const double a = ctx.alpha();
  return phi_optimal(k, ctx.p, a) / phi_optimal(kernel_indicator, ctx.p, a);
}

} // namespace censtail
