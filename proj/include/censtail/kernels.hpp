#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "censtail/quadrature.hpp"

namespace censtail {

enum class KernelId { indicator, biweight, triweight, quadweight };

/// Kernel family member with closed-form value and derivatives on (0,1).
/// The polynomial kernels are c (1-s^2)^m on [0,1); the indicator is the
/// unit weight on [0,1). All satisfy the unit-mass normalization.
///
/// Inside the estimators the indicator enters through g_K(s) = s K(s); its
/// weight is taken on the closed support (g_K(1) = 1) so that the
/// product-limit ratio hitting 1 keeps full weight and the indicator
/// estimator reduces exactly to the unsmoothed sums. Pointwise evaluation
/// keeps the half-open convention (eval(1) = 0).
struct Kernel {
  KernelId id = KernelId::triweight;

  double eval(double s) const {
    if (s < 0.0 || s >= 1.0) return 0.0;
    switch (id) {
      case KernelId::indicator: return 1.0;
      case KernelId::biweight: {
        const double t = 1.0 - s * s;
        return 15.0 / 8.0 * t * t;
      }
      case KernelId::triweight: {
        const double t = 1.0 - s * s;
        return 35.0 / 16.0 * t * t * t;
      }
      case KernelId::quadweight: {
        const double t = 1.0 - s * s;
        return 315.0 / 128.0 * t * t * t * t;
      }
    }
    return 0.0;
  }

  double operator()(double s) const { return eval(s); }

  /// First derivative on (0,1); zero elsewhere. The indicator has no
  /// bounded derivative at the jump and reports 0 throughout.
  double deriv1(double s) const {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double t = 1.0 - s * s;
    switch (id) {
      case KernelId::indicator: return 0.0;
      case KernelId::biweight: return -15.0 / 2.0 * s * t;
      case KernelId::triweight: return -105.0 / 8.0 * s * t * t;
      case KernelId::quadweight: return -315.0 / 16.0 * s * t * t * t;
    }
    return 0.0;
  }

  double deriv2(double s) const {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double t = 1.0 - s * s;
    switch (id) {
      case KernelId::indicator: return 0.0;
      case KernelId::biweight: return -15.0 / 2.0 * (1.0 - 3.0 * s * s);
      case KernelId::triweight:
        return -105.0 / 8.0 * t * (1.0 - 5.0 * s * s);
      case KernelId::quadweight:
        return -315.0 / 16.0 * t * t * (1.0 - 7.0 * s * s);
    }
    return 0.0;
  }

  /// g_K(s) = s K(s), the estimator weight.
  double gk(double s) const {
    if (id == KernelId::indicator) return (s > 0.0 && s <= 1.0) ? s : 0.0;
    return s * eval(s);
  }

  /// g_K'(s) = K(s) + s K'(s).
  double gk_deriv1(double s) const { return eval(s) + s * deriv1(s); }

  const char* name() const {
    switch (id) {
      case KernelId::indicator: return "indicator";
      case KernelId::biweight: return "biweight";
      case KernelId::triweight: return "triweight";
      case KernelId::quadweight: return "quadweight";
    }
    return "?";
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

inline constexpr Kernel kernel_indicator{KernelId::indicator};
inline constexpr Kernel kernel_biweight{KernelId::biweight};
inline constexpr Kernel kernel_triweight{KernelId::triweight};
inline constexpr Kernel kernel_quadweight{KernelId::quadweight};

inline Kernel kernel_from_name(std::string_view name) {
  if (name == "indicator") return kernel_indicator;
  if (name == "biweight") return kernel_biweight;
  if (name == "triweight") return kernel_triweight;
  if (name == "quadweight") return kernel_quadweight;
  throw std::invalid_argument("unknown kernel: " + std::string(name));
}

/// Weighted integrals of the kernel against the second-order parameter
/// tau1 < 0:
///   eta1 = int s^{-tau1} (1 - tau1 log s) K(s) ds
///   eta2 = int s^{-tau1} K(s) ds
///   eta3 = int (s^{-tau1} - s^{-2 tau1}) K(s) ds
/// tau1 = 0 is accepted for the degenerate check (1, 1, 0) and flagged.
struct EtaIntegrals {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  bool tau1_zero = false;
};

inline EtaIntegrals eta_integrals(Kernel k, double tau1,
                                  quad::Rule rule = quad::Rule::adaptive) {
  if (tau1 > 0.0)
    throw std::domain_error("eta integrals need tau1 <= 0");
  const double a = -tau1;
  EtaIntegrals out;
  out.tau1_zero = tau1 == 0.0;
  out.eta1 = quad::integrate_power_weighted(
      a, [&](double s) { return (1.0 + a * std::log(s)) * k.eval(s); }, rule);
  out.eta2 = quad::integrate_power_weighted(
      a, [&](double s) { return k.eval(s); }, rule);
  out.eta3 = out.eta2 - quad::integrate_power_weighted(
                            2.0 * a, [&](double s) { return k.eval(s); }, rule);
  return out;
}

/// rho(tau1) = (eta3/eta2 - eta1)^{-1}.
inline double rho(Kernel k, double tau1,
                  quad::Rule rule = quad::Rule::adaptive) {
  const EtaIntegrals e = eta_integrals(k, tau1, rule);
  const double den = e.eta3 / e.eta2 - e.eta1;
  if (std::abs(den) < 1e-12)
    throw std::domain_error("rho(tau1) is singular");
  return 1.0 / den;
}

/// Asymptotic-bias ratio g(t) = (1+t) int s^t K(s) ds, t = beta1 * gamma1.
/// Below 1 for the smooth kernels; exactly 1 for the indicator.
inline double bias_ratio_g(Kernel k, double t,
                           quad::Rule rule = quad::Rule::adaptive) {
  if (t < 0.0) throw std::domain_error("bias ratio needs t >= 0");
  const double integral = quad::integrate_power_weighted(
      t, [&](double s) { return k.eval(s); }, rule);
  return (1.0 + t) * integral;
}

/// Asymptotic-variance ratio h(p) = ((2p-1)/p) int s^{1-1/p} K^2(s) ds for
/// p > 1/2; the integral diverges at or below 1/2.
inline double variance_ratio_h(Kernel k, double p,
                               quad::Rule rule = quad::Rule::adaptive) {
  if (!(p > 0.5) || !(p <= 1.0))
    throw std::domain_error("variance ratio needs p in (1/2, 1]");
  const double integral = quad::integrate_power_weighted(
      1.0 - 1.0 / p, [&](double s) { const double v = k.eval(s); return v * v; },
      rule);
  return (2.0 * p - 1.0) / p * integral;
}

/// Optimal-threshold kernel factor
///   Phi(K) = {int s^{1-1/p} K^2}^{1/(2a+1)} {int s^{a/p} K}^{-2/(2a+1)}
/// with a = beta1 * gamma.
inline double phi_optimal(Kernel k, double p, double alpha,
                          quad::Rule rule = quad::Rule::adaptive) {
  if (!(p > 0.5) || !(p <= 1.0))
    throw std::domain_error("phi needs p in (1/2, 1]");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::domain_error("phi needs a finite alpha > 0");
  const double i1 = quad::integrate_power_weighted(
      1.0 - 1.0 / p, [&](double s) { const double v = k.eval(s); return v * v; },
      rule);
  const double i2 = quad::integrate_power_weighted(
      alpha / p, [&](double s) { return k.eval(s); }, rule);
  const double e = 1.0 / (2.0 * alpha + 1.0);
  return std::pow(i1, e) * std::pow(i2, -2.0 * e);
}

enum class BabKernelId { bab0, bab1, bab2 };

inline const char* bab_kernel_name(BabKernelId id) {
  switch (id) {
    case BabKernelId::bab0: return "bab0";
    case BabKernelId::bab1: return "bab1";
    case BabKernelId::bab2: return "bab2";
  }
  return "?";
}

inline BabKernelId bab_kernel_from_name(std::string_view name) {
  if (name == "bab0") return BabKernelId::bab0;
  if (name == "bab1") return BabKernelId::bab1;
  if (name == "bab2") return BabKernelId::bab2;
  throw std::invalid_argument("unknown bab kernel: " + std::string(name));
}

/// Two-argument kernels normalized so that p int_0^1 K(s,p) ds = 1:
///   bab0: (1/p) log(1/s)      bab1: s^{p-1}      bab2: (s^{p-1} - 1)/(1-p)
/// bab2 is singular as written at p = 1; the evaluation returns its limit
/// log(1/s) there (the convention is ours; the defining formula excludes
/// p = 1).
inline double bab_eval(BabKernelId id, double s, double p) {
  if (!(s > 0.0 && s <= 1.0))
    throw std::domain_error("bab kernel needs s in (0,1]");
  if (!(p > 0.0 && p <= 1.0))
    throw std::domain_error("bab kernel needs p in (0,1]");
  switch (id) {
    case BabKernelId::bab0: return std::log(1.0 / s) / p;
    case BabKernelId::bab1: return std::pow(s, p - 1.0);
    case BabKernelId::bab2:
      if (std::abs(1.0 - p) < 1e-12) return std::log(1.0 / s);
      return (std::pow(s, p - 1.0) - 1.0) / (1.0 - p);
  }
  return 0.0;
}

} // namespace censtail
