#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "censtail/kernels.hpp"
#include "censtail/survival.hpp"

namespace censtail {

/// Reason a point estimate is unavailable. Estimator paths carry holes
/// instead of throwing, so full k-sweeps never abort.
enum class EstimateStatus : std::uint8_t {
  ok,
  fully_censored_tail,   // p-hat = 0
  km_zero_denominator,   // product-limit value vanished at the threshold
  rho_singular,          // bias-correction factor undefined
  nonpositive_gamma,     // tail-index estimate <= 0, tau-hat sign flips
};

struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  EstimateStatus status = EstimateStatus::ok;

  bool defined() const { return status == EstimateStatus::ok; }

  static Estimate of(double v) { return {v, EstimateStatus::ok}; }
  static Estimate undefined(EstimateStatus s) {
    return {std::numeric_limits<double>::quiet_NaN(), s};
  }
};

/// A sample prepared for tail estimation: sorted view, its product-limit
/// curve, and cached logs. Immutable once built; share freely across
/// threads.
struct TailData {
  OrderedCensoredSample sample;
  SurvivalCurve km_f;
  std::vector<double> log_z;

  explicit TailData(const CensoredSample& raw)
      : sample(raw), km_f(km_survival_F(sample)) {
    log_z.resize(sample.n());
    for (std::size_t i = 0; i < sample.n(); ++i)
      log_z[i] = std::log(sample.z[i]);
  }

  std::size_t n() const { return sample.n(); }
};

namespace detail {

inline void require_k(std::size_t k, std::size_t n) {
  if (k < 2 || k > n - 1)
    throw std::invalid_argument("estimator needs 2 <= k <= n-1");
}

} // namespace detail

/// Hill estimator over the top k log-excesses.
inline double hill(std::span<const double> z_sorted, std::size_t k) {
  const std::size_t n = z_sorted.size();
  detail::require_k(k, n);
  if (!(z_sorted.front() > 0.0))
    throw std::domain_error("hill: data must be positive");
  const double log_threshold = std::log(z_sorted[n - k - 1]);
  double sum = 0.0;
  for (std::size_t i = 1; i <= k; ++i)
    sum += std::log(z_sorted[n - i]) - log_threshold;
  return sum / static_cast<double>(k);
}

inline double hill(const TailData& d, std::size_t k) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= k; ++i)
    sum += d.log_z[n - i] - d.log_z[n - k - 1];
  return sum / static_cast<double>(k);
}

/// Kernel-weighted spacing estimator for complete data.
inline double cdm_kernel(const TailData& d, std::size_t k, Kernel kernel) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(k + 1);
    sum += kernel.gk(u) * (d.log_z[n - i] - d.log_z[n - i - 1]);
  }
  return sum;
}

/// Proportion of uncensored observations among the top k.
inline double phat(const TailData& d, std::size_t k) {
  const std::size_t n = d.n();
  if (k < 1 || k > n) throw std::invalid_argument("phat needs 1 <= k <= n");
  std::size_t count = 0;
  for (std::size_t i = 1; i <= k; ++i) count += d.sample.delta[n - i];
  return static_cast<double>(count) / static_cast<double>(k);
}

/// Hill estimator adapted to censoring: hill / p-hat.
inline Estimate efg(const TailData& d, std::size_t k) {
  detail::require_k(k, d.n());
  const double p = phat(d, k);
  if (p == 0.0) return Estimate::undefined(EstimateStatus::fully_censored_tail);
  return Estimate::of(hill(d, k) / p);
}

enum class KernelVariant { shifted, unshifted };

/// Kernel product-limit estimator of the tail index. The shifted variant
/// weights the spacing at Z_{n-j+1:n} by the ratio taken at the same point
/// (j = 2..k); the unshifted one uses the ratio one order statistic lower
/// (j = 1..k). Ratios with a vanished numerator carry weight g_K(0) = 0 and
/// drop out.
inline Estimate kernel_estimator(const TailData& d, std::size_t k,
                                 Kernel kernel, KernelVariant variant) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  const double denom = d.km_f.at_order(n - k);
  if (!(denom > 0.0))
    return Estimate::undefined(EstimateStatus::km_zero_denominator);
  double sum = 0.0;
  if (variant == KernelVariant::shifted) {
    for (std::size_t j = 2; j <= k; ++j) {
      const double r = d.km_f.at_order(n - j + 1) / denom;
      sum += kernel.gk(r) * (d.log_z[n - j] - d.log_z[n - j - 1]);
    }
  } else {
    for (std::size_t j = 1; j <= k; ++j) {
      const double r = d.km_f.at_order(n - j) / denom;
      sum += kernel.gk(r) * (d.log_z[n - j] - d.log_z[n - j - 1]);
    }
  }
  return Estimate::of(sum);
}

/// Summation-by-parts form of the unshifted kernel estimator: increments of
/// g_K against log-excesses. Algebraically identical to the spacing form;
/// kept as the second route for the equivalence check.
inline Estimate kernel_estimator_telescoped(const TailData& d, std::size_t k,
                                            Kernel kernel) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  const double denom = d.km_f.at_order(n - k);
  if (!(denom > 0.0))
    return Estimate::undefined(EstimateStatus::km_zero_denominator);
  double sum = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    const double lo = d.km_f.at_order(n - j) / denom;
    const double hi = d.km_f.at_order(n - j + 1) / denom;
    sum += (kernel.gk(lo) - kernel.gk(hi)) *
           (d.log_z[n - j] - d.log_z[n - k - 1]);
  }
  return Estimate::of(sum);
}

/// Worms's product-limit estimator; the indicator-kernel reduction of the
/// shifted kernel estimator.
inline Estimate worms(const TailData& d, std::size_t k) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  const double denom = d.km_f.at_order(n - k);
  if (!(denom > 0.0))
    return Estimate::undefined(EstimateStatus::km_zero_denominator);
  double sum = 0.0;
  for (std::size_t j = 2; j <= k; ++j)
    sum += d.km_f.at_order(n - j + 1) / denom *
           (d.log_z[n - j] - d.log_z[n - j - 1]);
  return Estimate::of(sum);
}

/// The unshifted original: ratios taken at Z_{n-j:n}, j = 1..k.
inline Estimate worms_tilde(const TailData& d, std::size_t k) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  const double denom = d.km_f.at_order(n - k);
  if (!(denom > 0.0))
    return Estimate::undefined(EstimateStatus::km_zero_denominator);
  double sum = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
    sum += d.km_f.at_order(n - j) / denom *
           (d.log_z[n - j] - d.log_z[n - j - 1]);
  return Estimate::of(sum);
}

/// Two-argument-kernel estimator built on p-hat and log-excess ratios,
/// with the 1/log((k+1)/i) weight exactly as defined.
inline Estimate bab_kernel_estimator(const TailData& d, std::size_t k,
                                     BabKernelId bab) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  const double p = phat(d, k);
  if (p == 0.0) return Estimate::undefined(EstimateStatus::fully_censored_tail);
  double sum = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(k + 1);
    sum += bab_eval(bab, u, p) *
           (d.log_z[n - i] - d.log_z[n - k - 1]) /
           std::log(static_cast<double>(k + 1) / static_cast<double>(i));
  }
  return Estimate::of(sum / static_cast<double>(k));
}

/// Power-spacing statistic T_k(omega; K). Converges to the shifted kernel
/// estimator as omega tends to 0.
inline Estimate t_statistic(const TailData& d, std::size_t k, double omega,
                            Kernel kernel) {
  const std::size_t n = d.n();
  detail::require_k(k, n);
  if (!(omega > 0.0)) throw std::domain_error("t_statistic needs omega > 0");
  const double denom = d.km_f.at_order(n - k);
  if (!(denom > 0.0)) {
    // the mass vanishes only when the top k+1 values are all tied, where
    // every power bracket is exactly zero
    if (d.sample.z[n - k - 1] == d.sample.z[n - 1]) return Estimate::of(0.0);
    return Estimate::undefined(EstimateStatus::km_zero_denominator);
  }
  double sum = 0.0;
  for (std::size_t j = 2; j <= k; ++j) {
    const double r = d.km_f.at_order(n - j + 1) / denom;
    const double lo = std::exp(-omega * (d.log_z[n - j - 1] - d.log_z[n - k - 1]));
    const double hi = std::exp(-omega * (d.log_z[n - j] - d.log_z[n - k - 1]));
    sum += kernel.gk(r) * (lo - hi);
  }
  return Estimate::of(sum / omega);
}

/// How the second-order parameter tau1 is obtained for bias reduction:
/// either from a known beta1 (tau1-hat = -beta1 * gamma-hat) or from the
/// adaptive grid search.
struct BiasReductionConfig {
  Kernel kernel = kernel_triweight;
  std::optional<double> beta1;       // engaged: known-beta1 source
  std::size_t adaptive_stride = 5;   // grid decimation for the tau1 search
};

namespace detail {

inline Estimate bias_reduced_with_etas(const TailData& d, std::size_t k,
                                       Kernel kernel, double tau1,
                                       const EtaIntegrals& eta,
                                       const Estimate& base) {
  if (!base.defined()) return base;
  const double gamma_hat = base.value;
  if (!(gamma_hat > 0.0))
    return Estimate::undefined(EstimateStatus::nonpositive_gamma);
  const double den = eta.eta3 / eta.eta2 - eta.eta1;
  if (std::abs(den) < 1e-12)
    return Estimate::undefined(EstimateStatus::rho_singular);
  const double rho_hat = 1.0 / den;
  const Estimate t = t_statistic(d, k, -tau1 / gamma_hat, kernel);
  if (!t.defined()) return t;
  return Estimate::of(gamma_hat - rho_hat * (t.value - gamma_hat * eta.eta2));
}

} // namespace detail

/// Bias-reduced estimator at a fixed tau1 (the adaptive-grid inner loop).
inline Estimate bias_reduced_at_tau1(const TailData& d, std::size_t k,
                                     Kernel kernel, double tau1) {
  const Estimate base = kernel_estimator(d, k, kernel, KernelVariant::shifted);
  return detail::bias_reduced_with_etas(d, k, kernel, tau1,
                                        eta_integrals(kernel, tau1), base);
}

/// Bias-reduced kernel estimator with known beta1. The T_k argument
/// -tau1-hat / gamma-hat simplifies algebraically to beta1 and is passed as
/// such, avoiding noise amplification at small gamma-hat.
inline Estimate bias_reduced_known_beta1(const TailData& d, std::size_t k,
                                         Kernel kernel, double beta1) {
  if (!(beta1 > 0.0)) throw std::invalid_argument("beta1 must be positive");
  const Estimate base = kernel_estimator(d, k, kernel, KernelVariant::shifted);
  if (!base.defined()) return base;
  const double gamma_hat = base.value;
  if (!(gamma_hat > 0.0))
    return Estimate::undefined(EstimateStatus::nonpositive_gamma);
  const double tau1_hat = -beta1 * gamma_hat;
  const EtaIntegrals eta = eta_integrals(kernel, tau1_hat);
  const double den = eta.eta3 / eta.eta2 - eta.eta1;
  if (std::abs(den) < 1e-12)
    return Estimate::undefined(EstimateStatus::rho_singular);
  const double rho_hat = 1.0 / den;
  const Estimate t = t_statistic(d, k, beta1, kernel);
  if (!t.defined()) return t;
  return Estimate::of(gamma_hat - rho_hat * (t.value - gamma_hat * eta.eta2));
}

/// The 26-point search grid {-0.5 - 0.1 i}.
inline std::vector<double> adaptive_tau1_grid() {
  std::vector<double> grid(26);
  for (int i = 0; i < 26; ++i) grid[i] = -0.5 - 0.1 * i;
  return grid;
}

/// Pick the tau1 whose bias-reduced path has minimal sample variance over
/// k. Undefined entries are skipped; a grid point needs at least two
/// defined entries to compete. Ties go to the most negative tau1.
inline double pick_min_variance_tau1(const std::vector<double>& taus,
                                     const std::vector<std::vector<Estimate>>& paths) {
  if (taus.size() != paths.size())
    throw std::invalid_argument("tau grid / path count mismatch");
  double best_tau = 0.0;
  double best_var = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    double sum = 0.0;
    std::size_t m = 0;
    for (const Estimate& e : paths[t])
      if (e.defined()) {
        sum += e.value;
        ++m;
      }
    if (m < 2) continue;
    const double mean = sum / static_cast<double>(m);
    double var = 0.0;
    for (const Estimate& e : paths[t])
      if (e.defined()) var += (e.value - mean) * (e.value - mean);
    if (!found || var <= best_var) {
      best_var = var;
      best_tau = taus[t];
      found = true;
    }
  }
  if (!found)
    throw std::runtime_error("adaptive tau1: no grid point yields a defined path");
  return best_tau;
}

/// Adaptive tau1: minimize the sample variance of the bias-reduced path
/// over the given k grid across the 26-point tau1 grid.
inline double adaptive_tau1(const TailData& d, Kernel kernel,
                            const std::vector<std::size_t>& k_grid) {
  std::size_t valid = 0;
  for (std::size_t k : k_grid)
    if (k >= 2 && k <= d.n() - 1) ++valid;
  if (valid < 10)
    throw std::invalid_argument("adaptive tau1 needs >= 10 valid k values");
  std::vector<std::size_t> ks;
  std::vector<Estimate> base;
  for (std::size_t k : k_grid) {
    if (k < 2 || k > d.n() - 1) continue;
    ks.push_back(k);
    base.push_back(kernel_estimator(d, k, kernel, KernelVariant::shifted));
  }
  const std::vector<double> taus = adaptive_tau1_grid();
  std::vector<std::vector<Estimate>> paths(taus.size());
  for (std::size_t t = 0; t < taus.size(); ++t) {
    const EtaIntegrals eta = eta_integrals(kernel, taus[t]);
    paths[t].reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      paths[t].push_back(detail::bias_reduced_with_etas(d, ks[i], kernel,
                                                        taus[t], eta, base[i]));
  }
  return pick_min_variance_tau1(taus, paths);
}

/// Default decimated k grid for the adaptive search.
inline std::vector<std::size_t> decimated_k_grid(std::size_t n,
                                                 std::size_t stride) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 2; k <= n - 1; k += stride) grid.push_back(k);
  return grid;
}

/// Bias-reduced estimator dispatching on the tau1 source.
inline Estimate bias_reduced(const TailData& d, std::size_t k,
                             const BiasReductionConfig& config) {
  if (config.beta1)
    return bias_reduced_known_beta1(d, k, config.kernel, *config.beta1);
  const double tau1 = adaptive_tau1(
      d, config.kernel, decimated_k_grid(d.n(), config.adaptive_stride));
  return bias_reduced_at_tau1(d, k, config.kernel, tau1);
}

/// Which estimator a path or a CLI run refers to.
enum class EstimatorKind {
  hill,
  cdm,
  efg,
  worms,
  worms_tilde,
  kernel,
  kernel_unshifted,
  bab,
  bias_reduced,
};

inline const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::hill: return "hill";
    case EstimatorKind::cdm: return "cdm";
    case EstimatorKind::efg: return "efg";
    case EstimatorKind::worms: return "worms";
    case EstimatorKind::worms_tilde: return "worms-tilde";
    case EstimatorKind::kernel: return "kernel";
    case EstimatorKind::kernel_unshifted: return "kernel-unshifted";
    case EstimatorKind::bab: return "bab";
    case EstimatorKind::bias_reduced: return "bias-reduced";
  }
  return "?";
}

inline EstimatorKind estimator_from_name(std::string_view name) {
  if (name == "hill") return EstimatorKind::hill;
  if (name == "cdm") return EstimatorKind::cdm;
  if (name == "efg") return EstimatorKind::efg;
  if (name == "worms") return EstimatorKind::worms;
  if (name == "worms-tilde") return EstimatorKind::worms_tilde;
  if (name == "kernel") return EstimatorKind::kernel;
  if (name == "kernel-unshifted") return EstimatorKind::kernel_unshifted;
  if (name == "bab") return EstimatorKind::bab;
  if (name == "bias-reduced") return EstimatorKind::bias_reduced;
  throw std::invalid_argument("unknown estimator: " + std::string(name));
}

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kernel;
  Kernel kernel = kernel_triweight;
  BabKernelId bab = BabKernelId::bab2;
  std::optional<double> beta1;     // bias-reduced only; empty = adaptive grid
  std::size_t adaptive_stride = 5;

  /// CSV "kernel" column: the kernel for kernel-weighted estimators, the
  /// two-argument kernel for bab, empty otherwise.
  std::string kernel_label() const {
    switch (kind) {
      case EstimatorKind::cdm:
      case EstimatorKind::kernel:
      case EstimatorKind::kernel_unshifted:
      case EstimatorKind::bias_reduced: return kernel.name();
      case EstimatorKind::bab: return bab_kernel_name(bab);
      default: return "";
    }
  }
};

inline Estimate evaluate_estimator(const TailData& d, const EstimatorSpec& spec,
                                   std::size_t k) {
  switch (spec.kind) {
    case EstimatorKind::hill: return Estimate::of(hill(d, k));
    case EstimatorKind::cdm: return Estimate::of(cdm_kernel(d, k, spec.kernel));
    case EstimatorKind::efg: return efg(d, k);
    case EstimatorKind::worms: return worms(d, k);
    case EstimatorKind::worms_tilde: return worms_tilde(d, k);
    case EstimatorKind::kernel:
      return kernel_estimator(d, k, spec.kernel, KernelVariant::shifted);
    case EstimatorKind::kernel_unshifted:
      return kernel_estimator(d, k, spec.kernel, KernelVariant::unshifted);
    case EstimatorKind::bab: return bab_kernel_estimator(d, k, spec.bab);
    case EstimatorKind::bias_reduced: {
      BiasReductionConfig cfg{spec.kernel, spec.beta1, spec.adaptive_stride};
      return bias_reduced(d, k, cfg);
    }
  }
  return Estimate::undefined(EstimateStatus::km_zero_denominator);
}

/// Estimator values indexed by the number k of upper order statistics.
struct EstimatorPath {
  std::string estimator;
  std::string kernel;
  std::vector<std::size_t> k_values;
  std::vector<Estimate> estimates;

  std::size_t defined_count() const {
    std::size_t c = 0;
    for (const Estimate& e : estimates) c += e.defined();
    return c;
  }
};

/// Sweep one estimator over a k grid. For the adaptive bias-reduced
/// estimator the tau1 search runs once for the whole path.
inline EstimatorPath compute_path(const TailData& d, const EstimatorSpec& spec,
                                  const std::vector<std::size_t>& k_grid) {
  EstimatorPath path;
  path.estimator = estimator_name(spec.kind);
  path.kernel = spec.kernel_label();
  path.k_values = k_grid;
  path.estimates.reserve(k_grid.size());
  if (spec.kind == EstimatorKind::bias_reduced && !spec.beta1) {
    const double tau1 = adaptive_tau1(
        d, spec.kernel, decimated_k_grid(d.n(), spec.adaptive_stride));
    const EtaIntegrals eta = eta_integrals(spec.kernel, tau1);
    for (std::size_t k : k_grid)
      path.estimates.push_back(detail::bias_reduced_with_etas(
          d, k, spec.kernel, tau1, eta,
          kernel_estimator(d, k, spec.kernel, KernelVariant::shifted)));
    return path;
  }
  for (std::size_t k : k_grid)
    path.estimates.push_back(evaluate_estimator(d, spec, k));
  return path;
}

} // namespace censtail
