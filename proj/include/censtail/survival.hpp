#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "censtail/models.hpp"

namespace censtail {

/// Sample sorted by z ascending with concomitant indicators carried along.
/// Ties are broken with uncensored observations first (delta descending),
/// so the ordering is deterministic.
struct OrderedCensoredSample {
  std::vector<double> z;
  std::vector<std::uint8_t> delta;

  explicit OrderedCensoredSample(const CensoredSample& sample) {
    sample.validate();
    const std::size_t n = sample.n();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (sample.z[a] != sample.z[b]) return sample.z[a] < sample.z[b];
      return sample.delta[a] > sample.delta[b];
    });
    z.resize(n);
    delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = sample.z[idx[i]];
      delta[i] = sample.delta[idx[i]];
    }
  }

  std::size_t n() const { return z.size(); }
};

/// Kaplan-Meier product-limit curve: a right-continuous, nonincreasing step
/// function over the sample knots, identically 0 at and beyond the largest
/// observation. The untruncated product at the top knot is kept separately;
/// the jump identity of the product-limit factors needs it.
class SurvivalCurve {
 public:
  SurvivalCurve(std::vector<double> knots, std::vector<double> curve,
                std::vector<double> product)
      : knots_(std::move(knots)),
        curve_(std::move(curve)),
        product_(std::move(product)) {}

  std::size_t n() const { return knots_.size(); }

  /// Curve value at t (right-continuous).
  double value(double t) const {
    if (knots_.empty()) throw std::invalid_argument("empty survival curve");
    if (t < knots_.front()) return 1.0;
    if (t >= knots_.back()) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return curve_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  /// Left limit at t: the curve value just below t.
  double left_limit(double t) const {
    if (knots_.empty()) throw std::invalid_argument("empty survival curve");
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) return 1.0;
    return curve_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  /// Curve value at the i-th order statistic, 1-based. 0 at the top knot.
  double at_order(std::size_t i) const { return curve_.at(i - 1); }

  /// Tie-grouped product at the i-th order statistic without the forced
  /// zero at the top.
  double product_at_order(std::size_t i) const { return product_.at(i - 1); }

  /// Largest 1-based index with a strictly positive curve value (0 if none).
  std::size_t last_positive_index() const {
    for (std::size_t i = curve_.size(); i > 0; --i)
      if (curve_[i - 1] > 0.0) return i;
    return 0;
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return curve_; }

 private:
  std::vector<double> knots_;
  std::vector<double> curve_;
  std::vector<double> product_;
};

namespace detail {

// Shared product-limit construction; `use_delta` selects which indicator
// drives the hazard factors. Products switch to log-space accumulation for
// large n to limit round-off drift.
inline SurvivalCurve km_curve(const OrderedCensoredSample& s, bool use_delta) {
  const std::size_t n = s.n();
  if (n < 2) throw std::invalid_argument("Kaplan-Meier: sample too small");
  std::vector<double> prefix(n);
  const bool log_space = n > 10000;
  double prod = 1.0;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = use_delta ? static_cast<double>(s.delta[i])
                               : 1.0 - static_cast<double>(s.delta[i]);
    const double frac = d / static_cast<double>(n - i);
    if (log_space) {
      log_sum += std::log1p(-frac);
      prefix[i] = std::exp(log_sum);
    } else {
      prod *= 1.0 - frac;
      prefix[i] = prod;
    }
  }
  // Tie groups share the value of their last member.
  std::vector<double> product(n);
  std::size_t i = n;
  while (i > 0) {
    std::size_t lo = i - 1;
    while (lo > 0 && s.z[lo - 1] == s.z[i - 1]) --lo;
    for (std::size_t j = lo; j < i; ++j) product[j] = prefix[i - 1];
    i = lo;
  }
  std::vector<double> curve = product;
  for (std::size_t j = n; j > 0 && s.z[j - 1] == s.z[n - 1]; --j)
    curve[j - 1] = 0.0;
  return SurvivalCurve(std::vector<double>(s.z), std::move(curve),
                       std::move(product));
}

} // namespace detail

/// Kaplan-Meier estimator of the survival function of X (censored variable).
inline SurvivalCurve km_survival_F(const OrderedCensoredSample& s) {
  return detail::km_curve(s, true);
}

/// Kaplan-Meier estimator of the survival function of the censoring
/// variable Y: the same product with delta complemented.
inline SurvivalCurve km_survival_G(const OrderedCensoredSample& s) {
  return detail::km_curve(s, false);
}

/// Empirical subdistribution H1(z) = n^{-1} #{ z_i <= z, delta_i = 1 }.
inline double subdistribution_H1(const OrderedCensoredSample& s, double z) {
  const auto end = std::upper_bound(s.z.begin(), s.z.end(), z);
  std::size_t count = 0;
  for (auto it = s.z.begin(); it != end; ++it)
    count += s.delta[static_cast<std::size_t>(it - s.z.begin())];
  return static_cast<double>(count) / static_cast<double>(s.n());
}

/// Self-check of the product-limit jump identity
///   F(Z_{n-j:n}) - F(Z_{n-j+1:n}) = delta_(n-j+1) / (n G(Z_{n-j:n}))
/// for j = 1..k; returns the maximum absolute residual. Terms whose G value
/// is 0 are inapplicable and excluded. The j = 1 difference uses the
/// untruncated product at the top order statistic, since the identity is a
/// statement about the product factors rather than the truncated curve.
inline double verify_km_jump_identity(const OrderedCensoredSample& s,
                                      std::size_t k) {
  const std::size_t n = s.n();
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("verify_km_jump_identity: need 1 <= k <= n-1");
  const SurvivalCurve f = km_survival_F(s);
  const SurvivalCurve g = km_survival_G(s);
  double max_residual = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    const double g_val = g.at_order(n - j);
    if (g_val <= 0.0) continue;
    const double lhs = f.product_at_order(n - j) - f.product_at_order(n - j + 1);
    const double rhs = static_cast<double>(s.delta[n - j]) /
                       (static_cast<double>(n) * g_val);
    max_residual = std::max(max_residual, std::abs(lhs - rhs));
  }
  return max_residual;
}

} // namespace censtail
