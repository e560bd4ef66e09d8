#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "censtail/rng.hpp"

namespace censtail {

enum class Family { burr, frechet, exact_pareto };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::burr: return "burr";
    case Family::frechet: return "frechet";
    case Family::exact_pareto: return "exact-pareto";
  }
  return "?";
}

/// A Pareto-type distribution with extreme value index `gamma`. The Burr
/// family carries the extra shape `zeta`; the other families ignore it.
struct ParetoTypeModel {
  Family family = Family::burr;
  double gamma = 1.0;
  double zeta = 1.0;

  static ParetoTypeModel burr(double gamma, double zeta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    return {Family::burr, gamma, zeta};
  }
  static ParetoTypeModel frechet(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return {Family::frechet, gamma, 1.0};
  }
  static ParetoTypeModel exact_pareto(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return {Family::exact_pareto, gamma, 1.0};
  }

  friend bool operator==(const ParetoTypeModel&,
                         const ParetoTypeModel&) = default;
};

/// Right-tail function of the model. Frechet at x = 0 is taken as 1 by
/// continuity.
inline double survival(const ParetoTypeModel& m, double x) {
  if (!(x >= 0.0)) throw std::domain_error("survival: x must be nonnegative");
  switch (m.family) {
    case Family::burr:
      return std::pow(1.0 + std::pow(x, 1.0 / m.zeta), -m.zeta / m.gamma);
    case Family::frechet:
      if (x == 0.0) return 1.0;
      return -std::expm1(-std::pow(x, -1.0 / m.gamma));
    case Family::exact_pareto:
      return x <= 1.0 ? 1.0 : std::pow(x, -1.0 / m.gamma);
  }
  return 0.0;
}

/// Exact inverse of 1 - survival, used for inverse-transform sampling.
inline double quantile(const ParetoTypeModel& m, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("quantile: u must lie in (0,1)");
  switch (m.family) {
    case Family::burr:
      return std::pow(std::pow(1.0 - u, -m.gamma / m.zeta) - 1.0, m.zeta);
    case Family::frechet:
      return std::pow(-std::log(u), -m.gamma);
    case Family::exact_pareto:
      return std::pow(1.0 - u, -m.gamma);
  }
  return 0.0;
}

/// Second-order (Hall-type) tail constants: survival(x) is asymptotically
/// C x^{-1/gamma} (1 + D x^{-beta}). An exact Pareto tail has no correction
/// term; beta is reported as +inf and D as 0.
struct HallConstants {
  double gamma = 1.0;
  double C = 1.0;
  double D = 0.0;
  double beta = std::numeric_limits<double>::infinity();
  double tau = -std::numeric_limits<double>::infinity(); // -beta * gamma
};

inline HallConstants hall_constants(const ParetoTypeModel& m) {
  switch (m.family) {
    case Family::burr:
      return {m.gamma, 1.0, -m.zeta / m.gamma, 1.0 / m.zeta,
              -m.gamma / m.zeta};
    case Family::frechet:
      return {m.gamma, 1.0, -0.5, 1.0 / m.gamma, -1.0};
    case Family::exact_pareto:
      return {m.gamma, 1.0, 0.0, std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
  }
  return {};
}

/// X censored on the right by an independent Y. The uncensored flag skips Y
/// generation entirely (every observation complete); it stands in for a
/// censoring tail pushed to infinity without simulating a degenerate G.
struct CensoringScheme {
  ParetoTypeModel f_model;
  ParetoTypeModel g_model;
  bool uncensored = false;

  static CensoringScheme censored(ParetoTypeModel f, ParetoTypeModel g) {
    return {f, g, false};
  }
  static CensoringScheme uncensored_scheme(ParetoTypeModel f) {
    return {f, f, true};
  }

  double gamma1() const { return f_model.gamma; }
  double gamma2() const { return g_model.gamma; }
  /// Tail index of Z = min(X, Y).
  double gamma() const {
    if (uncensored) return f_model.gamma;
    return f_model.gamma * g_model.gamma / (f_model.gamma + g_model.gamma);
  }
  /// Limiting proportion of uncensored observations in the tail.
  double p() const {
    if (uncensored) return 1.0;
    return g_model.gamma / (f_model.gamma + g_model.gamma);
  }
};

/// Hall-type constants of the product tail H = F * G.
struct CompositeTail {
  double gamma = 1.0;
  double C = 1.0;
  double beta_star = std::numeric_limits<double>::infinity();
  double D_star = 0.0;
  double p = 1.0;
};

inline CompositeTail composite_tail(const CensoringScheme& s) {
  const HallConstants f = hall_constants(s.f_model);
  if (s.uncensored) return {f.gamma, f.C, f.beta, f.D, 1.0};
  const HallConstants g = hall_constants(s.g_model);
  CompositeTail out;
  out.gamma = s.gamma();
  out.p = s.p();
  out.C = f.C * g.C;
  out.beta_star = std::min(f.beta, g.beta);
  if (f.beta < g.beta)
    out.D_star = f.D;
  else if (f.beta > g.beta)
    out.D_star = g.D;
  else
    out.D_star = f.D + g.D;
  return out;
}

/// Observed pairs (z_i, delta_i): z = min(x, y), delta = 1{x <= y}.
struct CensoredSample {
  std::vector<double> z;
  std::vector<std::uint8_t> delta;

  CensoredSample() = default;
  CensoredSample(std::vector<double> z_in, std::vector<std::uint8_t> d_in)
      : z(std::move(z_in)), delta(std::move(d_in)) {
    validate();
  }

  std::size_t n() const { return z.size(); }

  void validate() const {
    if (z.size() != delta.size())
      throw std::invalid_argument("censored sample: z/delta length mismatch");
    if (z.size() < 2)
      throw std::invalid_argument("censored sample: fewer than 2 rows");
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(z[i] > 0.0) || !std::isfinite(z[i]))
        throw std::invalid_argument("censored sample: z must be positive at row " +
                                    std::to_string(i + 1));
      if (delta[i] > 1)
        throw std::invalid_argument("censored sample: delta must be 0 or 1 at row " +
                                    std::to_string(i + 1));
    }
  }
};

namespace detail {

// Total order on models so each distribution keeps its own RNG substream
// when the censoring roles are exchanged. Identical models fall back to
// slot order.
inline bool model_precedes(const ParetoTypeModel& a, const ParetoTypeModel& b) {
  if (a.family != b.family) return static_cast<int>(a.family) < static_cast<int>(b.family);
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  return a.zeta < b.zeta;
}

} // namespace detail

/// Draw n censored observations. X and Y use independent counter-based
/// substreams keyed by (seed, substream, index); identical inputs give
/// bit-identical output and draws may be generated in any order.
inline CensoredSample sample_censored(const CensoringScheme& scheme,
                                      std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_censored: n must be >= 2");
  std::vector<double> z(n);
  std::vector<std::uint8_t> delta(n);
  if (scheme.uncensored) {
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = quantile(scheme.f_model, rng::uniform01(seed, 0, i));
      delta[i] = 1;
    }
    return CensoredSample(std::move(z), std::move(delta));
  }
  const bool f_first = !detail::model_precedes(scheme.g_model, scheme.f_model);
  const std::uint64_t f_stream = f_first ? 0 : 1;
  const std::uint64_t g_stream = 1 - f_stream;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = quantile(scheme.f_model, rng::uniform01(seed, f_stream, i));
    const double y = quantile(scheme.g_model, rng::uniform01(seed, g_stream, i));
    z[i] = std::min(x, y);
    delta[i] = x <= y ? 1 : 0;
  }
  return CensoredSample(std::move(z), std::move(delta));
}

} // namespace censtail
