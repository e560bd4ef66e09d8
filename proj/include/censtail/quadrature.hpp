#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace censtail::quad {

/// Which integration path to use. The adaptive rule is the production path;
/// the fixed 50-point Gauss-Legendre rule is kept as a cross-check.
enum class Rule { adaptive, gauss50 };

namespace detail {

// Gauss 7 / Kronrod 15 node-weight table on [-1,1] (positive half).
struct Gk15 {
  static constexpr std::array<double, 8> xk = {
      0.000000000000000000, 0.207784955007898468, 0.405845151377397167,
      0.586087235467691130, 0.741531185599394440, 0.864864423359769073,
      0.949107912342758525, 0.991455371120812639};
  static constexpr std::array<double, 8> wk = {
      0.209482141084727828, 0.204432940075298892, 0.190350578064785410,
      0.169004726639267903, 0.140653259715525919, 0.104790010322250184,
      0.063092092629978553, 0.022935322010529225};
  // Gauss weights aligned with the even Kronrod nodes.
  static constexpr std::array<double, 4> wg = {
      0.417959183673469388, 0.381830050505118945, 0.279705391489276668,
      0.129484966168869693};
};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& error) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double k = Gk15::wk[0] * f0;
  double g = Gk15::wg[0] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * Gk15::xk[i];
    const double fs = f(mid + dx) + f(mid - dx);
    k += Gk15::wk[i] * fs;
    if (i % 2 == 0) g += Gk15::wg[i / 2] * fs;
  }
  value = k * half;
  error = std::abs((k - g) * half);
}

// Nodes of the 50-point Gauss-Legendre rule on [0,1], built once by Newton
// iteration on P_50.
struct Gauss50Table {
  std::array<double, 50> x{};
  std::array<double, 50> w{};
  Gauss50Table() {
    constexpr int n = 50;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-16) break;
      }
      // map from [-1,1] to [0,1]
      x[i] = 0.5 * (1.0 - z);
      x[n - 1 - i] = 0.5 * (1.0 + z);
      w[i] = w[n - 1 - i] = 1.0 / ((1.0 - z * z) * pp * pp);
    }
  }
};

inline const Gauss50Table& gauss50_table() {
  static const Gauss50Table table;
  return table;
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b] to an absolute
/// tolerance. Subdivision is stack-based; the interval cap is generous for
/// the smooth integrands used here.
template <class F>
double integrate_adaptive(const F& f, double a, double b,
                          double abs_tol = 1e-10) {
  struct Seg {
    double a, b, tol;
  };
  std::array<Seg, 512> stack;
  int top = 0;
  stack[top++] = {a, b, abs_tol};
  double total = 0.0;
  int evaluations = 0;
  while (top > 0) {
    const Seg s = stack[--top];
    double v = 0.0, e = 0.0;
    detail::gk15(f, s.a, s.b, v, e);
    if (++evaluations > 20000)
      throw std::runtime_error("adaptive quadrature failed to converge");
    if (e <= s.tol || (s.b - s.a) < 1e-14) {
      total += v;
      continue;
    }
    if (top + 2 > static_cast<int>(stack.size()))
      throw std::runtime_error("adaptive quadrature stack overflow");
    const double mid = 0.5 * (s.a + s.b);
    stack[top++] = {s.a, mid, 0.5 * s.tol};
    stack[top++] = {mid, s.b, 0.5 * s.tol};
  }
  return total;
}

/// Fixed 50-point Gauss-Legendre rule over [a,b].
template <class F>
double integrate_gauss50(const F& f, double a, double b) {
  const auto& t = detail::gauss50_table();
  const double len = b - a;
  double sum = 0.0;
  for (int i = 0; i < 50; ++i) sum += t.w[i] * f(a + len * t.x[i]);
  return sum * len;
}

template <class F>
double integrate(const F& f, double a, double b, Rule rule,
                 double abs_tol = 1e-10) {
  return rule == Rule::adaptive ? integrate_adaptive(f, a, b, abs_tol)
                                : integrate_gauss50(f, a, b);
}

/// Integral of s^a * f(s) over (0,1] for a > -1. The substitution s = v^r
/// with integer r maps the integrand to r v^{r(1+a)-1} f(v^r); r is chosen
/// so the transformed endpoint exponent is at least 6, which removes the
/// singularity for a < 0 and leaves both rules a smooth integrand even for
/// fractional exponents.
template <class F>
double integrate_power_weighted(double a, const F& f,
                                Rule rule = Rule::adaptive,
                                double abs_tol = 1e-10) {
  if (a <= -1.0)
    throw std::domain_error("power-weighted integral diverges for a <= -1");
  if (a >= 6.0) {
    auto g = [&](double s) { return std::pow(s, a) * f(s); };
    return integrate(g, 0.0, 1.0, rule, abs_tol);
  }
  const double r = std::ceil(7.0 / (1.0 + a));
  const double mu = r * (1.0 + a) - 1.0;
  auto g = [&](double v) { return r * std::pow(v, mu) * f(std::pow(v, r)); };
  return integrate(g, 0.0, 1.0, rule, abs_tol);
}

} // namespace censtail::quad
