#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's own formula for the quantity being checked.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double e = std::numbers::e;

/// Root of w e^w = x on (-inf, -1] by bisection in long double.
inline double lambert_bisection(double x) {
  long double lo = -1000.0L;
  long double hi = -1.0L;
  const long double target = x;
  auto f = [&](long double w) { return w * std::exp(w) - target; };
  // f(lo) ~ 0^- - x > 0, f(-1) = -1/e - x < 0
  for (int i = 0; i < 400; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (f(mid) > 0.0L)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

/// RK4 for u' = theta/2 u^3 / (a^2 - u^2), returns u at the n_steps+1 nodes of [0, L].
inline std::vector<double> rk4_profile(double a, double theta, double L, double u0,
                                       std::size_t n_steps) {
  auto f = [&](long double u) { return 0.5L * theta * u * u * u / (a * a - u * u); };
  std::vector<double> out(n_steps + 1);
  long double u = u0;
  const long double h = static_cast<long double>(L) / n_steps;
  out[0] = u0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const long double k1 = f(u);
    const long double k2 = f(u + 0.5L * h * k1);
    const long double k3 = f(u + 0.5L * h * k2);
    const long double k4 = f(u + h * k3);
    u += h / 6.0L * (k1 + 2.0L * k2 + 2.0L * k3 + k4);
    out[i + 1] = static_cast<double>(u);
  }
  return out;
}

/// k1 = h1 (a^2 - z^2) - 2 h2 z with z the total velocity.
inline double k1(double h1, double h2, double z, double a) { return h1 * (a * a - z * z) - 2.0 * h2 * z; }

/// First completion form: (k1 - h2^2/h1) v1^2 + (sqrt(h1) v2 - h2/sqrt(h1) v1)^2.
inline double chi_form_v1(double h1, double h2, double z, double v1, double v2, double a) {
  const double kk = k1(h1, h2, z, a);
  const double s = std::sqrt(h1) * v2 - h2 / std::sqrt(h1) * v1;
  return (kk - h2 * h2 / h1) * v1 * v1 + s * s;
}

/// Second completion form: (h1 k1 - h2^2)/k1 v2^2 + (k1 v1 - h2 v2)^2 / k1.
inline double chi_form_v2(double h1, double h2, double z, double v1, double v2, double a) {
  const double kk = k1(h1, h2, z, a);
  const double s = kk * v1 - h2 * v2;
  return (h1 * kk - h2 * h2) / kk * v2 * v2 + s * s / kk;
}

/// F~(u, ux, ut) for u >= 0 in exact arithmetic.
inline Rational f_tilde_rational(const Rational& u, const Rational& ux, const Rational& ut,
                                 const Rational& theta) {
  const Rational au = u < 0 ? Rational(-u) : u;
  return -2 * ut * ux - 2 * u * ux * ux - Rational(3, 2) * theta * u * au * ux - theta * au * ut;
}

/// K_partial(k, u0) transcribed from its displayed definition, exact.
inline Rational k_partial_rational(const Rational& k, const Rational& u0, const Rational& a,
                                   const Rational& theta) {
  const Rational a2 = a * a;
  const Rational d = a2 - u0 * u0;
  const Rational br = Rational(4) / (k * k) + 2 * u0 / k +
                      theta * (u0 * u0 * u0 * u0 + 3 * a2 * u0 * u0 + 2 / k * a2 * u0) / (2 * d) +
                      Rational(5, 2) * theta / (k * k) + theta / k * (3 * a2 * u0 - u0 * u0 * u0) / d;
  return 2 * br * br;
}

/// C_E1(u0) transcribed from its displayed definition, exact.
inline Rational c_e1_rational(const Rational& k, const Rational& u0, const Rational& a,
                              const Rational& theta) {
  const Rational a2 = a * a;
  const Rational a4 = a2 * a2;
  auto p = [&](int n) {
    Rational r = 1;
    for (int i = 0; i < n; ++i) r *= u0;
    return r;
  };
  const Rational d = a2 - u0 * u0;
  const Rational br = (6 * k * a4 * p(4) - 4 * k * a2 * p(6) + 2 * k * p(8) + 2 * p(7) -
                       3 * a2 * p(5) + 3 * a4 * p(3)) /
                      (4 * d * d * d);
  const Rational th4 = theta * theta * theta * theta;
  return 2 * th4 / (k * k) * br * br;
}

/// 2x2 symmetric [[p, q], [q, r]].
struct Mat2 {
  double p, q, r;
};

inline Mat2 b3_matrix(double z, double k, double a, double upsilon) {
  const double d = a * a - z * z;
  const double s = 1.0 + 2.0 * z * k;
  return {s - s * s / (k * k * d), s / (k * d) - k, upsilon - 1.0 / d};
}

inline double cg(double z, double a, double theta) {
  const double d = a * a - z * z;
  const double s = 2.0 + 1.5 * theta * z + 2.0 * theta * z * z * z / d;
  return d / (e * z * z * s * s);
}

inline Mat2 a3_matrix(double z, double k, double a, double theta) {
  const double d = a * a - z * z;
  return {(a * a + 3.0 * z * z) / (e * d) - 2.0 * k * z, k - 2.0 * z / (e * d),
          cg(z, a, theta) + 1.0 / (e * d)};
}

/// Smallest eigenvalue via the closed form for symmetric 2x2 matrices.
inline double min_eig(const Mat2& m) {
  const double mean = 0.5 * (m.p + m.r);
  const double rad = std::hypot(0.5 * (m.p - m.r), m.q);
  return mean - rad;
}

/// Composite Simpson on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  if (n % 2) ++n;
  const double h = (hi - lo) / static_cast<double>(n);
  double s = f(lo) + f(hi);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(i));
  return s * h / 3.0;
}

/// Least-squares slope of log2(err) against log2(1/h): the observed order.
inline double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += -std::log2(h[i]);
    my += std::log2(err[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -std::log2(h[i]) - mx;
    sxx += x * x;
    sxy += x * (std::log2(err[i]) - my);
  }
  return -sxy / sxx;
}

}  // namespace oracle
