#pragma once

// Numerical check of the hypotheses of the exponential-decay theorem for a
// given pipe and stationary profile, together with every constant entering
// the decay rate and the norm bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gasline/errors.hpp"
#include "gasline/model_core.hpp"
#include "gasline/stationary.hpp"

namespace gasline {

inline constexpr double kE = std::numbers::e;

struct Weights {
  double h1;
  double h2;
};

/// h1 = |k|, h2 = exp(-x/L).
inline Weights weights(double x, const PipeConfig& cfg) {
  return {std::abs(cfg.k), std::exp(-x / cfg.L)};
}

/// One named hypothesis: lhs compared against rhs, margin > 0 on the safe side.
struct ConditionEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  double worst_x = std::numeric_limits<double>::quiet_NaN();  ///< where the margin is smallest
};

namespace detail {

inline ConditionEntry below(std::string name, double lhs, double rhs, bool strict = true) {
  ConditionEntry e{std::move(name), lhs, rhs, rhs - lhs, false};
  e.pass = strict ? lhs < rhs : lhs <= rhs;
  return e;
}

}  // namespace detail

/// h2 < (a - u_bar) h1 on the grid, and the smallness condition
/// sup u_bar (a^2-u_bar^2)/(a^2+3u_bar^2) < 1/(2ek).
inline std::pair<ConditionEntry, ConditionEntry> check_weight_inequalities(
    const PipeConfig& cfg, const StationaryProfile& profile) {
  const double a2 = cfg.a * cfg.a;
  ConditionEntry strict{"weights_41a", -std::numeric_limits<double>::infinity(), 0.0, 0.0, true};
  double sup = -std::numeric_limits<double>::infinity();
  double sup_x = 0.0;
  for (std::size_t i = 0; i < profile.xs.size(); ++i) {
    const double x = profile.xs[i];
    const double u = profile.u_bar[i];
    const Weights w = weights(x, cfg);
    const double gap = w.h2 - (cfg.a - u) * w.h1;
    if (gap > strict.lhs) {
      strict.lhs = gap;
      strict.worst_x = x;
    }
    const double g = u * (a2 - u * u) / (a2 + 3.0 * u * u);
    if (g > sup) {
      sup = g;
      sup_x = x;
    }
  }
  strict.margin = -strict.lhs;
  strict.pass = strict.lhs < 0.0;
  ConditionEntry small = detail::below("ubarvor2", sup, 1.0 / (2.0 * kE * cfg.k));
  small.worst_x = sup_x;
  return {strict, small};
}

/// Symmetric 2x2 matrix.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double det() const { return a11 * a22 - a12 * a12; }
  /// Sylvester criterion.
  bool positive_definite() const { return a11 > 0.0 && det() > 0.0; }
  double min_eigenvalue() const {
    const double m = 0.5 * (a11 + a22);
    const double r = std::hypot(0.5 * (a11 - a22), a12);
    return m - r;
  }
};

inline double b11(double z, const PipeConfig& cfg) {
  const double s = 1.0 + 2.0 * z * cfg.k;
  return s - s * s / (cfg.k * cfg.k * (cfg.a * cfg.a - z * z));
}

inline Sym2 matrix_B3(double z, const PipeConfig& cfg, double upsilon) {
  detail::require_subsonic(z, cfg.a, "matrix_B3");
  if (!(upsilon > cfg.k * cfg.k)) throw InputError("matrix_B3: need upsilon > k^2");
  const double d = cfg.a * cfg.a - z * z;
  const double off = (1.0 + 2.0 * z * cfg.k) / (cfg.k * d) - cfg.k;
  return {b11(z, cfg), off, upsilon - 1.0 / d};
}

/// C_g(z); singular at z = 0.
inline double C_g(double z, const PipeConfig& cfg) {
  detail::require_subsonic(z, cfg.a, "C_g");
  if (z == 0.0) throw DomainError("C_g: singular at z = 0");
  const double d = cfg.a * cfg.a - z * z;
  const double s = 2.0 + 1.5 * cfg.theta * z + 2.0 * cfg.theta * z * z * z / d;
  return d / (kE * z * z * s * s);
}

/// C_g written with the boundary slope of the stationary profile.
inline double C_g_from_slope(double ubar_L, double ubar_x_L, const PipeConfig& cfg) {
  detail::require_subsonic(ubar_L, cfg.a, "C_g");
  if (ubar_L == 0.0) throw DomainError("C_g: singular at z = 0");
  const double d = cfg.a * cfg.a - ubar_L * ubar_L;
  const double s = 1.5 * cfg.theta * ubar_L + 4.0 * std::abs(ubar_x_L) + 2.0;
  return d / (kE * ubar_L * ubar_L * s * s);
}

inline Sym2 matrix_A3(double z, const PipeConfig& cfg) {
  detail::require_subsonic(z, cfg.a, "matrix_A3");
  if (z == 0.0) throw DomainError("matrix_A3: singular at z = 0");
  const double a2 = cfg.a * cfg.a;
  const double d = a2 - z * z;
  return {(a2 + 3.0 * z * z) / (kE * d) - 2.0 * cfg.k * z, cfg.k - 2.0 * z / (kE * d),
          C_g(z, cfg) + 1.0 / (kE * d)};
}

struct Eps1Result {
  double eps1 = 0.0;
  std::string limiting;  ///< first failing test at the boundary, empty if capped
};

namespace detail {

/// Name of the first failing definiteness test at z, or nullptr.
inline const char* eps1_failure(double z, const PipeConfig& cfg, double upsilon) {
  const Sym2 b = matrix_B3(z, cfg, upsilon);
  if (!(b.a11 > 0.0)) return "b11";
  if (!(b.det() > 0.0)) return "det_B3";
  if (std::abs(z) < 1e-12 * cfg.a) return nullptr;  // puncture: C_g -> infinity
  const Sym2 m = matrix_A3(z, cfg);
  if (!(m.a11 > 0.0)) return "A3_11";
  if (!(m.det() > 0.0)) return "det_A3";
  return nullptr;
}

}  // namespace detail

/// Largest eps1 <= eps_cap with both matrices positive definite on |z| <= 2 eps1.
/// Each half-line is scanned outward on n_scan points and the first sign
/// change is refined by bisection.
inline Eps1Result find_eps1(const PipeConfig& cfg, double upsilon, std::size_t n_scan = 1000,
                            double eps_cap = -1.0) {
  if (eps_cap <= 0.0) eps_cap = 0.45 * cfg.a;
  if (!(upsilon > cfg.k * cfg.k)) throw InputError("find_eps1: need upsilon > k^2");
  const double reach = 2.0 * eps_cap;
  Eps1Result res{eps_cap, ""};
  if (const char* f = detail::eps1_failure(0.0, cfg, upsilon)) return {0.0, f};
  for (double side : {1.0, -1.0}) {
    double prev = 0.0;
    for (std::size_t j = 1; j <= n_scan; ++j) {
      const double z = side * reach * static_cast<double>(j) / static_cast<double>(n_scan);
      const char* f = detail::eps1_failure(z, cfg, upsilon);
      if (!f) {
        prev = z;
        continue;
      }
      double lo = prev;
      double hi = z;
      std::string why = f;
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * reach; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (const char* g = detail::eps1_failure(mid, cfg, upsilon)) {
          hi = mid;
          why = g;
        } else {
          lo = mid;
        }
      }
      const double radius = 0.5 * std::abs(lo);
      if (radius < res.eps1) res = {radius, why};
      break;
    }
  }
  return res;
}

/// k1(x, v0) = h1 (a^2 - (u_bar + v0)^2) - 2 h2 (u_bar + v0).
inline double k1_function(double ubar, double v0, const Weights& w, const PipeConfig& cfg) {
  const double z = ubar + v0;
  return w.h1 * (cfg.a * cfg.a - z * z) - 2.0 * w.h2 * z;
}

struct NormConstants {
  double K1 = 0.0;
  double K1_tilde = 0.0;
  double K_max = 0.0;
  double K_min = 0.0;
  double eps2 = 0.0;
};

/// Grid minima and maxima over x in [0, L] and |v0| <= eps2.
inline NormConstants compute_norm_constants(const PipeConfig& cfg, const StationaryProfile& profile,
                                            double eps2, std::size_t nx = 1001,
                                            std::size_t nv = 1001) {
  if (nx < 2 || nv < 2) throw InputError("compute_norm_constants: grids need two points");
  NormConstants c;
  c.eps2 = eps2;
  c.K1 = std::numeric_limits<double>::infinity();
  c.K1_tilde = std::numeric_limits<double>::infinity();
  double kmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = i + 1 == nx ? cfg.L : cfg.L * static_cast<double>(i) / static_cast<double>(nx - 1);
    const double ubar = profile.velocity(x);
    const Weights w = weights(x, cfg);
    const double ratio = w.h2 * w.h2 / w.h1;
    for (std::size_t j = 0; j < nv; ++j) {
      const double v0 =
          j + 1 == nv ? eps2 : -eps2 + 2.0 * eps2 * static_cast<double>(j) / static_cast<double>(nv - 1);
      const double k1 = k1_function(ubar, v0, w, cfg);
      c.K1 = std::min(c.K1, k1 - ratio);
      const double kt = k1 > 0.0 ? (w.h1 * k1 - w.h2 * w.h2) / k1
                                 : -std::numeric_limits<double>::infinity();
      c.K1_tilde = std::min(c.K1_tilde, kt);
      kmax = std::max(kmax, k1 + ratio);
    }
  }
  c.K_max = std::max(2.0 * cfg.k, kmax);
  c.K_min = 0.5 * std::min(c.K1, c.K1_tilde);
  return c;
}

/// Largest eps2 <= eps_cap for which K1 and K1_tilde stay positive, with
/// the constants evaluated there.
inline NormConstants find_eps2(const PipeConfig& cfg, const StationaryProfile& profile,
                               double eps_cap = -1.0, std::size_t nx = 1001,
                               std::size_t nv = 1001) {
  if (eps_cap <= 0.0) eps_cap = 0.45 * cfg.a;
  auto ok = [](const NormConstants& c) { return c.K1 > 0.0 && c.K1_tilde > 0.0; };
  NormConstants top = compute_norm_constants(cfg, profile, eps_cap, nx, nv);
  if (ok(top)) return top;
  NormConstants bottom = compute_norm_constants(cfg, profile, 0.0, nx, 2);
  if (!ok(bottom)) return bottom;
  double lo = 0.0;
  double hi = eps_cap;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(compute_norm_constants(cfg, profile, mid, nx, nv)))
      lo = mid;
    else
      hi = mid;
  }
  return compute_norm_constants(cfg, profile, lo, nx, nv);
}

namespace detail {

inline void require_below_sonic(double t, const PipeConfig& cfg, const char* what) {
  if (!(t >= 0.0 && t < cfg.a)) {
    std::ostringstream os;
    os << what << ": argument " << t << " outside [0, a)";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// Bound function for the E1 interior remainder, evaluated term by term.
inline double P0(double t, const PipeConfig& cfg) {
  detail::require_below_sonic(t, cfg, "P0");
  const double k = cfg.k;
  const double th = cfg.theta;
  const double a2 = cfg.a * cfg.a;
  const double a4 = a2 * a2;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t2 * t2;
  const double d = a2 - t2;
  const double d3 = d * d * d;
  const double c = 1.0 + th / 2.0;
  double bracket = th * th * (3.0 * a4 * t4 + 2.0 * a2 * t4 * t2 + t4 * t4) / (2.0 * d3) +
                   th * a2 * t / d + th * (t4 + 3.0 * a2 * t2) / (2.0 * d) +
                   th * th * (2.0 * t4 * t3 + 3.0 * a2 * t4 * t + 3.0 * a4 * t3) / (4.0 * d3) * t +
                   2.0 * t2 + th * (3.0 * a2 * t + t3) / d * t + 2.0 * t + 2.0 * t2 +
                   1.5 * th * t2 + th * t;
  return 4.0 * k * t2 + 2.0 * k * c * t + 4.0 * k * c * t2 + 2.0 * t + 4.0 * c * t2 +
         2.0 * (k + 1.0) * bracket;
}

/// Bound function for the E2 interior remainder, evaluated term by term. The
/// a^7 monomial is kept as printed.
inline double P1(double t, const PipeConfig& cfg) {
  detail::require_below_sonic(t, cfg, "P1");
  const double k = cfg.k;
  const double th = cfg.theta;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const double a = cfg.a;
  const double a2 = a * a;
  const double a4 = a2 * a2;
  const double a6 = a4 * a2;
  const double a7 = a6 * a;
  auto p = [t](int n) { return std::pow(t, n); };
  const double d = a2 - t * t;
  const double d3 = d * d * d;
  const double d4 = d3 * d;
  const double d5 = d4 * d;
  double bracket =
      th3 * (9.0 * a6 * p(2) + 2.0 * p(9) + 6.0 * a4 * p(5) + 11.0 * a2 * p(7)) / (8.0 * d4) * t +
      th2 * (p(7) + 6.0 * a4 * p(3) + 3.0 * a7) / (2.0 * d3) * t + th * p(3) / d * t + 4.0 * p(2) +
      th * (3.0 * a2 * t + p(3)) / d * 2.0 * t +
      th3 * (6.0 * a6 * p(6) + 4.0 * a2 * p(10) + p(12) + 3.0 * a4 * p(8)) / (2.0 * d5) +
      th2 * (a4 * p(3) + a2 * p(5)) / (2.0 * d3) + th2 * 3.0 * a4 * p(4) / d3 + th * a2 * t / d +
      th * (3.0 * a2 * p(2) + p(4)) / (2.0 * d) + 2.0 * t + 2.0 * t + 2.0 * p(2) + 4.0 * p(2) +
      3.0 * th * p(2) + 1.5 * th * p(2) + th * t + th * t;
  return 8.0 * t + 2.0 * t + 8.0 * p(2) + 4.0 * k * p(2) + 4.0 * k * t +
         2.0 * (k + 1.0) * bracket;
}

/// Coefficient of u_x(t,0)^2 in the Young bound of F(t,0)^2.
inline double K_partial(const PipeConfig& cfg, double ubar0) {
  detail::require_subsonic(ubar0, cfg.a, "K_partial");
  if (!(ubar0 > 0.0)) throw DomainError("K_partial: need u_bar_0 > 0");
  const double k = cfg.k;
  const double th = cfg.theta;
  const double a2 = cfg.a * cfg.a;
  const double u = ubar0;
  const double d = a2 - u * u;
  const double s = 4.0 / (k * k) + 2.0 * u / k +
                   th * (u * u * u * u + 3.0 * a2 * u * u + 2.0 / k * a2 * u) / (2.0 * d) +
                   2.5 * th / (k * k) + th / k * (3.0 * a2 * u - u * u * u) / d;
  return 2.0 * s * s;
}

/// Coefficient of u(t,0)^2 in the Young bound of F(t,0)^2.
inline double C_E1(const PipeConfig& cfg, double ubar0) {
  detail::require_subsonic(ubar0, cfg.a, "C_E1");
  if (!(ubar0 > 0.0)) throw DomainError("C_E1: need u_bar_0 > 0");
  const double k = cfg.k;
  const double th = cfg.theta;
  const double a2 = cfg.a * cfg.a;
  const double a4 = a2 * a2;
  const double u = ubar0;
  auto p = [u](int n) { return std::pow(u, n); };
  const double d = a2 - u * u;
  const double s = (6.0 * k * a4 * p(4) - 4.0 * k * a2 * p(6) + 2.0 * k * p(8) + 2.0 * p(7) -
                    3.0 * a2 * p(5) + 3.0 * a4 * p(3)) /
                   (4.0 * d * d * d);
  return 2.0 * th * th * th * th / (k * k) * s * s;
}

/// Bound in the C^1 x C^0 norm estimate: sup norms and H^1 norms on [0, L]
/// satisfy sup|f| <= sqrt(1 + 1/L) ||f||_{H^1}.
inline double sobolev_constant(double L) { return std::sqrt(1.0 + 1.0 / L); }

struct CertificateReport {
  std::vector<ConditionEntry> conditions;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::string> notes;
  bool pass = false;

  const ConditionEntry* condition(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }

  double constant(const std::string& name) const {
    for (const auto& [k, v] : constants)
      if (k == name) return v;
    throw InputError("CertificateReport: no constant named " + name);
  }
};

/// Evaluates every hypothesis for (cfg, profile). t_li_bound is the design
/// bound on the running sup of |u|, |u_x|, |u_t|; it is raised to cover the
/// profile terms |u_bar|, |u_bar'| that enter the same maximum.
inline CertificateReport check_theorem_conditions(const PipeConfig& cfg,
                                                  const StationaryProfile& profile,
                                                  double t_li_bound) {
  cfg.validate();
  if (profile.quiescent || profile.u_bar.empty())
    throw InputError("check_theorem_conditions: needs a sampled nonzero profile");
  CertificateReport rep;
  const double a = cfg.a;
  const double a2 = a * a;
  const double k = cfg.k;
  const double L = cfg.L;
  const double u0 = profile.u_bar_0;
  const double uL = profile.u_bar.back();
  const double floor_rate = 1.0 / (4.0 * kE * L * k);
  auto add = [&](ConditionEntry e) { rep.conditions.push_back(std::move(e)); };
  auto put = [&](const char* name, double v) { rep.constants.emplace_back(name, v); };

  add(detail::below("c2c1", 1.0 / (a * k), 1.0 - cfg.gamma));

  double umin = std::numeric_limits<double>::infinity();
  double umin_x = 0.0;
  double umax = -std::numeric_limits<double>::infinity();
  double umax_x = 0.0;
  for (std::size_t i = 0; i < profile.u_bar.size(); ++i) {
    if (profile.u_bar[i] < umin) {
      umin = profile.u_bar[i];
      umin_x = profile.xs[i];
    }
    if (profile.u_bar[i] > umax) {
      umax = profile.u_bar[i];
      umax_x = profile.xs[i];
    }
  }
  ConditionEntry pos{"ubar_positive", 0.0, umin, umin, umin > 0.0, umin_x};
  add(pos);
  ConditionEntry gam = detail::below("ubar_below_gamma_a", umax, cfg.gamma * a);
  gam.worst_x = umax_x;
  add(gam);
  if (!(umax < a)) {
    // sonic profile (branch point at x = L): the remaining quantities are undefined
    rep.notes.push_back("profile reaches the sound speed; remaining conditions not evaluated");
    rep.pass = false;
    return rep;
  }

  const double slope0 = 0.5 * cfg.theta * std::abs(u0) * u0 * u0 / (a2 - u0 * u0);
  const double slope_gap = std::abs(profile.u_bar_x.front() - slope0);
  add(detail::below("statvor", slope_gap, 1e-12 * std::max(std::abs(slope0), 1e-300), false));

  auto [w41a, w41c] = check_weight_inequalities(cfg, profile);
  add(w41a);
  add(w41c);

  const double upsilon = 2.0 * k * k;
  const Eps1Result e1 = find_eps1(cfg, upsilon);
  const double unorm = profile.max_velocity();
  const double uxnorm = profile.max_slope();
  add(detail::below("eps1", unorm, e1.eps1));

  const NormConstants nc = find_eps2(cfg, profile);
  ConditionEntry e2{"eps2_positive", 0.0, nc.eps2, nc.eps2, nc.eps2 > 0.0};
  add(e2);

  const double kp = K_partial(cfg, u0);
  const double two_over_k = u0 + 2.0 / k;
  add(detail::below("kpartial", 2.0 * k * k * kp, a2 - two_over_k * two_over_k, false));

  const double profile_floor = std::max(unorm, uxnorm);
  add(detail::below("t_li_bound", profile_floor, t_li_bound, false));
  const double t_eff = std::max(t_li_bound, profile_floor);

  const double ce1 = C_E1(cfg, u0);
  double kappa = std::numeric_limits<double>::infinity();
  if (t_eff < a && nc.K1 > 0.0 && nc.K1_tilde > 0.0) {
    kappa = (P0(t_eff, cfg) + P1(t_eff, cfg)) * (1.0 + L * L) * (1.0 / nc.K1 + 1.0 / nc.K1_tilde) +
            2.0 * k * k * ce1 * L / nc.K1;
  }
  add(detail::below("kappa", kappa, floor_rate, false));
  const double mu = 1.0 / (2.0 * kE * L * k) - kappa;

  const double tau1 = nc.K_min / (1.0 + 2.0 * L * L);
  const double tau2 = nc.K_max;
  const double eta1 = 2.0 * std::sqrt(tau2 / tau1);
  const double eta2 = 2.0 * sobolev_constant(L) * eta1;
  const double t0_third = 4.0 * kE * L * k * std::log(9.0 * (1.0 + 2.0 * L * L) * nc.K_max / nc.K_min);
  const double t_half = 8.0 * kE * L * k * std::log(2.0 * std::max(eta1, eta2));

  put("K1", nc.K1);
  put("K1_tilde", nc.K1_tilde);
  put("K_max", nc.K_max);
  put("K_min", nc.K_min);
  put("eps1", e1.eps1);
  put("eps2", nc.eps2);
  put("kappa", kappa);
  put("mu", mu);
  put("K_partial", kp);
  put("C_E1", ce1);
  put("C_g_at_L", C_g(uL, cfg));
  put("T0_third", t0_third);
  put("T_half", t_half);
  put("eta1", eta1);
  put("eta2", eta2);
  put("tau1", tau1);
  put("tau2", tau2);
  put("upsilon", upsilon);
  put("decay_floor", floor_rate);
  put("t_li_effective", t_eff);
  put("c_bar", profile.c_bar);
  double gap_min = std::numeric_limits<double>::infinity();
  for (double v : profile.u_bar) gap_min = std::min(gap_min, cfg.gamma * a - v);
  put("u_budget", std::min({e1.eps1, nc.eps2, gap_min, umin, 1.0 / k}));
  put("ux_budget", std::min(1.0, 1.0 / k));

  if (!e1.limiting.empty()) rep.notes.push_back("eps1 limited by " + e1.limiting);
  rep.notes.push_back("A3 scan excludes |z| < 1e-12 a, where C_g diverges to +infinity");
  if (profile.at_branch_point) rep.notes.push_back("c_bar equals -1 - theta L (branch point at x = L)");
  if (t_eff > t_li_bound) rep.notes.push_back("T_Li bound raised to cover |u_bar| and |u_bar'|");
  rep.notes.push_back("eps0(T) and C_T of the well-posedness estimate are not quantified");

  rep.pass = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                         [](const ConditionEntry& c) { return c.pass; });
  return rep;
}

}  // namespace gasline
