#pragma once

// Stationary subsonic velocity profiles: closed form through the W_{-1}
// branch of the Lambert function, and an RK4 integrator for the general
// first-order stationary ODE with constant lambda.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "gasline/errors.hpp"
#include "gasline/model_core.hpp"

namespace gasline {

namespace detail {

// 1/e split into a double and its rounding remainder.
inline constexpr double kInvEHi = 0.36787944117144233;
inline constexpr double kInvELo = -1.2428753672788363e-17;

/// Series of W_{-1} at the branch point in p = -sqrt(2 (1 + e x)).
inline double lambert_branch_series(double p) {
  static constexpr double c[] = {-1.0,
                                 1.0,
                                 -1.0 / 3.0,
                                 11.0 / 72.0,
                                 -43.0 / 540.0,
                                 769.0 / 17280.0,
                                 -221.0 / 8505.0,
                                 680863.0 / 43545600.0,
                                 -1963.0 / 204120.0,
                                 226287557.0 / 37623398400.0};
  double s = 0.0;
  for (int i = 9; i >= 0; --i) s = s * p + c[i];
  return s;
}

}  // namespace detail

/// Lower real branch of the Lambert function on [-1/e, 0).
inline double lambert_w_minus1(double x) {
  if (x == -detail::kInvEHi) return -1.0;
  if (!(x > -detail::kInvEHi && x < 0.0)) {
    std::ostringstream os;
    os << "lambert_w_minus1: argument " << x << " outside (-1/e, 0)";
    throw DomainError(os.str());
  }

  // e (x + 1/e) without cancellation
  const double t = std::exp(1.0) * ((x + detail::kInvEHi) + detail::kInvELo);
  double w;
  if (t < 0.25) {
    w = detail::lambert_branch_series(-std::sqrt(2.0 * std::max(t, 0.0)));
    if (t < 1e-6) return std::min(w, -1.0);
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (!(next <= -1.0)) next = 0.5 * (w - 1.0);
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next);
    w = next;
    if (done) break;
  }
  return w;
}

/// W_{-1}(-exp(ell)) for ell <= -1, usable when exp(ell) underflows.
inline double lambert_w_minus1_neg_exp(double ell) {
  if (!(ell <= -1.0)) throw DomainError("lambert_w_minus1_neg_exp: need ell <= -1");
  if (ell > -700.0) return lambert_w_minus1(-std::exp(ell));
  // w + ln(-w) = ell, Newton in that form
  double w = ell - std::log(-ell);
  for (int it = 0; it < 50; ++it) {
    const double g = w + std::log(-w) - ell;
    const double next = w - g * w / (w + 1.0);
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next);
    w = next;
    if (done) break;
  }
  return w;
}

/// Stationary total velocity sampled on a uniform grid, with the closed form
/// available at arbitrary x.
struct StationaryProfile {
  PipeConfig cfg;
  double u_bar_0 = 0.0;
  double c_bar = 0.0;         ///< Lambert constant, ln xi0 - xi0 with xi0 = a^2/u0^2
  double lambda_const = 0.0;  ///< always zero for profiles built here
  std::vector<double> xs;
  std::vector<double> u_bar;
  std::vector<double> u_bar_x;
  std::vector<double> u_bar_xx;
  bool at_branch_point = false;  ///< c_bar == -1 - theta L: u(L) sits on the branch point
  bool quiescent = false;        ///< u_bar identically zero

  double velocity(double x) const {
    if (quiescent) return 0.0;
    if (x == 0.0 || cfg.theta == 0.0) return u_bar_0;
    const double ell = std::min(cfg.theta * x + c_bar, -1.0);
    return cfg.a / std::sqrt(-lambert_w_minus1_neg_exp(ell));
  }

  BackgroundState at(double x) const {
    if (quiescent) return {};
    const double u = velocity(x);
    return {u, stationary_slope(u, cfg), stationary_curvature(u, cfg)};
  }

  std::size_t n_cells() const { return xs.empty() ? 0 : xs.size() - 1; }

  double max_velocity() const {
    double m = 0.0;
    for (double v : u_bar) m = std::max(m, std::abs(v));
    return m;
  }

  double max_slope() const {
    double m = 0.0;
    for (double v : u_bar_x) m = std::max(m, std::abs(v));
    return m;
  }

  /// 0 < u_bar < gamma a on every grid node.
  bool below_gamma_a() const {
    for (double v : u_bar)
      if (!(v > 0.0 && v < cfg.gamma * cfg.a)) return false;
    return !u_bar.empty();
  }

  /// Max norm of the residual of (a^2-u^2) u'' - 2u u'^2 - (3/2) theta u|u| u'.
  double second_order_residual() const {
    double r = 0.0;
    const double a2 = cfg.a * cfg.a;
    for (std::size_t i = 0; i < u_bar.size(); ++i) {
      const double u = u_bar[i];
      const double ux = u_bar_x[i];
      const double res = (a2 - u * u) * u_bar_xx[i] - 2.0 * u * ux * ux -
                         1.5 * cfg.theta * u * std::abs(u) * ux;
      r = std::max(r, std::abs(res));
    }
    return r;
  }

  /// The zero-velocity state on the same grid.
  static StationaryProfile zero(const PipeConfig& cfg, std::size_t n_cells) {
    StationaryProfile p;
    p.cfg = cfg;
    p.quiescent = true;
    p.xs.resize(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i)
      p.xs[i] = cfg.L * static_cast<double>(i) / static_cast<double>(n_cells);
    p.u_bar.assign(n_cells + 1, 0.0);
    p.u_bar_x.assign(n_cells + 1, 0.0);
    p.u_bar_xx.assign(n_cells + 1, 0.0);
    return p;
  }
};

/// Largest pipe length that keeps the profile from u0 on the W_{-1} branch.
inline double max_profile_length(const PipeConfig& cfg, double u_bar_0) {
  const double xi0 = cfg.a * cfg.a / (u_bar_0 * u_bar_0);
  const double c_bar = std::log(xi0) - xi0;
  if (cfg.theta == 0.0) return std::numeric_limits<double>::infinity();
  return (-1.0 - c_bar) / cfg.theta;
}

/// Samples the closed-form lambda = 0 profile with u(0) = u_bar_0 on n_cells
/// uniform cells.
inline StationaryProfile build_profile(const PipeConfig& cfg, double u_bar_0,
                                       std::size_t n_cells = 1000) {
  cfg.validate();
  if (n_cells < 1) throw InputError("build_profile: need at least one cell");
  if (!(u_bar_0 > 0.0 && u_bar_0 < cfg.gamma * cfg.a)) {
    std::ostringstream os;
    os << "build_profile: u_bar_0 = " << u_bar_0 << " outside (0, gamma a) = (0, "
       << cfg.gamma * cfg.a << ")";
    throw InputError(os.str());
  }
  StationaryProfile p;
  p.cfg = cfg;
  p.u_bar_0 = u_bar_0;
  const double xi0 = cfg.a * cfg.a / (u_bar_0 * u_bar_0);
  p.c_bar = std::log(xi0) - xi0;
  const double limit = -1.0 - cfg.theta * cfg.L;
  if (p.c_bar > limit) {
    const double lmax = max_profile_length(cfg, u_bar_0);
    std::ostringstream os;
    os << "build_profile: profile from u_bar_0 = " << u_bar_0 << " turns sonic before x = L = "
       << cfg.L << "; admissible length is at most " << lmax;
    throw ProfileError(os.str(), lmax);
  }
  p.at_branch_point = p.c_bar == limit;

  p.xs.resize(n_cells + 1);
  p.u_bar.resize(n_cells + 1);
  p.u_bar_x.resize(n_cells + 1);
  p.u_bar_xx.resize(n_cells + 1);
  for (std::size_t i = 0; i <= n_cells; ++i) {
    const double x =
        i == n_cells ? cfg.L : cfg.L * static_cast<double>(i) / static_cast<double>(n_cells);
    // on the branch point the profile reaches a at x = L with unbounded slope
    const BackgroundState s =
        p.at_branch_point && i == n_cells
            ? BackgroundState{p.velocity(x), std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity()}
            : p.at(x);
    p.xs[i] = x;
    p.u_bar[i] = s.u;
    p.u_bar_x[i] = s.u_x;
    p.u_bar_xx[i] = s.u_xx;
  }
  return p;
}

/// rho_bar = q / u_bar on the profile grid.
inline std::vector<double> stationary_density(const StationaryProfile& profile, double q_const) {
  if (!(q_const > 0.0)) throw InputError("stationary_density: mass flux must be positive");
  if (profile.quiescent) throw DomainError("stationary_density: zero velocity profile");
  std::vector<double> rho(profile.u_bar.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = q_const / profile.u_bar[i];
  return rho;
}

enum class LambdaProfileKind { increasing, decreasing, constant };

struct LambdaOdeReport {
  LambdaProfileKind kind = LambdaProfileKind::constant;
  std::vector<double> xs;
  std::vector<double> u;
  bool reached_sonic = false;  ///< |u| -> a inside the horizon
  double x0 = std::numeric_limits<double>::infinity();  ///< end of the existence interval
};

/// RK4 for (a^2 - u^2) u' = lambda + (theta/2)|u| u^2 from u(0) = u_bar_0 up
/// to x = horizon (default L). Once |u| passes 0.9 a the independent variable
/// is switched to u, which resolves the approach to the sonic line.
inline LambdaOdeReport general_lambda_ode(const PipeConfig& cfg, double u_bar_0, double lambda,
                                          std::size_t n_steps = 10000, double horizon = -1.0) {
  if (!(std::abs(u_bar_0) < cfg.a))
    throw DomainError("general_lambda_ode: |u_bar_0| must be below a");
  if (horizon <= 0.0) horizon = cfg.L;
  const double a2 = cfg.a * cfg.a;
  auto rhs_num = [&](double u) { return lambda + 0.5 * cfg.theta * std::abs(u) * u * u; };
  auto f = [&](double u) { return rhs_num(u) / (a2 - u * u); };

  LambdaOdeReport rep;
  const double drive = lambda + 0.5 * cfg.theta * u_bar_0 * u_bar_0 * u_bar_0;
  rep.kind = drive > 0.0   ? LambdaProfileKind::increasing
             : drive < 0.0 ? LambdaProfileKind::decreasing
                           : LambdaProfileKind::constant;
  rep.xs.push_back(0.0);
  rep.u.push_back(u_bar_0);

  const double h = horizon / static_cast<double>(n_steps);
  const double switch_at = 0.9 * cfg.a;
  double x = 0.0;
  double u = u_bar_0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    if (std::abs(u) >= switch_at) break;
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    const double un = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(std::abs(un) < cfg.a)) break;  // overshoot; hand over to the u-parametrisation
    u = un;
    x = i + 1 == n_steps ? horizon : h * static_cast<double>(i + 1);
    rep.xs.push_back(x);
    rep.u.push_back(u);
  }
  if (x >= horizon) return rep;

  // x as a function of u from the current state to the sonic line
  const double target = rep.kind == LambdaProfileKind::decreasing ? -cfg.a : cfg.a;
  if (rep.kind == LambdaProfileKind::constant) return rep;
  {
    // an equilibrium between u and the sonic line stops the blowup
    const double end_num = rhs_num(target);
    if ((rep.kind == LambdaProfileKind::increasing && !(end_num > 0.0)) ||
        (rep.kind == LambdaProfileKind::decreasing && !(end_num < 0.0)) ||
        (rhs_num(u) > 0.0) != (rep.kind == LambdaProfileKind::increasing)) {
      return rep;
    }
  }
  auto g = [&](double v) { return (a2 - v * v) / rhs_num(v); };
  const std::size_t m = 2000;
  const double du = (target - u) / static_cast<double>(m);
  bool past_horizon = false;
  for (std::size_t j = 0; j < m; ++j) {
    const double v = u + du * static_cast<double>(j);
    const double k1 = g(v);
    const double k2 = g(v + 0.5 * du);
    const double k4 = g(v + du);
    const double xn = x + du / 6.0 * (k1 + 4.0 * k2 + k4);
    const double vn = j + 1 == m ? target : v + du;
    if (!past_horizon && xn > horizon) {
      const double s = (horizon - x) / (xn - x);
      rep.xs.push_back(horizon);
      rep.u.push_back(v + s * (vn - v));
      past_horizon = true;
    } else if (!past_horizon) {
      rep.xs.push_back(xn);
      rep.u.push_back(vn);
    }
    x = xn;
  }
  rep.x0 = x;
  rep.reached_sonic = !past_horizon;
  return rep;
}

}  // namespace gasline
