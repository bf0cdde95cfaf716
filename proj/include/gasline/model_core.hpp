#pragma once

// Isothermal Euler pipe model in velocity form: source terms of the
// quasilinear wave equation, Riemann invariants, eigenvalues and density
// reconstruction.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gasline/errors.hpp"

namespace gasline {

/// Physical and control parameters of one stabilization problem.
struct PipeConfig {
  double a = 1.0;      ///< sonic speed, > 0
  double theta = 1.0;  ///< friction ratio f_g / delta, >= 0
  double L = 1.0;      ///< pipe length, > 0
  double k = 10.0;     ///< feedback gain in u_x(t,0) = k u_t(t,0), > 0
  double gamma = 0.5;  ///< subsonic margin, in (0, 1/2]

  /// Throws InputError on the first violated field invariant.
  void validate() const {
    auto bad = [](const char* field, double v, const char* rule) {
      std::ostringstream os;
      os << "pipe." << field << " = " << v << " violates " << rule;
      throw InputError(os.str());
    };
    if (!(a > 0.0) || !std::isfinite(a)) bad("a", a, "a > 0");
    if (!(theta >= 0.0) || !std::isfinite(theta)) bad("theta", theta, "theta >= 0");
    if (!(L > 0.0) || !std::isfinite(L)) bad("L", L, "L > 0");
    if (!(k > 0.0) || !std::isfinite(k)) bad("k", k, "k > 0");
    if (!(gamma > 0.0 && gamma <= 0.5)) bad("gamma", gamma, "0 < gamma <= 1/2");
  }

  /// Feedback-gain condition 1/(a k) < 1 - gamma.
  bool gain_condition_holds() const { return 1.0 / (a * k) < 1.0 - gamma; }
};

struct PhysicalState {
  double rho = 1.0;  ///< density, > 0
  double q = 0.0;    ///< mass flux
};

struct RiemannPair {
  double r_plus = 0.0;
  double r_minus = 0.0;
};

/// Stationary velocity and its first two derivatives at one point.
struct BackgroundState {
  double u = 0.0;
  double u_x = 0.0;
  double u_xx = 0.0;
};

/// Deviation field and its derivatives on a uniform grid at one time.
struct FieldSnapshot {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<double> u;
  std::vector<double> u_t;
  std::vector<double> u_x;
  std::vector<double> u_xx;
  std::vector<double> u_tx;

  std::size_t size() const { return xs.size(); }

  bool consistent() const {
    const std::size_t n = xs.size();
    return n >= 2 && u.size() == n && u_t.size() == n && u_x.size() == n && u_xx.size() == n &&
           u_tx.size() == n;
  }

  /// |u(L)| and |u_x(0) - k u_t(0)|.
  double dirichlet_residual() const { return std::abs(u.back()); }
  double neumann_residual(double k) const { return std::abs(u_x.front() - k * u_t.front()); }

  static FieldSnapshot zeros(std::span<const double> grid, double t = 0.0) {
    FieldSnapshot s;
    s.t = t;
    s.xs.assign(grid.begin(), grid.end());
    s.u.assign(grid.size(), 0.0);
    s.u_t = s.u_x = s.u_xx = s.u_tx = s.u;
    return s;
  }
};

/// Anything that can evaluate the stationary state at an arbitrary x.
template <class P>
concept BackgroundProvider = requires(const P& p, double x) {
  { p.at(x) } -> std::convertible_to<BackgroundState>;
};

/// Relative distance from the sonic line below which inputs are rejected.
inline constexpr double kSonicGuard = 1e-9;

namespace detail {

inline void require_subsonic(double z, double a, const char* what) {
  if (!(std::abs(z) < a * (1.0 - kSonicGuard))) {
    std::ostringstream os;
    os << what << ": velocity " << z << " at or beyond the sonic line (a = " << a << ")";
    throw DomainError(os.str());
  }
}

/// F~ with |u| replaced by u, i.e. the branch valid for nonnegative total
/// velocity. The expanded source terms are polynomial identities in this form.
inline double f_tilde_positive(double u, double ux, double ut, double theta) {
  return -2.0 * ut * ux - 2.0 * u * ux * ux - 1.5 * theta * u * u * ux - theta * u * ut;
}

inline double sign(double z) { return (z > 0.0) - (z < 0.0); }

}  // namespace detail

/// Lower-order term of the second-order velocity equation:
/// -2 u_t u_x - 2 u u_x^2 - (3/2) theta u |u| u_x - theta |u| u_t.
inline double source_F_tilde(double u, double ux, double ut, double theta) {
  return -2.0 * ut * ux - 2.0 * u * ux * ux - 1.5 * theta * u * std::abs(u) * ux -
         theta * std::abs(u) * ut;
}

/// Slope of the stationary profile that corresponds to a stationary Euler
/// state: (a^2 - u^2) u' = (theta/2) |u| u^2.
inline double stationary_slope(double ubar, const PipeConfig& cfg) {
  return 0.5 * cfg.theta * std::abs(ubar) * ubar * ubar / (cfg.a * cfg.a - ubar * ubar);
}

/// Second derivative obtained by differentiating the stationary slope ODE.
inline double stationary_curvature(double ubar, const PipeConfig& cfg) {
  const double a2 = cfg.a * cfg.a;
  const double d = a2 - ubar * ubar;
  return 0.5 * cfg.theta * std::abs(ubar) * ubar * (3.0 * a2 - ubar * ubar) / (d * d) *
         stationary_slope(ubar, cfg);
}

/// True when the expanded source terms are valid identities.
inline bool expansion_regime(double ubar, double u) { return ubar >= 0.0 && ubar + u >= 0.0; }

/// F = F~(u+ubar, u_x+ubar_x, u_t) - (a^2-(ubar+u)^2)/(a^2-ubar^2) F~(ubar, ubar_x, 0).
inline double source_F_composed(const BackgroundState& bg, double u, double ux, double ut,
                                const PipeConfig& cfg) {
  const double z = bg.u + u;
  detail::require_subsonic(z, cfg.a, "source_F");
  detail::require_subsonic(bg.u, cfg.a, "source_F");
  const double a2 = cfg.a * cfg.a;
  const double ratio = (a2 - z * z) / (a2 - bg.u * bg.u);
  return source_F_tilde(z, ux + bg.u_x, ut, cfg.theta) -
         ratio * source_F_tilde(bg.u, bg.u_x, 0.0, cfg.theta);
}

/// Expanded source for a nonnegative stationary profile obeying the
/// stationary slope ODE; only ubar enters, its slope is eliminated.
inline double source_F_expanded(double ubar, double u, double ux, double ut,
                                const PipeConfig& cfg) {
  detail::require_subsonic(ubar + u, cfg.a, "source_F");
  detail::require_subsonic(ubar, cfg.a, "source_F");
  const double a2 = cfg.a * cfg.a;
  const double a4 = a2 * a2;
  const double th = cfg.theta;
  const double b = ubar;
  const double b2 = b * b;
  const double b3 = b2 * b;
  const double b4 = b2 * b2;
  const double d = a2 - b2;
  const double d3 = d * d * d;

  const double c_u = th * th * (3.0 * a4 * b4 - 2.0 * a2 * b4 * b2 + b4 * b4) / (2.0 * d3);
  const double c_ut = th * a2 * b / d;
  const double c_ux = th * (b4 + 3.0 * a2 * b2) / (2.0 * d);
  const double c_uu = th * th * (2.0 * b4 * b3 - 3.0 * a2 * b4 * b + 3.0 * a4 * b3) / (4.0 * d3);
  const double c_uux = th * (3.0 * a2 * b - b3) / d;

  return detail::f_tilde_positive(u, ux, ut, th) - c_u * u - c_ut * ut - c_ux * ux -
         c_uu * u * u - 2.0 * b * ux * ux - c_uux * u * ux;
}

/// Source of the deviation equation. Uses the expanded form inside its
/// regime of validity and the composed form elsewhere.
inline double source_F(const BackgroundState& bg, double u, double ux, double ut,
                       const PipeConfig& cfg) {
  if (expansion_regime(bg.u, u)) return source_F_expanded(bg.u, u, ux, ut, cfg);
  return source_F_composed(bg, u, ux, ut, cfg);
}

template <BackgroundProvider P>
double source_F(double x, double u, double ux, double ut, const P& profile,
                const PipeConfig& cfg) {
  return source_F(profile.at(x), u, ux, ut, cfg);
}

/// d/dx of the composed source by the chain rule, literal |.| throughout.
/// Needs ubar_xx in the background state.
inline double source_F_x_composed(const BackgroundState& bg, double u, double ux, double ut,
                                  double uxx, double utx, const PipeConfig& cfg) {
  const double z = bg.u + u;
  detail::require_subsonic(z, cfg.a, "source_F_x");
  detail::require_subsonic(bg.u, cfg.a, "source_F_x");
  const double th = cfg.theta;
  const double a2 = cfg.a * cfg.a;

  // total derivative of F~(U, X, T) along x
  auto dtilde = [th](double U, double X, double T, double Ux, double Xx, double Tx) {
    const double dU = -2.0 * X * X - 3.0 * th * std::abs(U) * X - th * detail::sign(U) * T;
    const double dX = -2.0 * T - 4.0 * U * X - 1.5 * th * U * std::abs(U);
    const double dT = -2.0 * X - th * std::abs(U);
    return dU * Ux + dX * Xx + dT * Tx;
  };

  const double zx = bg.u_x + ux;
  const double total = dtilde(z, zx, ut, zx, bg.u_xx + uxx, utx);

  const double db = a2 - bg.u * bg.u;
  const double dz = a2 - z * z;
  const double ratio = dz / db;
  const double ratio_x = (-2.0 * z * zx * db + 2.0 * bg.u * bg.u_x * dz) / (db * db);
  const double g = source_F_tilde(bg.u, bg.u_x, 0.0, th);
  const double g_x = dtilde(bg.u, bg.u_x, 0.0, bg.u_x, bg.u_xx, 0.0);
  return total - ratio_x * g - ratio * g_x;
}

/// Term-by-term expansion of d/dx F for a nonnegative stationary profile
/// obeying the stationary slope ODE.
inline double source_F_x_expanded(double ubar, double u, double ux, double ut, double uxx,
                                  double utx, const PipeConfig& cfg) {
  detail::require_subsonic(ubar + u, cfg.a, "source_F_x");
  detail::require_subsonic(ubar, cfg.a, "source_F_x");
  const double th = cfg.theta;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const double a2 = cfg.a * cfg.a;
  const double a4 = a2 * a2;
  const double a6 = a4 * a2;
  const double b = ubar;
  const double b2 = b * b;
  const double b3 = b2 * b;
  const double b4 = b2 * b2;
  const double b5 = b4 * b;
  const double b6 = b4 * b2;
  const double d = a2 - b2;
  const double d2 = d * d;
  const double d3 = d2 * d;
  const double d5 = d3 * d2;

  // derivative of F~(u, u_x, u_t) for nonnegative total velocity
  double fx = -2.0 * ux * utx - 2.0 * ut * uxx - 2.0 * ux * ux * ux - 4.0 * u * ux * uxx -
              3.0 * th * u * ux * ux - 1.5 * th * u * u * uxx - th * ux * ut - th * u * utx;

  fx -= th3 * b5 * (9.0 * a6 - 6.0 * a4 * b2 + 11.0 * a2 * b4 - 2.0 * b6) / (8.0 * d5) * u * u;
  fx -= 3.0 * th2 * b3 * (2.0 * a4 - a2 * b2 + b4) / (2.0 * d3) * u * ux;
  fx -= th * b3 / d * ux * ux;
  fx -= 4.0 * b * ux * uxx;
  fx -= th * (3.0 * a2 * b - b3) / d * (ux * ux + u * uxx);
  fx -= th3 * (6.0 * a6 * b6 + 4.0 * a2 * b6 * b4 - b6 * b6 - 3.0 * a4 * b6 * b2) /
        (2.0 * d5) * u;
  fx -= th2 * (a4 * b3 + a2 * b5) / (2.0 * d3) * ut;
  fx -= th2 * 3.0 * a4 * b4 / d3 * ux;
  fx -= th * a2 * b / d * utx;
  fx -= th * (3.0 * a2 * b2 + b4) / (2.0 * d) * uxx;
  return fx;
}

/// d/dx of the deviation source. Expanded form in its regime, chain rule of
/// the composed form elsewhere.
inline double source_F_x(const BackgroundState& bg, double u, double ux, double ut, double uxx,
                         double utx, const PipeConfig& cfg) {
  if (expansion_regime(bg.u, u)) return source_F_x_expanded(bg.u, u, ux, ut, uxx, utx, cfg);
  return source_F_x_composed(bg, u, ux, ut, uxx, utx, cfg);
}

template <BackgroundProvider P>
double source_F_x(double x, double u, double ux, double ut, double uxx, double utx,
                  const P& profile, const PipeConfig& cfg) {
  return source_F_x(profile.at(x), u, ux, ut, uxx, utx, cfg);
}

// ---------------------------------------------------------------------------
// Riemann invariants

/// R+- = -q/rho -+ a ln rho.
inline RiemannPair riemann_from_physical(const PhysicalState& s, const PipeConfig& cfg) {
  if (!(s.rho > 0.0)) throw DomainError("riemann_from_physical: density must be positive");
  const double v = s.q / s.rho;
  const double l = cfg.a * std::log(s.rho);
  return {-v - l, -v + l};
}

inline PhysicalState physical_from_riemann(const RiemannPair& r, const PipeConfig& cfg) {
  const double rho = std::exp((r.r_minus - r.r_plus) / (2.0 * cfg.a));
  return {rho, -0.5 * (r.r_plus + r.r_minus) * rho};
}

/// Velocity carried by a Riemann pair.
inline double velocity(const RiemannPair& r) { return -0.5 * (r.r_plus + r.r_minus); }

/// Positive subsonic flow, 0 < q/rho < a.
inline bool is_subsonic(const PhysicalState& s, double a) {
  const double v = s.q / s.rho;
  return s.rho > 0.0 && v > 0.0 && v < a;
}

/// Positive subsonic flow in Riemann form, -2a < R+ + R- < 0.
inline bool is_subsonic(const RiemannPair& r, double a) {
  const double s = r.r_plus + r.r_minus;
  return s > -2.0 * a && s < 0.0;
}

/// Both components of the diagonal source: (theta/8) s |s| with s = R+ + R-.
inline RiemannPair riemann_source(const RiemannPair& r, double theta) {
  const double s = r.r_plus + r.r_minus;
  const double v = theta / 8.0 * s * std::abs(s);
  return {v, v};
}

struct Eigenvalues {
  double minus;
  double plus;
};

inline Eigenvalues eigenvalues(double u_total, double a) { return {u_total - a, u_total + a}; }

// ---------------------------------------------------------------------------
// Density reconstruction and Euler residuals

/// ln rho(x) from the total velocity field by trapezoid quadrature of
/// (ln rho)_x = -(u_t + u u_x + (theta/2)|u| u) / a^2, anchored at x = 0.
inline std::vector<double> reconstruct_log_density(std::span<const double> xs,
                                                   std::span<const double> u_total,
                                                   std::span<const double> u_total_t,
                                                   std::span<const double> u_total_x,
                                                   double rho_at_0, const PipeConfig& cfg) {
  if (!(rho_at_0 > 0.0)) throw DomainError("reconstruct_log_density: anchor density must be positive");
  const std::size_t n = xs.size();
  if (u_total.size() != n || u_total_t.size() != n || u_total_x.size() != n)
    throw InputError("reconstruct_log_density: array length mismatch");
  auto integrand = [&](std::size_t i) {
    const double z = u_total[i];
    detail::require_subsonic(z, cfg.a, "reconstruct_log_density");
    return -(u_total_t[i] + z * u_total_x[i] + 0.5 * cfg.theta * std::abs(z) * z) /
           (cfg.a * cfg.a);
  };
  std::vector<double> out(n);
  if (n == 0) return out;
  out[0] = std::log(rho_at_0);
  double prev = integrand(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = integrand(i);
    out[i] = out[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (prev + cur);
    prev = cur;
  }
  return out;
}

/// Density and flux sampled on a uniform space-time grid, row-major in time.
struct SpaceTimeSamples {
  std::vector<double> ts;
  std::vector<double> xs;
  std::vector<double> rho;  ///< rho[it * xs.size() + ix]
  std::vector<double> q;

  double rho_at(std::size_t it, std::size_t ix) const { return rho[it * xs.size() + ix]; }
  double q_at(std::size_t it, std::size_t ix) const { return q[it * xs.size() + ix]; }
};

struct EulerResidual {
  double mass = 0.0;      ///< max |rho_t + q_x|
  double momentum = 0.0;  ///< max |q_t + (q^2/rho + a^2 rho)_x + (theta/2) q|q|/rho|
};

/// Max-norm of centered finite-difference residuals of both conservation
/// laws over interior space-time nodes.
inline EulerResidual euler_residual(const SpaceTimeSamples& s, const PipeConfig& cfg) {
  const std::size_t nt = s.ts.size();
  const std::size_t nx = s.xs.size();
  if (s.rho.size() != nt * nx || s.q.size() != nt * nx)
    throw InputError("euler_residual: sample array size mismatch");
  if (nt < 3 || nx < 3) throw InputError("euler_residual: need at least 3 nodes per axis");
  for (double r : s.rho)
    if (!(r > 0.0)) throw DomainError("euler_residual: nonpositive density sample");

  const double a2 = cfg.a * cfg.a;
  auto momentum_flux = [&](std::size_t it, std::size_t ix) {
    const double r = s.rho_at(it, ix);
    const double q = s.q_at(it, ix);
    return q * q / r + a2 * r;
  };
  EulerResidual res;
  for (std::size_t it = 1; it + 1 < nt; ++it) {
    const double dt2 = s.ts[it + 1] - s.ts[it - 1];
    for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
      const double dx2 = s.xs[ix + 1] - s.xs[ix - 1];
      const double rho_t = (s.rho_at(it + 1, ix) - s.rho_at(it - 1, ix)) / dt2;
      const double q_t = (s.q_at(it + 1, ix) - s.q_at(it - 1, ix)) / dt2;
      const double q_x = (s.q_at(it, ix + 1) - s.q_at(it, ix - 1)) / dx2;
      const double flux_x = (momentum_flux(it, ix + 1) - momentum_flux(it, ix - 1)) / dx2;
      const double q = s.q_at(it, ix);
      const double r1 = rho_t + q_x;
      const double r2 = q_t + flux_x + 0.5 * cfg.theta * q * std::abs(q) / s.rho_at(it, ix);
      res.mass = std::max(res.mass, std::abs(r1));
      res.momentum = std::max(res.momentum, std::abs(r2));
    }
  }
  return res;
}

}  // namespace gasline
