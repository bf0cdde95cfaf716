#pragma once

// Closed-loop integration of the deviation equation
//   u_tt + 2(ubar+u) u_tx - (a^2 - (ubar+u)^2) u_xx = F
// with u_x(t,0) = k u_t(t,0), u(t,L) = 0, as the first-order system
//   u_t = v, w_t = v_x, v_t = -2(ubar+u) v_x + (a^2-(ubar+u)^2) w_x + F
// advanced by the two-step Richtmyer Lax-Wendroff scheme.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gasline/certifier.hpp"
#include "gasline/errors.hpp"
#include "gasline/lyapunov.hpp"
#include "gasline/model_core.hpp"
#include "gasline/stationary.hpp"

namespace gasline {

struct SolverConfig {
  std::size_t n_cells = 256;
  double cfl = 0.8;
  double t_end = 20.0;
  double sample_dt = 0.05;
  double boundary_tol = 1e-12;
  std::string scheme = "richtmyer";

  void validate() const {
    auto bad = [](const std::string& m) { throw InputError("solver." + m); };
    if (n_cells < 16) bad("n_cells must be >= 16");
    if (!(cfl > 0.0 && cfl < 1.0)) bad("cfl must lie in (0, 1)");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("t_end must be > 0");
    if (!(sample_dt > 0.0) || sample_dt > t_end) bad("sample_dt must lie in (0, t_end]");
    if (!(boundary_tol > 0.0)) bad("boundary_tol must be > 0");
    if (scheme != "richtmyer") bad("scheme must be \"richtmyer\"");
  }
};

/// Initial deviation u(0,.) = phi and u_t(0,.) = psi with the derivatives
/// needed by the compatibility relations.
struct InitialData {
  std::function<double(double)> phi;
  std::function<double(double)> phi_x;
  std::function<double(double)> phi_xx;
  std::function<double(double)> psi;
  std::function<double(double)> psi_x;
  bool compat_checked = false;

  static InitialData zero() {
    auto z = [](double) { return 0.0; };
    return {z, z, z, z, z, false};
  }

  /// amplitude * b((x - center) / (width/2)) with b(s) = exp(1 - 1/(1 - s^2))
  /// on |s| < 1; at rest initially.
  static InitialData bump(double center, double width, double amplitude) {
    if (!(width > 0.0)) throw InputError("init.width must be > 0");
    const double r = 0.5 * width;
    // derivatives of b with respect to s
    auto b = [](double s, int order) {
      if (!(std::abs(s) < 1.0)) return 0.0;
      const double q = 1.0 - s * s;
      const double v = std::exp(1.0 - 1.0 / q);
      if (order == 0) return v;
      const double g1 = -2.0 * s / (q * q);  // d/ds of (1 - 1/q)
      if (order == 1) return v * g1;
      const double g2 = -2.0 * (1.0 + 3.0 * s * s) / (q * q * q);
      return v * (g1 * g1 + g2);
    };
    InitialData d;
    d.phi = [=](double x) { return amplitude * b((x - center) / r, 0); };
    d.phi_x = [=](double x) { return amplitude * b((x - center) / r, 1) / r; };
    d.phi_xx = [=](double x) { return amplitude * b((x - center) / r, 2) / (r * r); };
    d.psi = [](double) { return 0.0; };
    d.psi_x = [](double) { return 0.0; };
    return d;
  }
};

/// Residuals of the zeroth, first and second order compatibility relations.
struct CompatibilityReport {
  double dirichlet_u = 0.0;   ///< phi(L)
  double dirichlet_ut = 0.0;  ///< psi(L)
  double dirichlet_utt = 0.0; ///< u_tt(0, L) from the equation
  double neumann = 0.0;       ///< phi'(0) - k psi(0)
  double neumann_t = 0.0;     ///< psi'(0) - k u_tt(0, 0)

  double max() const {
    return std::max({std::abs(dirichlet_u), std::abs(dirichlet_ut), std::abs(dirichlet_utt),
                     std::abs(neumann), std::abs(neumann_t)});
  }
};

template <BackgroundProvider P>
CompatibilityReport compatibility_residuals(const InitialData& d, const PipeConfig& cfg,
                                            const P& profile) {
  const double a2 = cfg.a * cfg.a;
  auto utt = [&](double x) {
    const BackgroundState bg = profile.at(x);
    const double z = bg.u + d.phi(x);
    return -2.0 * z * d.psi_x(x) + (a2 - z * z) * d.phi_xx(x) +
           source_F(bg, d.phi(x), d.phi_x(x), d.psi(x), cfg);
  };
  CompatibilityReport r;
  r.dirichlet_u = d.phi(cfg.L);
  r.dirichlet_ut = d.psi(cfg.L);
  r.dirichlet_utt = utt(cfg.L);
  r.neumann = d.phi_x(0.0) - cfg.k * d.psi(0.0);
  r.neumann_t = d.psi_x(0.0) - cfg.k * utt(0.0);
  return r;
}

/// Grid state of the first-order system.
struct SolverState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;  ///< u_t
  std::vector<double> w;  ///< u_x
};

/// Pointwise time derivatives of (u, v, w).
struct StateRate {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> w;
};

namespace detail {

/// Second-order first derivative: central inside, one-sided at both ends.
inline std::vector<double> derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

}  // namespace detail

/// Extra source added to the v equation, e.g. for manufactured solutions.
using Forcing = std::function<double(double t, double x)>;

class ClosedLoopSolver {
 public:
  ClosedLoopSolver(const PipeConfig& cfg, const StationaryProfile& profile,
                   const SolverConfig& scfg, Forcing forcing = {})
      : cfg_(cfg), scfg_(scfg), forcing_(std::move(forcing)) {
    cfg_.validate();
    scfg_.validate();
    const std::size_t n = scfg_.n_cells;
    h_ = cfg_.L / static_cast<double>(n);
    xs_.resize(n + 1);
    bg_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      xs_[i] = i == n ? cfg_.L : h_ * static_cast<double>(i);
      bg_[i] = profile.at(xs_[i]);
    }
    xm_.resize(n);
    bgm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      xm_[i] = h_ * (static_cast<double>(i) + 0.5);
      bgm_[i] = profile.at(xm_[i]);
    }
    state_.u.assign(n + 1, 0.0);
    state_.v.assign(n + 1, 0.0);
    state_.w.assign(n + 1, 0.0);
  }

  const std::vector<double>& grid() const { return xs_; }
  double h() const { return h_; }
  const SolverState& state() const { return state_; }
  const PipeConfig& config() const { return cfg_; }
  const SolverConfig& solver_config() const { return scfg_; }

  void set_state(SolverState s) {
    const std::size_t n = xs_.size();
    if (s.u.size() != n || s.v.size() != n || s.w.size() != n)
      throw InputError("set_state: array length mismatch");
    state_ = std::move(s);
  }

  /// Samples phi, psi, phi' at the nodes.
  void initialize(const InitialData& d, double t0 = 0.0) {
    state_.t = t0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      state_.u[i] = d.phi(xs_[i]);
      state_.v[i] = d.psi(xs_[i]);
      state_.w[i] = d.phi_x(xs_[i]);
    }
  }

  double max_speed() const {
    double m = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i)
      m = std::max(m, cfg_.a + std::abs(bg_[i].u + state_.u[i]));
    return m;
  }

  double stable_dt() const { return scfg_.cfl * h_ / max_speed(); }

  /// First-order reduction: (u_t, v_t, w_t) from the current state with
  /// second-order spatial differences.
  StateRate reduce_first_order(const SolverState& s) const {
    const std::size_t n = xs_.size();
    const std::vector<double> vx = detail::derivative(s.v, h_);
    const std::vector<double> wx = detail::derivative(s.w, h_);
    StateRate r{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const double z = bg_[i].u + s.u[i];
      detail::require_subsonic(z, cfg_.a, "reduce_first_order");
      r.u[i] = s.v[i];
      r.w[i] = vx[i];
      r.v[i] = -2.0 * z * vx[i] + (cfg_.a * cfg_.a - z * z) * wx[i] +
               source_F(bg_[i], s.u[i], s.w[i], s.v[i], cfg_) + force(s.t, xs_[i]);
    }
    return r;
  }

  /// One Richtmyer step of length dt followed by the boundary closure.
  void step(double dt) {
    const double limit = stable_dt() / scfg_.cfl;
    if (!(dt > 0.0) || dt > scfg_.cfl * limit * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds cfl * dx / max speed = " << scfg_.cfl * limit;
      throw MonitorViolation("cfl", state_.t, 0.0, os.str());
    }
    const std::size_t n = xs_.size() - 1;
    const double a2 = cfg_.a * cfg_.a;
    std::vector<double>& u = state_.u;
    std::vector<double>& v = state_.v;
    std::vector<double>& w = state_.w;
    const double t = state_.t;

    // predictor on cell midpoints
    std::vector<double> um(n), vm(n), wm(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ua = 0.5 * (u[i] + u[i + 1]);
      const double va = 0.5 * (v[i] + v[i + 1]);
      const double wa = 0.5 * (w[i] + w[i + 1]);
      const double vx = (v[i + 1] - v[i]) / h_;
      const double wx = (w[i + 1] - w[i]) / h_;
      const double z = bgm_[i].u + ua;
      check_speed(z, t, xm_[i]);
      const double s = source_F(bgm_[i], ua, wa, va, cfg_) + force(t, xm_[i]);
      um[i] = ua + 0.5 * dt * va;
      wm[i] = wa + 0.5 * dt * vx;
      vm[i] = va + 0.5 * dt * (-2.0 * z * vx + (a2 - z * z) * wx + s);
    }

    // corrector on interior nodes
    const double th = t + 0.5 * dt;
    for (std::size_t i = 1; i < n; ++i) {
      const double ua = 0.5 * (um[i - 1] + um[i]);
      const double va = 0.5 * (vm[i - 1] + vm[i]);
      const double wa = 0.5 * (wm[i - 1] + wm[i]);
      const double vx = (vm[i] - vm[i - 1]) / h_;
      const double wx = (wm[i] - wm[i - 1]) / h_;
      const double z = bg_[i].u + ua;
      check_speed(z, th, xs_[i]);
      const double s = source_F(bg_[i], ua, wa, va, cfg_) + force(th, xs_[i]);
      u[i] += dt * va;
      w[i] += dt * vx;
      v[i] += dt * (-2.0 * z * vx + (a2 - z * z) * wx + s);
    }
    u[0] += dt * (1.5 * vm[0] - 0.5 * vm[1]);
    state_.t = t + dt;
    apply_boundaries();

    for (std::size_t i = 0; i <= n; ++i) {
      if (!std::isfinite(u[i]) || !std::isfinite(v[i]) || !std::isfinite(w[i]))
        throw MonitorViolation("nan", state_.t, xs_[i], "non-finite state value");
    }
  }

  /// x = L: u = v = 0, w from the outgoing characteristic -(a-ubar)w + v.
  /// x = 0: outgoing characteristic (a+ubar+u)w + v extrapolated, closed with w = k v.
  void apply_boundaries() {
    const std::size_t n = xs_.size() - 1;
    std::vector<double>& u = state_.u;
    std::vector<double>& v = state_.v;
    std::vector<double>& w = state_.w;
    auto extrapolate = [](double f1, double f2, double f3) { return 3.0 * f1 - 3.0 * f2 + f3; };

    const double cL = cfg_.a - bg_[n].u;
    auto wplus = [&](std::size_t i) { return -cL * w[i] + v[i]; };
    const double wp = extrapolate(wplus(n - 1), wplus(n - 2), wplus(n - 3));
    u[n] = 0.0;
    v[n] = 0.0;
    w[n] = -wp / cL;

    const double z0 = bg_[0].u + u[0];
    check_speed(z0, state_.t, 0.0);
    const double c0 = cfg_.a + z0;
    auto wminus = [&](std::size_t i) { return c0 * w[i] + v[i]; };
    const double wm = extrapolate(wminus(1), wminus(2), wminus(3));
    v[0] = wm / (1.0 + cfg_.k * c0);
    w[0] = cfg_.k * v[0];
  }

  /// Fields and derivatives for the Lyapunov evaluation.
  FieldSnapshot derive_snapshot() const {
    FieldSnapshot s;
    s.t = state_.t;
    s.xs = xs_;
    s.u = state_.u;
    s.u_t = state_.v;
    s.u_x = state_.w;
    s.u_xx = detail::derivative(state_.w, h_);
    s.u_tx = detail::derivative(state_.v, h_);
    return s;
  }

  double max_abs_state() const {
    double m = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i)
      m = std::max({m, std::abs(state_.u[i]), std::abs(state_.v[i]), std::abs(state_.w[i])});
    return m;
  }

 private:
  double force(double t, double x) const { return forcing_ ? forcing_(t, x) : 0.0; }

  void check_speed(double z, double t, double x) const {
    if (!(std::abs(z) < 0.98 * cfg_.a)) {
      std::ostringstream os;
      os << "total velocity " << z << " reached 0.98 a";
      throw MonitorViolation("subsonic", t, x, os.str());
    }
  }

  PipeConfig cfg_;
  SolverConfig scfg_;
  Forcing forcing_;
  double h_ = 0.0;
  std::vector<double> xs_;
  std::vector<BackgroundState> bg_;
  std::vector<double> xm_;
  std::vector<BackgroundState> bgm_;
  SolverState state_;
};

/// What a run is checked against.
struct RunContract {
  double mu = 0.0;             ///< certified decay rate for the envelope
  double t_li_bound = std::numeric_limits<double>::infinity();
  double envelope_tol = 0.05;  ///< E(t) <= E(0) exp(-mu t) (1 + tol)
  bool abort_on_violation = true;
  std::size_t field_dump_every = 0;  ///< keep every m-th snapshot, 0 = none
};

struct MonitorRecord {
  std::string invariant;
  double t;
  double x;
  std::string detail;
};

struct RunResult {
  std::vector<LyapunovSample> trace;
  FieldSnapshot final_snapshot;
  std::vector<FieldSnapshot> field_dumps;
  std::vector<MonitorRecord> violations;
  double max_boundary_residual = 0.0;
  std::size_t steps = 0;
};

/// Integrates to t_end, sampling the Lyapunov functional every sample_dt.
/// Subsonicity and finiteness always abort; the remaining monitors abort
/// unless contract.abort_on_violation is false, in which case they are recorded.
inline RunResult run(const PipeConfig& cfg, const StationaryProfile& profile,
                     const SolverConfig& scfg, const InitialData& init,
                     const RunContract& contract = {}, Forcing forcing = {}) {
  ClosedLoopSolver solver(cfg, profile, scfg, std::move(forcing));
  solver.initialize(init);
  const LyapunovEvaluator ev(cfg, profile, solver.grid());
  RunResult res;

  auto flag = [&](const std::string& inv, double t, double x, const std::string& what) {
    if (contract.abort_on_violation) throw MonitorViolation(inv, t, x, what);
    res.violations.push_back({inv, t, x, what});
  };
  double E0 = 0.0;
  auto record = [&](std::size_t index) {
    FieldSnapshot snap = solver.derive_snapshot();
    res.max_boundary_residual = std::max(
        {res.max_boundary_residual, snap.dirichlet_residual(), snap.neumann_residual(cfg.k)});
    if (snap.dirichlet_residual() > scfg.boundary_tol || snap.neumann_residual(cfg.k) > scfg.boundary_tol)
      flag("boundary", snap.t, 0.0, "boundary relation residual above tolerance");
    if (index == 0) E0 = ev.E1(snap) + ev.E2(snap);
    LyapunovSample s = evaluate_sample(ev, snap, E0, contract.mu);
    if (s.t_li > contract.t_li_bound) {
      std::ostringstream os;
      os << "T_Li = " << s.t_li << " above certified bound " << contract.t_li_bound;
      flag("t_li", s.t, 0.0, os.str());
    }
    const double scale = std::abs(s.terms.I3L) + std::abs(s.terms.I30) + 1e-300;
    if (s.terms.I3 > 1e-12 * scale) flag("i3_sign", s.t, 0.0, "I3 > 0");
    if (s.terms.I30 < -1e-12 * scale) flag("i30_sign", s.t, 0.0, "I3^0 < 0");
    if (s.E > s.envelope * (1.0 + contract.envelope_tol) && s.E > 0.0) {
      std::ostringstream os;
      os << "E = " << s.E << " above envelope " << s.envelope;
      flag("envelope", s.t, 0.0, os.str());
    }
    res.trace.push_back(s);
    if (contract.field_dump_every > 0 && index % contract.field_dump_every == 0)
      res.field_dumps.push_back(snap);
    return snap;
  };

  const auto n_samples = static_cast<std::size_t>(std::llround(scfg.t_end / scfg.sample_dt));
  record(0);
  for (std::size_t j = 1; j <= n_samples; ++j) {
    const double t_target = scfg.sample_dt * static_cast<double>(j);
    const double remaining = t_target - solver.state().t;
    const double dt_max = scfg.cfl * solver.h() / (solver.max_speed() * 1.02);
    const auto m = static_cast<std::size_t>(std::ceil(remaining / dt_max - 1e-12));
    const double dt = remaining / static_cast<double>(std::max<std::size_t>(m, 1));
    for (std::size_t s = 0; s < std::max<std::size_t>(m, 1); ++s) {
      solver.step(dt);
      ++res.steps;
    }
    FieldSnapshot snap = record(j);
    if (j == n_samples) res.final_snapshot = std::move(snap);
  }
  if (n_samples == 0) res.final_snapshot = solver.derive_snapshot();
  return res;
}

}  // namespace gasline
