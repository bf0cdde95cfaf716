#pragma once

// H^2 Lyapunov functional E = E1 + E2 of the deviation field, the terms of
// its time derivative, and the Sobolev-type norms it controls.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gasline/certifier.hpp"
#include "gasline/errors.hpp"
#include "gasline/model_core.hpp"
#include "gasline/stationary.hpp"

namespace gasline {

/// h1 ((a^2 - (ubar+v0)^2) v1^2 + v2^2) - 2 h2 ((ubar+v0) v1^2 + v1 v2).
inline double chi(double h1, double h2, double ubar, double v0, double v1, double v2, double a) {
  const double z = ubar + v0;
  detail::require_subsonic(z, a, "chi_x");
  return h1 * ((a * a - z * z) * v1 * v1 + v2 * v2) - 2.0 * h2 * (z * v1 * v1 + v1 * v2);
}

template <BackgroundProvider P>
double chi_x(double x, double v0, double v1, double v2, const PipeConfig& cfg, const P& profile) {
  const Weights w = weights(x, cfg);
  return chi(w.h1, w.h2, profile.at(x).u, v0, v1, v2, cfg.a);
}

/// Composite trapezoid rule of f(i) over the nodes xs.
template <class F>
double trapezoid(std::span<const double> xs, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) s += 0.5 * (xs[i + 1] - xs[i]) * (f(i) + f(i + 1));
  return s;
}

struct SnapshotNorms {
  double u2 = 0.0;    ///< int u^2
  double ux2 = 0.0;   ///< int u_x^2
  double uxx2 = 0.0;  ///< int u_xx^2
  double ut2 = 0.0;   ///< int u_t^2
  double utx2 = 0.0;  ///< int u_tx^2
  double H2_sq = 0.0;
  double H1t_sq = 0.0;
  double C1 = 0.0;  ///< max(sup(|u| + |u_x|), sup |u_t|)

  /// int u_x^2 + u_t^2 + u_tx^2 + u_xx^2
  double derivative_sum() const { return ux2 + ut2 + utx2 + uxx2; }
  double full_sum() const { return u2 + derivative_sum(); }
  /// Squared H^2 x H^1 norm of (u, u_t).
  double state_sq() const { return H2_sq + H1t_sq; }
};

inline SnapshotNorms norms(const FieldSnapshot& s) {
  if (!s.consistent()) throw InputError("norms: inconsistent snapshot");
  const std::span<const double> xs(s.xs);
  SnapshotNorms n;
  n.u2 = trapezoid(xs, [&](std::size_t i) { return s.u[i] * s.u[i]; });
  n.ux2 = trapezoid(xs, [&](std::size_t i) { return s.u_x[i] * s.u_x[i]; });
  n.uxx2 = trapezoid(xs, [&](std::size_t i) { return s.u_xx[i] * s.u_xx[i]; });
  n.ut2 = trapezoid(xs, [&](std::size_t i) { return s.u_t[i] * s.u_t[i]; });
  n.utx2 = trapezoid(xs, [&](std::size_t i) { return s.u_tx[i] * s.u_tx[i]; });
  n.H2_sq = n.u2 + n.ux2 + n.uxx2;
  n.H1t_sq = n.ut2 + n.utx2;
  for (std::size_t i = 0; i < s.size(); ++i)
    n.C1 = std::max({n.C1, std::abs(s.u[i]) + std::abs(s.u_x[i]), std::abs(s.u_t[i])});
  return n;
}

/// Terms of dE1/dt = I1 + I2 + I3 and dE2/dt = I1t + I2t + I3t.
struct Decomposition {
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;   ///< boundary bracket at L minus bracket at 0
  double I3L = 0.0;  ///< -(a^2 - ubar_L^2) e^{-1} u_x(L)^2
  double I30 = 0.0;  ///< (a^2 - (ubar_0 + u(0) + 1/k)^2) u_x(0)^2
  double I1t = 0.0;
  double I2t = 0.0;
  double I3t = 0.0;
  double I3t_L = 0.0;  ///< second-order bracket at x = L
  double I3t_0 = 0.0;  ///< second-order bracket at x = 0

  double dE1() const { return I1 + I2 + I3; }
  double dE2() const { return I1t + I2t + I3t; }
  double total() const { return dE1() + dE2(); }
};

/// Evaluates the functional and its derivative terms on a fixed grid, with
/// the stationary background sampled once.
class LyapunovEvaluator {
 public:
  LyapunovEvaluator(const PipeConfig& cfg, const StationaryProfile& profile,
                    std::span<const double> xs)
      : cfg_(cfg), xs_(xs.begin(), xs.end()) {
    bg_.reserve(xs_.size());
    h2_.reserve(xs_.size());
    for (double x : xs_) {
      bg_.push_back(profile.at(x));
      h2_.push_back(weights(x, cfg).h2);
    }
    h1_ = std::abs(cfg.k);
  }

  const PipeConfig& config() const { return cfg_; }
  std::span<const double> grid() const { return xs_; }
  const BackgroundState& background(std::size_t i) const { return bg_[i]; }

  double E1(const FieldSnapshot& s) const {
    check(s);
    return trapezoid(xs_, [&](std::size_t i) {
      return chi(h1_, h2_[i], bg_[i].u, s.u[i], s.u_x[i], s.u_t[i], cfg_.a);
    });
  }

  double E2(const FieldSnapshot& s) const {
    check(s);
    return trapezoid(xs_, [&](std::size_t i) {
      return chi(h1_, h2_[i], bg_[i].u, s.u[i], s.u_xx[i], s.u_tx[i], cfg_.a);
    });
  }

  Decomposition decomposition(const FieldSnapshot& s) const {
    check(s);
    const double a2 = cfg_.a * cfg_.a;
    const double h1 = h1_;
    Decomposition d;
    auto z = [&](std::size_t i) { return bg_[i].u + s.u[i]; };
    auto slope = [&](std::size_t i) { return bg_[i].u_x + s.u_x[i]; };
    auto h2x = [&](std::size_t i) { return -h2_[i] / cfg_.L; };

    d.I1 = trapezoid(xs_, [&](std::size_t i) {
      const double zi = z(i);
      return h2x(i) * ((a2 - zi * zi) * s.u_x[i] * s.u_x[i] + s.u_t[i] * s.u_t[i]);
    });
    d.I2 = trapezoid(xs_, [&](std::size_t i) {
      const double zi = z(i);
      const double ux = s.u_x[i];
      const double ut = s.u_t[i];
      const double sx = slope(i);
      const double f = source_F(bg_[i], s.u[i], ux, ut, cfg_);
      const double h2 = h2_[i];
      return 2.0 * h1 * sx * ut * ut - 2.0 * h1 * zi * ut * ux * ux + 4.0 * h1 * zi * sx * ux * ut +
             2.0 * h1 * f * ut - 2.0 * h2 * ut * ux * ux - 2.0 * h2 * zi * sx * ux * ux -
             2.0 * h2 * f * ux;
    });
    auto bracket1 = [&](std::size_t i) {
      const double zi = z(i);
      const double ux = s.u_x[i];
      const double ut = s.u_t[i];
      return (a2 - zi * zi) * (2.0 * h1 * ux * ut - h2_[i] * ux * ux) -
             (2.0 * h1 * zi + h2_[i]) * ut * ut;
    };
    const std::size_t n = xs_.size() - 1;
    d.I3 = bracket1(n) - bracket1(0);
    const double uL = bg_[n].u;
    d.I3L = -(a2 - uL * uL) / kE * s.u_x[n] * s.u_x[n];
    const double z0 = bg_[0].u + s.u[0] + 1.0 / cfg_.k;
    d.I30 = (a2 - z0 * z0) * s.u_x[0] * s.u_x[0];

    d.I1t = trapezoid(xs_, [&](std::size_t i) {
      const double zi = z(i);
      return h2x(i) * ((a2 - zi * zi) * s.u_xx[i] * s.u_xx[i] + s.u_tx[i] * s.u_tx[i]);
    });
    d.I2t = trapezoid(xs_, [&](std::size_t i) {
      const double zi = z(i);
      const double uxx = s.u_xx[i];
      const double utx = s.u_tx[i];
      const double ut = s.u_t[i];
      const double sx = slope(i);
      const double fx = source_F_x(bg_[i], s.u[i], s.u_x[i], ut, uxx, utx, cfg_);
      const double h2 = h2_[i];
      return 4.0 * h2 * sx * uxx * utx - 2.0 * h2 * ut * uxx * uxx + 2.0 * h2 * zi * sx * uxx * uxx -
             2.0 * h2 * fx * uxx - 2.0 * h1 * zi * ut * uxx * uxx - 2.0 * h1 * sx * utx * utx +
             2.0 * h1 * fx * utx;
    });
    auto bracket2 = [&](std::size_t i) {
      const double zi = z(i);
      const double uxx = s.u_xx[i];
      const double utx = s.u_tx[i];
      return (a2 - zi * zi) * (2.0 * h1 * uxx * utx - h2_[i] * uxx * uxx) -
             (2.0 * h1 * zi + h2_[i]) * utx * utx;
    };
    d.I3t_L = bracket2(n);
    d.I3t_0 = bracket2(0);
    d.I3t = d.I3t_L - d.I3t_0;
    return d;
  }

  /// max over x of |u|, |u_x|, |u_t|, |ubar|, |ubar'|.
  double t_li(const FieldSnapshot& s) const {
    check(s);
    double m = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i)
      m = std::max({m, std::abs(s.u[i]), std::abs(s.u_x[i]), std::abs(s.u_t[i]),
                    std::abs(bg_[i].u), std::abs(bg_[i].u_x)});
    return m;
  }

 private:
  void check(const FieldSnapshot& s) const {
    if (!s.consistent() || s.size() != xs_.size())
      throw InputError("LyapunovEvaluator: snapshot does not match the evaluator grid");
  }

  PipeConfig cfg_;
  std::vector<double> xs_;
  std::vector<BackgroundState> bg_;
  std::vector<double> h2_;
  double h1_ = 0.0;
};

inline double E1(const FieldSnapshot& s, const PipeConfig& cfg, const StationaryProfile& profile) {
  return LyapunovEvaluator(cfg, profile, s.xs).E1(s);
}

inline double E2(const FieldSnapshot& s, const PipeConfig& cfg, const StationaryProfile& profile) {
  return LyapunovEvaluator(cfg, profile, s.xs).E2(s);
}

inline Decomposition dE_decomposition(const FieldSnapshot& s, const PipeConfig& cfg,
                                      const StationaryProfile& profile) {
  return LyapunovEvaluator(cfg, profile, s.xs).decomposition(s);
}

/// One row of a Lyapunov trace.
struct LyapunovSample {
  double t = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double E = 0.0;
  double H2_sq = 0.0;
  double H1t_sq = 0.0;
  double C1 = 0.0;
  Decomposition terms;
  double envelope = 0.0;  ///< E(0) exp(-mu t)
  double t_li = 0.0;
  SnapshotNorms norms;
};

/// Full sample of one snapshot; the envelope is filled in from E0 and mu.
inline LyapunovSample evaluate_sample(const LyapunovEvaluator& ev, const FieldSnapshot& s,
                                      double E0, double mu) {
  LyapunovSample r;
  r.t = s.t;
  r.E1 = ev.E1(s);
  r.E2 = ev.E2(s);
  r.E = r.E1 + r.E2;
  r.norms = norms(s);
  r.H2_sq = r.norms.H2_sq;
  r.H1t_sq = r.norms.H1t_sq;
  r.C1 = r.norms.C1;
  r.terms = ev.decomposition(s);
  r.envelope = E0 * std::exp(-mu * s.t);
  r.t_li = ev.t_li(s);
  return r;
}

}  // namespace gasline
