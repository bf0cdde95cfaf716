#pragma once

// Exponential decay rate of a Lyapunov trace by least squares on ln E.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gasline/errors.hpp"
#include "gasline/lyapunov.hpp"

namespace gasline {

/// Below this E is treated as numerically zero.
inline constexpr double kDegenerateEnergy = 1e-28;

struct DecayFit {
  double mu_fit = 0.0;  ///< minus the fitted slope of ln E
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t n_points = 0;
  bool degenerate = false;  ///< fewer than two usable samples, or E vanished
};

/// Fits ln E(t) = c - mu t over the samples with t in [t_lo, t_hi].
inline DecayFit fit_decay(std::span<const double> t, std::span<const double> E, double t_lo,
                          double t_hi) {
  if (t.size() != E.size()) throw InputError("fit_decay: t and E differ in length");
  if (!(t_lo < t_hi)) throw InputError("fit_decay: empty window");
  DecayFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  std::vector<double> xs;
  std::vector<double> ys;
  const double slack = 1e-9 * (std::abs(t_hi) + 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo - slack || t[i] > t_hi + slack) continue;
    if (!(E[i] > kDegenerateEnergy)) {
      fit.degenerate = true;
      continue;
    }
    xs.push_back(t[i]);
    ys.push_back(std::log(E[i]));
  }
  fit.n_points = xs.size();
  if (fit.degenerate || xs.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  const double slope = sxy / sxx;
  fit.mu_fit = -slope;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/// Fit over [lo_fraction * t_end, t_end] of a trace.
inline DecayFit fit_decay(const std::vector<LyapunovSample>& trace, double t_end,
                          double lo_fraction = 0.1) {
  std::vector<double> t;
  std::vector<double> E;
  t.reserve(trace.size());
  E.reserve(trace.size());
  for (const auto& s : trace) {
    t.push_back(s.t);
    E.push_back(s.E);
  }
  return fit_decay(t, E, lo_fraction * t_end, t_end);
}

}  // namespace gasline
