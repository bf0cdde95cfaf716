#pragma once

// certify / stationary / simulate / sweep commands. Each returns the process
// exit code: 0 success, 1 input error, 2 condition failure, 3 monitor abort.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gasline/certifier.hpp"
#include "gasline/config.hpp"
#include "gasline/decay_fit.hpp"
#include "gasline/errors.hpp"
#include "gasline/lyapunov.hpp"
#include "gasline/solver.hpp"
#include "gasline/stationary.hpp"

namespace gasline {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitCondition = 2, kExitMonitor = 3 };

inline constexpr const char* kTraceHeader =
    "t,E1,E2,E,H2_sq,H1t_sq,C1,I1,I2,I3,I1t,I2t,I3t,envelope";
inline constexpr const char* kStationaryHeader = "x,u_bar,u_bar_x,u_bar_xx,rho_bar";
inline constexpr const char* kSweepHeader = "param,pass,mu,mu_fit";
inline constexpr const char* kFieldHeader = "x,u,u_t,u_x,u_xx,u_tx";

struct CliOptions {
  bool force = false;
  std::string out_dir;  ///< empty = no output directory
  unsigned long long seed = 0;
};

/// stderr logger; level from GASLINE_LOG (trace..off), warn by default.
inline void init_logging() {
  auto logger = spdlog::get("gasline");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("gasline");
    spdlog::set_default_logger(logger);
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("GASLINE_LOG"); env && *env)
    level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

/// 17 significant digits, round-trip exact.
inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_row(std::initializer_list<double> vals) {
  std::string s;
  bool first = true;
  for (double v : vals) {
    if (!first) s += ',';
    s += fmt17(v);
    first = false;
  }
  return s;
}

/// Where an output goes: the configured path (under out_dir when relative),
/// else out_dir/fallback, else empty for the given stream.
inline std::string destination(const std::string& configured, const std::string& fallback,
                               const CliOptions& opt) {
  namespace fs = std::filesystem;
  if (!configured.empty()) {
    const fs::path p(configured);
    if (p.is_relative() && !opt.out_dir.empty()) return (fs::path(opt.out_dir) / p).string();
    return p.string();
  }
  if (!opt.out_dir.empty()) return (fs::path(opt.out_dir) / fallback).string();
  return {};
}

/// Writes text to path, or to fallback when path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
  if (!f) throw InputError("write to '" + path + "' failed");
}

}  // namespace detail

inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["pipe"] = {{"a", c.pipe.a},
               {"theta", c.pipe.theta},
               {"L", c.pipe.L},
               {"k", c.pipe.k},
               {"gamma", c.pipe.gamma}};
  j["u_bar_0"] = c.u_bar_0;
  j["t_li_bound"] = c.t_li_bound;
  j["profile_cells"] = c.profile_cells;
  return j;
}

/// Stable key order; non-finite numbers serialize as null.
inline nlohmann::ordered_json report_json(const RunConfig& c, const CertificateReport& rep) {
  nlohmann::ordered_json j;
  j["pass"] = rep.pass;
  j["config"] = config_json(c);
  auto conds = nlohmann::ordered_json::array();
  for (const auto& e : rep.conditions) {
    nlohmann::ordered_json o;
    o["name"] = e.name;
    o["lhs"] = e.lhs;
    o["rhs"] = e.rhs;
    o["margin"] = e.margin;
    o["pass"] = e.pass;
    if (std::isfinite(e.worst_x))
      o["worst_x"] = e.worst_x;
    else
      o["worst_x"] = nullptr;
    conds.push_back(o);
  }
  j["conditions"] = conds;
  nlohmann::ordered_json consts = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.constants) consts[k] = v;
  j["constants"] = consts;
  j["notes"] = rep.notes;
  return j;
}

inline std::string failed_conditions(const CertificateReport& rep) {
  std::string s;
  for (const auto& e : rep.conditions)
    if (!e.pass) s += (s.empty() ? "" : ", ") + e.name;
  return s;
}

/// Profile plus certificate for one configuration.
struct Certified {
  StationaryProfile profile;
  CertificateReport report;
};

inline Certified certify(const RunConfig& c) {
  Certified r{build_profile(c.pipe, c.u_bar_0, c.profile_cells), {}};
  r.report = check_theorem_conditions(c.pipe, r.profile, c.t_li_bound);
  return r;
}

inline int cmd_certify(const RunConfig& c, const CliOptions& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    const Certified cert = certify(c);
    const std::string text = report_json(c, cert.report).dump(2) + "\n";
    detail::emit(detail::destination(c.outputs.report_path, "report.json", opt), text, out);
    if (!cert.report.pass) {
      err << "certificate failed: " << failed_conditions(cert.report) << "\n";
      return kExitCondition;
    }
    return kExitOk;
  } catch (const ProfileError& e) {
    err << e.what() << "\n";
    return kExitCondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

inline std::string stationary_csv(const StationaryProfile& p, double q_const) {
  const std::vector<double> rho = stationary_density(p, q_const);
  std::string s = std::string(kStationaryHeader) + "\n";
  for (std::size_t i = 0; i < p.xs.size(); ++i)
    s += detail::csv_row({p.xs[i], p.u_bar[i], p.u_bar_x[i], p.u_bar_xx[i], rho[i]}) + "\n";
  return s;
}

inline int cmd_stationary(const RunConfig& c, const CliOptions& opt, std::ostream& out,
                          std::ostream& err) {
  try {
    const StationaryProfile p = build_profile(c.pipe, c.u_bar_0, c.profile_cells);
    if (p.at_branch_point) err << "note: u_bar(L) sits on the Lambert branch point\n";
    detail::emit(detail::destination("", "stationary.csv", opt), stationary_csv(p, c.q_const),
                 out);
    return kExitOk;
  } catch (const ProfileError& e) {
    err << e.what() << "\n";
    err << "hint: set pipe.L <= " << fmt17(e.max_length()) << " or lower u_bar_0\n";
    return kExitCondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

inline std::string trace_csv(const std::vector<LyapunovSample>& trace) {
  std::string s = std::string(kTraceHeader) + "\n";
  for (const auto& r : trace)
    s += detail::csv_row({r.t, r.E1, r.E2, r.E, r.H2_sq, r.H1t_sq, r.C1, r.terms.I1, r.terms.I2,
                          r.terms.I3, r.terms.I1t, r.terms.I2t, r.terms.I3t, r.envelope}) +
         "\n";
  return s;
}

inline std::string field_csv(const FieldSnapshot& s) {
  std::string out = std::string(kFieldHeader) + "\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += detail::csv_row({s.xs[i], s.u[i], s.u_t[i], s.u_x[i], s.u_xx[i], s.u_tx[i]}) + "\n";
  return out;
}

/// Outcome of a certified (or forced) simulation.
struct SimulationOutcome {
  Certified cert;
  RunResult result;
  DecayFit fit;
  double mu = 0.0;
};

/// Runs the closed loop against the certified contract. Throws
/// MonitorViolation on a failed monitor and InputError on incompatible data.
inline SimulationOutcome simulate(const RunConfig& c, const Certified& cert) {
  const InitialData init = InitialData::bump(c.init.center, c.init.width, c.init.amplitude);
  const CompatibilityReport compat = compatibility_residuals(init, c.pipe, cert.profile);
  if (compat.max() > 1e-10 * (std::abs(c.init.amplitude) + 1e-300) + 1e-300)
    throw InputError("initial bump violates the boundary compatibility relations; keep its "
                     "support inside (0, L)");
  RunContract contract;
  contract.mu = cert.report.constant("mu");
  contract.t_li_bound = cert.report.constant("t_li_effective");
  contract.field_dump_every = c.outputs.field_dump_every;
  SimulationOutcome o{cert, run(c.pipe, cert.profile, c.solver, init, contract), {}, contract.mu};
  o.fit = fit_decay(o.result.trace, c.solver.t_end, c.fit.window_start);
  return o;
}

inline nlohmann::ordered_json fit_json(const SimulationOutcome& o) {
  nlohmann::ordered_json j;
  j["certificate_pass"] = o.cert.report.pass;
  j["mu"] = o.mu;
  j["mu_fit"] = o.fit.mu_fit;
  j["r_squared"] = o.fit.r_squared;
  j["window"] = {o.fit.t_lo, o.fit.t_hi};
  j["n_points"] = o.fit.n_points;
  j["degenerate"] = o.fit.degenerate;
  j["decay_verified"] = !o.fit.degenerate && o.fit.mu_fit >= o.mu;
  j["steps"] = o.result.steps;
  j["max_boundary_residual"] = o.result.max_boundary_residual;
  return j;
}

inline int cmd_simulate(const RunConfig& c, const CliOptions& opt, std::ostream& out,
                        std::ostream& err) {
  try {
    const Certified cert = certify(c);
    if (!cert.report.pass) {
      if (!opt.force) {
        err << "certificate failed: " << failed_conditions(cert.report)
            << " (use --force to simulate anyway)\n";
        return kExitCondition;
      }
      spdlog::warn("simulating an uncertified configuration ({})", failed_conditions(cert.report));
    }
    const SimulationOutcome o = simulate(c, cert);
    const std::string trace_path = detail::destination(c.outputs.trace_path, "trace.csv", opt);
    detail::emit(trace_path, trace_csv(o.result.trace), out);
    const std::string report_path =
        detail::destination(c.outputs.report_path, "simulate.json", opt);
    detail::emit(report_path, fit_json(o).dump(2) + "\n", report_path.empty() ? err : out);
    if (!o.result.field_dumps.empty()) {
      namespace fs = std::filesystem;
      fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
      if (!trace_path.empty() && opt.out_dir.empty()) dir = fs::path(trace_path).parent_path();
      if (dir.empty()) dir = ".";
      for (std::size_t i = 0; i < o.result.field_dumps.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "field_%06zu.csv", i * c.outputs.field_dump_every);
        detail::emit((dir / name).string(), field_csv(o.result.field_dumps[i]), out);
      }
    }
    spdlog::info("simulate: mu = {}, mu_fit = {}, steps = {}", o.mu, o.fit.mu_fit,
                 o.result.steps);
    return kExitOk;
  } catch (const MonitorViolation& e) {
    err << "monitor violation [" << e.invariant() << "] at t = " << fmt17(e.t())
        << ", x = " << fmt17(e.x()) << ": " << e.what() << "\n";
    return kExitMonitor;
  } catch (const ProfileError& e) {
    err << e.what() << "\n";
    return kExitCondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

struct SweepRow {
  double param = 0.0;
  bool pass = false;
  double mu = std::numeric_limits<double>::quiet_NaN();
  double mu_fit = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;  ///< certified (or forced) and simulated without a monitor abort
  std::string error;
};

inline SweepRow sweep_row(RunConfig c, double value, bool force) {
  SweepRow row;
  row.param = value;
  try {
    if (c.sweep.param == "k")
      c.pipe.k = value;
    else
      c.init.amplitude = value;
    c.validate();
    const Certified cert = certify(c);
    row.pass = cert.report.pass;
    row.mu = cert.report.constant("mu");
    if (!row.pass && !force) {
      row.error = "certificate failed: " + failed_conditions(cert.report);
      return row;
    }
    const SimulationOutcome o = simulate(c, cert);
    row.mu_fit = o.fit.mu_fit;
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Rows in input order; runs are independent and execute concurrently.
inline std::vector<SweepRow> run_sweep(const RunConfig& c, bool force) {
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(c.sweep.values.size());
  for (double v : c.sweep.values)
    jobs.push_back(std::async(std::launch::async, sweep_row, c, v, force));
  std::vector<SweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows)
    s += fmt17(r.param) + "," + (r.pass ? "true" : "false") + "," + fmt17(r.mu) + "," +
         fmt17(r.mu_fit) + "\n";
  return s;
}

inline int cmd_sweep(const RunConfig& c, const CliOptions& opt, std::ostream& out,
                     std::ostream& err) {
  try {
    const std::vector<SweepRow> rows = run_sweep(c, opt.force);
    detail::emit(detail::destination("", "sweep.csv", opt), sweep_csv(rows), out);
    bool any = false;
    for (const auto& r : rows) {
      any = any || r.ok;
      if (!r.error.empty()) err << c.sweep.param << " = " << fmt17(r.param) << ": " << r.error << "\n";
    }
    if (rows.empty()) err << "empty sweep\n";
    return any ? kExitOk : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

/// Loads the config and dispatches; config errors exit 1.
inline int run_command(const std::string& command, const std::string& config_path,
                       const CliOptions& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    else cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  spdlog::debug("{}: config '{}', seed {}", command, config_path, opt.seed);
  if (command == "certify") return cmd_certify(cfg, opt, out, err);
  if (command == "stationary") return cmd_stationary(cfg, opt, out, err);
  if (command == "simulate") return cmd_simulate(cfg, opt, out, err);
  if (command == "sweep") return cmd_sweep(cfg, opt, out, err);
  err << "error: unknown command '" << command << "'\n";
  return kExitInput;
}

}  // namespace gasline
