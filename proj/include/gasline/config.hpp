#pragma once

// Run configuration and its TOML-style key/value reader.
//
//   u_bar_0 = 1e-5
//   [pipe]
//   k = 16
//   [sweep]
//   param = "k"
//   values = [16, 32, 64]
//
// Keys may also be written dotted (pipe.k = 16). Unknown keys, duplicate
// keys and malformed values are errors carrying the line number.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "gasline/errors.hpp"
#include "gasline/model_core.hpp"
#include "gasline/solver.hpp"

namespace gasline {

struct InitConfig {
  double center = 0.5;
  double width = 0.4;
  double amplitude = 1.5e-6;
};

struct OutputConfig {
  std::string trace_path;   ///< empty = stdout
  std::string report_path;  ///< empty = stdout
  std::size_t field_dump_every = 0;
};

struct FitConfig {
  double window_start = 0.1;  ///< fraction of t_end where the fit window opens
};

struct SweepConfig {
  std::string param = "k";  ///< "k" or "amplitude"
  std::vector<double> values;
};

struct RunConfig {
  PipeConfig pipe{1.0, 1.0, 1.0, 16.0, 0.5};
  double u_bar_0 = 1e-5;
  double q_const = 1.0;
  double t_li_bound = 2e-5;
  std::size_t profile_cells = 1000;
  SolverConfig solver;
  InitConfig init;
  OutputConfig outputs;
  FitConfig fit;
  SweepConfig sweep;

  void validate() const {
    pipe.validate();
    solver.validate();
    auto bad = [](const std::string& m) { throw InputError(m); };
    if (!(u_bar_0 > 0.0 && u_bar_0 < pipe.gamma * pipe.a))
      bad("u_bar_0 must lie in (0, gamma * a)");
    if (!(q_const > 0.0) || !std::isfinite(q_const)) bad("q_const must be > 0");
    if (!(t_li_bound >= 0.0) || !std::isfinite(t_li_bound)) bad("t_li_bound must be >= 0");
    if (profile_cells < 16) bad("profile_cells must be >= 16");
    if (!(init.width > 0.0)) bad("init.width must be > 0");
    if (!std::isfinite(init.amplitude)) bad("init.amplitude must be finite");
    if (!(fit.window_start >= 0.0 && fit.window_start < 1.0))
      bad("fit.window_start must lie in [0, 1)");
    if (sweep.param != "k" && sweep.param != "amplitude")
      bad("sweep.param must be \"k\" or \"amplitude\"");
  }
};

namespace detail {

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

[[noreturn]] inline void config_error(std::size_t line, const std::string& field,
                                      const std::string& what) {
  std::ostringstream os;
  os << "config line " << line;
  if (!field.empty()) os << ", field '" << field << "'";
  os << ": " << what;
  throw InputError(os.str());
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline ConfigValue parse_value(std::string_view s, std::size_t line, const std::string& key) {
  s = trim(s);
  if (s.empty()) config_error(line, key, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') config_error(line, key, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') config_error(line, key, "unterminated array");
    std::vector<double> out;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (item.empty()) {
        if (comma == std::string_view::npos) break;  // trailing comma
        config_error(line, key, "empty array element");
      }
      const auto v = parse_number(item);
      if (!v) config_error(line, key, "array element '" + std::string(item) + "' is not a number");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  if (const auto v = parse_number(s)) return *v;
  config_error(line, key, "cannot parse value '" + std::string(s) + "'");
}

}  // namespace detail

/// Reads a RunConfig starting from the defaults; validates the result.
inline RunConfig parse_config(std::istream& in) {
  using detail::config_error;
  RunConfig cfg;
  std::size_t line_no = 0;

  auto number = [](double& dst) {
    return [&dst](const detail::ConfigValue& v, std::size_t line, const std::string& key) {
      if (!std::holds_alternative<double>(v)) config_error(line, key, "expected a number");
      dst = std::get<double>(v);
    };
  };
  auto count = [](std::size_t& dst) {
    return [&dst](const detail::ConfigValue& v, std::size_t line, const std::string& key) {
      if (!std::holds_alternative<double>(v)) config_error(line, key, "expected an integer");
      const double d = std::get<double>(v);
      if (!(d >= 0.0) || d != std::floor(d) || d > 1e15)
        config_error(line, key, "expected a non-negative integer");
      dst = static_cast<std::size_t>(d);
    };
  };
  auto text = [](std::string& dst) {
    return [&dst](const detail::ConfigValue& v, std::size_t line, const std::string& key) {
      if (!std::holds_alternative<std::string>(v)) config_error(line, key, "expected a string");
      dst = std::get<std::string>(v);
    };
  };
  using Setter = std::function<void(const detail::ConfigValue&, std::size_t, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"u_bar_0", number(cfg.u_bar_0)},
      {"q_const", number(cfg.q_const)},
      {"t_li_bound", number(cfg.t_li_bound)},
      {"profile_cells", count(cfg.profile_cells)},
      {"pipe.a", number(cfg.pipe.a)},
      {"pipe.theta", number(cfg.pipe.theta)},
      {"pipe.L", number(cfg.pipe.L)},
      {"pipe.k", number(cfg.pipe.k)},
      {"pipe.gamma", number(cfg.pipe.gamma)},
      {"solver.n_cells", count(cfg.solver.n_cells)},
      {"solver.cfl", number(cfg.solver.cfl)},
      {"solver.t_end", number(cfg.solver.t_end)},
      {"solver.sample_dt", number(cfg.solver.sample_dt)},
      {"solver.boundary_tol", number(cfg.solver.boundary_tol)},
      {"solver.scheme", text(cfg.solver.scheme)},
      {"init.center", number(cfg.init.center)},
      {"init.width", number(cfg.init.width)},
      {"init.amplitude", number(cfg.init.amplitude)},
      {"outputs.trace_path", text(cfg.outputs.trace_path)},
      {"outputs.report_path", text(cfg.outputs.report_path)},
      {"outputs.field_dump_every", count(cfg.outputs.field_dump_every)},
      {"fit.window_start", number(cfg.fit.window_start)},
      {"sweep.param", text(cfg.sweep.param)},
      {"sweep.values",
       [&](const detail::ConfigValue& v, std::size_t line, const std::string& key) {
         if (!std::holds_alternative<std::vector<double>>(v))
           config_error(line, key, "expected an array of numbers");
         cfg.sweep.values = std::get<std::vector<double>>(v);
       }},
  };
  const std::vector<std::string> sections = {"pipe", "solver", "init", "outputs", "fit", "sweep"};

  std::string section;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') config_error(line_no, "", "malformed section header");
      section = std::string(detail::trim(s.substr(1, s.size() - 2)));
      bool known = false;
      for (const auto& name : sections) known = known || name == section;
      if (!known) config_error(line_no, section, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "", "expected key = value");
    const std::string key(detail::trim(s.substr(0, eq)));
    if (key.empty()) config_error(line_no, "", "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters.find(full);
    if (it == setters.end()) config_error(line_no, full, "unknown key");
    if (const auto prev = seen.find(full); prev != seen.end())
      config_error(line_no, full,
                   "duplicate key (first set on line " + std::to_string(prev->second) + ")");
    seen[full] = line_no;
    it->second(detail::parse_value(s.substr(eq + 1), line_no, full), line_no, full);
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace gasline
