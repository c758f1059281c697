#include "qct/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qct/criteria.hpp"
#include "qct/error.hpp"

namespace qct {

namespace {

struct Value {
  bool is_string = false;
  bool is_list = false;
  std::string scalar;
  std::vector<Value> items;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

Value parse_scalar(const std::string& text, std::size_t line) {
  Value v;
  if (text.empty()) fail(line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') fail(line, "unterminated string");
    v.is_string = true;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) ++i;
      v.scalar += text[i];
    }
  } else {
    v.scalar = text;
  }
  return v;
}

Value parse_value(const std::string& text, std::size_t line) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') fail(line, "unterminated list");
    Value v;
    v.is_list = true;
    std::string item;
    bool quoted = false;
    const std::string body = text.substr(1, text.size() - 2);
    for (char c : body) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        if (!trim(item).empty()) v.items.push_back(parse_scalar(trim(item), line));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!trim(item).empty()) v.items.push_back(parse_scalar(trim(item), line));
    return v;
  }
  return parse_scalar(text, line);
}

double as_double(const Value& v, const std::string& key) {
  if (v.is_string || v.is_list) throw ConfigError(key + ": expected a number");
  double out = 0.0;
  const auto* end = v.scalar.data() + v.scalar.size();
  const auto [ptr, ec] = std::from_chars(v.scalar.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(key + ": cannot parse number '" + v.scalar + "'");
  return out;
}

std::uint64_t as_uint(const Value& v, const std::string& key) {
  if (v.is_string || v.is_list) throw ConfigError(key + ": expected an integer");
  std::uint64_t out = 0;
  const auto* end = v.scalar.data() + v.scalar.size();
  const auto [ptr, ec] = std::from_chars(v.scalar.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": cannot parse non-negative integer '" + v.scalar + "'");
  return out;
}

std::string as_string(const Value& v, const std::string& key) {
  if (!v.is_string) throw ConfigError(key + ": expected a quoted string");
  return v.scalar;
}

std::vector<double> as_doubles(const Value& v, const std::string& key) {
  if (!v.is_list) throw ConfigError(key + ": expected a list");
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_double(item, key));
  return out;
}

std::vector<std::string> as_strings(const Value& v, const std::string& key) {
  if (!v.is_list) throw ConfigError(key + ": expected a list");
  std::vector<std::string> out;
  for (const auto& item : v.items) out.push_back(as_string(item, key));
  return out;
}

using Setter = std::function<void(RunConfig&, const Value&, const std::string&)>;

template <class T>
Setter number(T RunConfig::*section, double T::*field) {
  return [=](RunConfig& c, const Value& v, const std::string& k) { (c.*section).*field = as_double(v, k); };
}
template <class T>
Setter count(T RunConfig::*section, std::size_t T::*field) {
  return [=](RunConfig& c, const Value& v, const std::string& k) {
    (c.*section).*field = static_cast<std::size_t>(as_uint(v, k));
  };
}
Setter model_number(double HamiltonianSpec::*field) {
  return [=](RunConfig& c, const Value& v, const std::string& k) { c.model.*field = as_double(v, k); };
}

const std::map<std::string, Setter>& setters() {
  using C = RunConfig;
  static const std::map<std::string, Setter> table{
      {"model.mass", model_number(&HamiltonianSpec::mass)},
      {"model.alpha", model_number(&HamiltonianSpec::alpha)},
      {"model.beta", model_number(&HamiltonianSpec::beta)},
      {"model.drive_amp", model_number(&HamiltonianSpec::drive_amp)},
      {"model.drive_freq", model_number(&HamiltonianSpec::drive_freq)},
      {"model.drive_coupling",
       [](C& c, const Value& v, const std::string& k) {
         try {
           c.model.drive_coupling = drive_coupling_from_string(as_string(v, k));
         } catch (const ConfigError&) {
           throw;
         } catch (const std::exception& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"quantum.hbar", number(&C::quantum, &C::Quantum::hbar)},
      {"quantum.n_points", count(&C::quantum, &C::Quantum::n_points)},
      {"quantum.x_min", number(&C::quantum, &C::Quantum::x_min)},
      {"quantum.x_max", number(&C::quantum, &C::Quantum::x_max)},
      {"quantum.dt", number(&C::quantum, &C::Quantum::dt)},
      {"quantum.n_p", count(&C::quantum, &C::Quantum::n_p)},
      {"measurement.k", [](C& c, const Value& v, const std::string& k) { c.measurement.k = as_double(v, k); }},
      {"measurement.D", [](C& c, const Value& v, const std::string& k) { c.measurement.D = as_double(v, k); }},
      {"initial.x0", number(&C::initial, &C::Initial::x0)},
      {"initial.p0", number(&C::initial, &C::Initial::p0)},
      {"classical.n_samples", count(&C::classical, &C::Classical::n_samples)},
      {"classical.dt", number(&C::classical, &C::Classical::dt)},
      {"run.t_final", number(&C::run, &C::Run::t_final)},
      {"run.seed", [](C& c, const Value& v, const std::string& k) { c.run.seed = as_uint(v, k); }},
      {"run.n_traj", count(&C::run, &C::Run::n_traj)},
      {"run.record_every", count(&C::run, &C::Run::record_every)},
      {"run.wigner_times", [](C& c, const Value& v, const std::string& k) { c.run.wigner_times = as_doubles(v, k); }},
      {"lyapunov.t_span", number(&C::lyapunov, &C::Lyapunov::t_span)},
      {"lyapunov.n_orbits", count(&C::lyapunov, &C::Lyapunov::n_orbits)},
      {"lyapunov.dt", number(&C::lyapunov, &C::Lyapunov::dt)},
      {"criteria.margin_factor", number(&C::criteria, &C::Criteria::margin_factor)},
      {"criteria.xi_mode", [](C& c, const Value& v, const std::string& k) { c.criteria.xi_mode = as_string(v, k); }},
      {"criteria.xi", number(&C::criteria, &C::Criteria::xi)},
      {"criteria.a_x_min", number(&C::criteria, &C::Criteria::a_x_min)},
      {"criteria.a_x_max", number(&C::criteria, &C::Criteria::a_x_max)},
      {"criteria.a_p_min", number(&C::criteria, &C::Criteria::a_p_min)},
      {"criteria.a_p_max", number(&C::criteria, &C::Criteria::a_p_max)},
      {"criteria.averaging_span", number(&C::criteria, &C::Criteria::averaging_span)},
      {"compare.noise_window", number(&C::compare, &C::Compare::noise_window)},
      {"compare.coarse_cells", count(&C::compare, &C::Compare::coarse_cells)},
      {"weak.t_final", number(&C::weak, &C::Weak::t_final)},
      {"weak.dt", number(&C::weak, &C::Weak::dt)},
      {"weak.n_snapshots", count(&C::weak, &C::Weak::n_snapshots)},
      {"output.directory",
       [](C& c, const Value& v, const std::string& k) { c.output.directory = as_string(v, k); }},
      {"output.formats", [](C& c, const Value& v, const std::string& k) { c.output.formats = as_strings(v, k); }},
  };
  return table;
}

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Keep numbers recognizably floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

MeasurementSpec RunConfig::measurement_spec() const {
  if (measurement.D) return MeasurementSpec::from_diffusion(*measurement.D, quantum.hbar);
  MeasurementSpec m;
  m.hbar = quantum.hbar;
  m.k = measurement.k.value_or(1.0);
  return m;
}

PositionGrid RunConfig::grid() const { return PositionGrid(quantum.n_points, quantum.x_min, quantum.x_max); }

double RunConfig::accessible_area() const {
  return rectangle_area(criteria.a_x_min, criteria.a_x_max, criteria.a_p_min, criteria.a_p_max);
}

double RunConfig::xi() const { return criteria.xi_mode == "unity" ? 1.0 : criteria.xi; }

bool RunConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

void RunConfig::validate() const {
  model.validate();
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(quantum.hbar, "quantum.hbar");
  positive(quantum.dt, "quantum.dt");
  positive(classical.dt, "classical.dt");
  positive(run.t_final, "run.t_final");
  positive(lyapunov.t_span, "lyapunov.t_span");
  positive(lyapunov.dt, "lyapunov.dt");
  positive(criteria.margin_factor, "criteria.margin_factor");
  positive(criteria.averaging_span, "criteria.averaging_span");
  positive(compare.noise_window, "compare.noise_window");
  positive(weak.dt, "weak.dt");
  if (weak.t_final < 0.0) throw ConfigError("weak.t_final must be >= 0");
  if (measurement.k && measurement.D) throw ConfigError("give exactly one of measurement.k and measurement.D");
  if (measurement.k && *measurement.k < 0.0) throw ConfigError("measurement.k must be >= 0");
  if (measurement.D && *measurement.D < 0.0) throw ConfigError("measurement.D must be >= 0");
  if (quantum.n_p != 0 && (quantum.n_p < 2 || (quantum.n_p & (quantum.n_p - 1)) != 0))
    throw ConfigError("quantum.n_p must be 0 or a power of two");
  if (classical.n_samples == 0 || run.n_traj == 0 || run.record_every == 0 || lyapunov.n_orbits == 0 ||
      weak.n_snapshots < 2)
    throw ConfigError("sample counts must be positive (weak.n_snapshots >= 2)");
  if (criteria.xi_mode != "unity" && criteria.xi_mode != "fixed")
    throw ConfigError("criteria.xi_mode must be \"unity\" or \"fixed\"");
  const double A = accessible_area();
  positive(A, "accessible area");
  if (criteria.xi_mode == "fixed" && (criteria.xi < 1.0 || criteria.xi > A / quantum.hbar))
    throw ConfigError("criteria.xi must lie in [1, A/hbar]");
  for (const auto& f : output.formats)
    if (f != "csv" && f != "qctw" && f != "json") throw ConfigError("unknown output format '" + f + "'");
  for (double t : run.wigner_times)
    if (t < 0.0 || t > run.t_final) throw ConfigError("run.wigner_times must lie in [0, run.t_final]");
  (void)grid();
  if (!(quantum.x_max > quantum.x_min)) throw ConfigError("quantum.x_max must exceed quantum.x_min");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (seen.count(key)) fail(line_no, "duplicate key " + key);
    seen[key] = line_no;
    const auto it = setters().find(key);
    if (it == setters().end()) fail(line_no, "unknown key " + key);
    it->second(cfg, parse_value(trim(std::string_view(line).substr(eq + 1)), line_no), key);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream o;
  auto list = [](const auto& v, auto fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
  };
  o << "[model]\n"
    << "mass = " << num(c.model.mass) << "\nalpha = " << num(c.model.alpha) << "\nbeta = " << num(c.model.beta)
    << "\ndrive_amp = " << num(c.model.drive_amp) << "\ndrive_freq = " << num(c.model.drive_freq)
    << "\ndrive_coupling = " << quoted(std::string(to_string(c.model.drive_coupling))) << "\n\n";
  o << "[quantum]\nhbar = " << num(c.quantum.hbar) << "\nn_points = " << c.quantum.n_points
    << "\nx_min = " << num(c.quantum.x_min) << "\nx_max = " << num(c.quantum.x_max) << "\ndt = " << num(c.quantum.dt)
    << "\nn_p = " << c.quantum.n_p << "\n\n";
  o << "[measurement]\n";
  if (c.measurement.D)
    o << "D = " << num(*c.measurement.D) << "\n\n";
  else
    o << "k = " << num(c.measurement.k.value_or(1.0)) << "\n\n";
  o << "[initial]\nx0 = " << num(c.initial.x0) << "\np0 = " << num(c.initial.p0) << "\n\n";
  o << "[classical]\nn_samples = " << c.classical.n_samples << "\ndt = " << num(c.classical.dt) << "\n\n";
  o << "[run]\nt_final = " << num(c.run.t_final) << "\nseed = " << c.run.seed << "\nn_traj = " << c.run.n_traj
    << "\nrecord_every = " << c.run.record_every << "\nwigner_times = " << list(c.run.wigner_times, num) << "\n\n";
  o << "[lyapunov]\nt_span = " << num(c.lyapunov.t_span) << "\nn_orbits = " << c.lyapunov.n_orbits
    << "\ndt = " << num(c.lyapunov.dt) << "\n\n";
  o << "[criteria]\nmargin_factor = " << num(c.criteria.margin_factor) << "\nxi_mode = " << quoted(c.criteria.xi_mode)
    << "\nxi = " << num(c.criteria.xi) << "\na_x_min = " << num(c.criteria.a_x_min)
    << "\na_x_max = " << num(c.criteria.a_x_max) << "\na_p_min = " << num(c.criteria.a_p_min)
    << "\na_p_max = " << num(c.criteria.a_p_max) << "\naveraging_span = " << num(c.criteria.averaging_span) << "\n\n";
  o << "[compare]\nnoise_window = " << num(c.compare.noise_window) << "\ncoarse_cells = " << c.compare.coarse_cells
    << "\n\n";
  o << "[weak]\nt_final = " << num(c.weak.t_final) << "\ndt = " << num(c.weak.dt)
    << "\nn_snapshots = " << c.weak.n_snapshots << "\n\n";
  o << "[output]\ndirectory = " << quoted(c.output.directory)
    << "\nformats = " << list(c.output.formats, quoted) << "\n";
  return o.str();
}

}  // namespace qct
