#include "mvp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mvp/errors.hpp"

namespace mvp {

namespace {

struct Token {
  std::string text;
  int column = 0;
  bool quoted = false;
};

struct Value {
  bool is_list = false;
  std::vector<Token> items;  // one item for scalars
  int line = 0;
  int column = 0;
};

[[noreturn]] void fail(const std::string& what, int line, int column) {
  if (line > 0) throw ConfigError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")", line, column);
  throw ConfigError(what);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Reads a value starting at pos (0-based) up to the end of `s`.
Value lex_value(const std::string& s, std::size_t pos, int line) {
  Value v;
  v.line = line;
  auto skip = [&] {
    while (pos < s.size() && is_space(s[pos])) ++pos;
  };
  auto scalar = [&](bool in_list) {
    skip();
    Token t;
    t.column = static_cast<int>(pos) + 1;
    if (pos < s.size() && s[pos] == '"') {
      const std::size_t close = s.find('"', pos + 1);
      if (close == std::string::npos) fail("unterminated string", line, t.column);
      t.text = s.substr(pos + 1, close - pos - 1);
      t.quoted = true;
      pos = close + 1;
    } else {
      const std::size_t start = pos;
      while (pos < s.size() && !(in_list && (s[pos] == ',' || s[pos] == ']'))) ++pos;
      std::size_t end = pos;
      while (end > start && is_space(s[end - 1])) --end;
      t.text = s.substr(start, end - start);
      if (t.text.empty()) fail("missing value", line, t.column);
    }
    return t;
  };
  skip();
  v.column = static_cast<int>(pos) + 1;
  if (pos < s.size() && s[pos] == '[') {
    v.is_list = true;
    ++pos;
    skip();
    if (pos < s.size() && s[pos] == ']') {
      ++pos;
    } else {
      for (;;) {
        v.items.push_back(scalar(true));
        skip();
        if (pos >= s.size()) fail("unterminated list", line, v.column);
        if (s[pos] == ']') {
          ++pos;
          break;
        }
        if (s[pos] != ',') fail("expected ',' or ']'", line, static_cast<int>(pos) + 1);
        ++pos;
      }
    }
  } else {
    v.items.push_back(scalar(false));
  }
  skip();
  if (pos < s.size()) fail("unexpected text after value", line, static_cast<int>(pos) + 1);
  return v;
}

double to_number(const Token& t, int line) {
  double x = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  if (!t.quoted) {
    const auto r = std::from_chars(b, e, x);
    if (r.ec == std::errc() && r.ptr == e) return x;
  }
  fail("expected a number, got '" + t.text + "'", line, t.column);
}

std::size_t to_integer(const Token& t, int line) {
  std::size_t x = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  if (!t.quoted) {
    const auto r = std::from_chars(b, e, x);
    if (r.ec == std::errc() && r.ptr == e) return x;
  }
  fail("expected a non-negative integer, got '" + t.text + "'", line, t.column);
}

const Token& single(const Value& v) {
  if (v.is_list) fail("expected a scalar, got a list", v.line, v.column);
  return v.items.front();
}

const std::vector<Token>& list(const Value& v, std::size_t n = 0) {
  if (!v.is_list) fail("expected a list [a, b, ...]", v.line, v.column);
  if (n > 0 && v.items.size() != n) fail("expected a list of " + std::to_string(n) + " entries", v.line, v.column);
  return v.items;
}

void parse_into(double& x, const Value& v) { x = to_number(single(v), v.line); }
void parse_into(std::size_t& x, const Value& v) { x = to_integer(single(v), v.line); }
void parse_into(bool& x, const Value& v) {
  const Token& t = single(v);
  if (!t.quoted && t.text == "true") {
    x = true;
  } else if (!t.quoted && t.text == "false") {
    x = false;
  } else {
    fail("expected true or false, got '" + t.text + "'", v.line, t.column);
  }
}
void parse_into(std::string& x, const Value& v) { x = single(v).text; }
void parse_into(std::vector<double>& x, const Value& v) {
  x.clear();
  for (const Token& t : list(v)) x.push_back(to_number(t, v.line));
}
void parse_into(std::vector<std::size_t>& x, const Value& v) {
  x.clear();
  for (const Token& t : list(v)) x.push_back(to_integer(t, v.line));
}
void parse_into(Vec3& x, const Value& v) {
  const auto& items = list(v, 3);
  for (int a = 0; a < 3; ++a) x[a] = to_number(items[a], v.line);
}
void parse_into(std::array<std::size_t, 3>& x, const Value& v) {
  const auto& items = list(v, 3);
  for (int a = 0; a < 3; ++a) x[a] = to_integer(items[a], v.line);
}

std::string show(double x) { return fmt(x); }
std::string show(std::size_t x) { return std::to_string(x); }
std::string show(bool x) { return x ? "true" : "false"; }
std::string show(const std::string& x) { return "\"" + x + "\""; }
template <class Seq>
std::string show_list(const Seq& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + show(xs[i]);
  return s + "]";
}
std::string show(const std::vector<double>& x) { return show_list(x); }
std::string show(const std::vector<std::size_t>& x) { return show_list(x); }
std::string show(const Vec3& x) { return show_list(x); }
std::string show(const std::array<std::size_t, 3>& x) { return show_list(x); }

struct Key {
  std::string section, name;
  std::function<void(ExperimentConfig&, const Value&)> set;
  std::function<std::string(ExperimentConfig&)> get;
};

template <class Access>
Key key(std::string section, std::string name, Access access) {
  return {std::move(section), std::move(name), [access](ExperimentConfig& c, const Value& v) { parse_into(access(c), v); },
          [access](ExperimentConfig& c) { return show(access(c)); }};
}

#define MVP_KEY(section, name, member) key(section, name, [](ExperimentConfig& c) -> auto& { return c.member; })

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      MVP_KEY("run", "particles", run.particles),
      MVP_KEY("run", "seed", run.seed),
      MVP_KEY("run", "dt", run.dt),
      MVP_KEY("run", "t_end", run.t_end),
      MVP_KEY("run", "deterministic", run.deterministic),
      MVP_KEY("run", "self_consistent", run.self_consistent),
      MVP_KEY("run", "field_memory_budget", run.field_memory_budget),
      MVP_KEY("mag", "omega", run.omega),
      MVP_KEY("initial", "family", run.initial.family),
      MVP_KEY("initial", "mass", run.initial.mass),
      MVP_KEY("initial", "center", run.initial.center),
      MVP_KEY("initial", "sigma_x", run.initial.sigma_x),
      MVP_KEY("initial", "temperature", run.initial.temperature),
      MVP_KEY("initial", "drift", run.initial.drift),
      MVP_KEY("initial", "bump_radius_x", run.initial.bump_radius_x),
      MVP_KEY("initial", "bump_radius_v", run.initial.bump_radius_v),
      MVP_KEY("grid", "origin", run.grid.origin),
      MVP_KEY("grid", "extent", run.grid.extent),
      MVP_KEY("grid", "cells", run.grid.cells),
      MVP_KEY("diagnostics", "ks", run.ks),
      MVP_KEY("diagnostics", "field_exponents", run.field_exponents),
      MVP_KEY("diagnostics", "diag_every", run.diag_every),
      MVP_KEY("diagnostics", "snapshot_times", run.snapshot_times),
      MVP_KEY("harness", "kinematics_samples", harness.kinematics_samples),
      MVP_KEY("harness", "kinematics_seed", harness.kinematics_seed),
      MVP_KEY("harness", "kinematics_omegas", harness.kinematics_omegas),
      MVP_KEY("harness", "jacobian_samples", harness.jacobian_samples),
      MVP_KEY("harness", "poisson_cells", harness.poisson_cells),
      MVP_KEY("harness", "weak_norm_trials", harness.weak_norm_trials),
      MVP_KEY("harness", "lineq_trials", harness.lineq_trials),
      MVP_KEY("harness", "interpolation_trials", harness.interpolation_trials),
      MVP_KEY("harness", "interpolation_seed", harness.interpolation_seed),
      MVP_KEY("harness", "small_time_d", harness.small_time_d),
      MVP_KEY("harness", "small_time_points", harness.small_time_points),
      MVP_KEY("harness", "small_time_factor", harness.small_time_factor),
      MVP_KEY("harness", "large_time_points", harness.large_time_points),
      MVP_KEY("harness", "large_time_bound", harness.large_time_bound),
      MVP_KEY("harness", "t0_samples", harness.t0_samples),
      MVP_KEY("harness", "t0_tol", harness.t0_tol),
      MVP_KEY("harness", "gronwall_ks", harness.gronwall_ks),
      MVP_KEY("harness", "gronwall_cap", harness.gronwall_cap),
      MVP_KEY("harness", "field_estimate_k", harness.field_estimate_k),
      MVP_KEY("harness", "mass_drift_tol", harness.mass_drift_tol),
      MVP_KEY("harness", "energy_drift_tol", harness.energy_drift_tol),
      MVP_KEY("harness", "stability_delta", harness.stability_delta),
      MVP_KEY("harness", "stability_windows", harness.stability_windows),
      MVP_KEY("harness", "stability_ceiling", harness.stability_ceiling),
      MVP_KEY("harness", "stability_cap", harness.stability_cap),
      MVP_KEY("harness", "decay_windows", harness.decay_windows),
      MVP_KEY("harness", "check_bounded_density", harness.check_bounded_density),
      MVP_KEY("harness", "bounded_density_factor", harness.bounded_density_factor),
      MVP_KEY("harness", "bounded_density_t_points", harness.bounded_density_t_points),
      MVP_KEY("harness", "representation_levels", harness.representation_levels),
      MVP_KEY("harness", "representation_cells", harness.representation_cells),
      MVP_KEY("harness", "representation_half_width", harness.representation_half_width),
      MVP_KEY("harness", "representation_particles", harness.representation_particles),
      MVP_KEY("harness", "representation_time", harness.representation_time),
      MVP_KEY("harness", "representation_field_charge", harness.representation_field_charge),
      MVP_KEY("harness", "representation_field_sigma", harness.representation_field_sigma),
      MVP_KEY("harness", "representation_substeps", harness.representation_substeps),
      MVP_KEY("harness", "representation_tol", harness.representation_tol),
      MVP_KEY("harness", "representation_min_decrease", harness.representation_min_decrease),
      MVP_KEY("harness", "scan_points", harness.scan_points),
      MVP_KEY("harness", "scan_refine_decades", harness.scan_refine_decades),
  };
  return table;
}

#undef MVP_KEY

const Key* find_key(const std::string& section, const std::string& name) {
  for (const Key& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

void apply_override(ExperimentConfig& c, const std::string& ov) {
  const std::size_t eq = ov.find('=');
  const std::string lhs = trim(ov.substr(0, eq));
  const std::size_t dot = lhs.find('.');
  if (eq == std::string::npos || dot == std::string::npos) {
    fail("override '" + ov + "' is not of the form section.key=value", 0, 0);
  }
  const Key* k = find_key(lhs.substr(0, dot), lhs.substr(dot + 1));
  if (!k) fail("override names unknown key '" + lhs + "'", 0, 0);
  try {
    k->set(c, lex_value(ov, eq + 1, 1));
  } catch (const ConfigError& e) {
    fail("override '" + ov + "': " + e.what(), 0, 0);
  }
}

std::size_t largest(const std::vector<std::size_t>& xs) { return *std::max_element(xs.begin(), xs.end()); }

}  // namespace

void ExperimentConfig::validate() const {
  run.validate();
  const HarnessConfig& h = harness;
  auto positive = [](std::size_t n, const char* name) {
    if (n == 0) throw ConfigError(std::string("harness.") + name + " must be >= 1");
  };
  positive(h.kinematics_samples, "kinematics_samples");
  positive(h.jacobian_samples, "jacobian_samples");
  positive(h.weak_norm_trials, "weak_norm_trials");
  positive(h.lineq_trials, "lineq_trials");
  positive(h.interpolation_trials, "interpolation_trials");
  positive(h.t0_samples, "t0_samples");
  positive(h.representation_particles, "representation_particles");
  positive(h.representation_substeps, "representation_substeps");
  if (h.small_time_points < 2 || h.large_time_points < 2 || h.bounded_density_t_points < 2 || h.scan_points < 2) {
    throw ConfigError("harness grid sizes (small_time_points, large_time_points, bounded_density_t_points, scan_points) must be >= 2");
  }
  for (double w : h.kinematics_omegas) {
    if (!(w > 0.0)) throw ConfigError("harness.kinematics_omegas entries must be positive");
  }
  if (h.poisson_cells.size() < 2) throw ConfigError("harness.poisson_cells needs at least two levels");
  for (std::size_t i = 1; i < h.poisson_cells.size(); ++i) {
    if (h.poisson_cells[i] != 2 * h.poisson_cells[i - 1]) throw ConfigError("harness.poisson_cells must double per level");
  }
  for (double d : h.small_time_d) {
    if (!(d > 1.5 && d <= 3.75)) throw ConfigError("harness.small_time_d entries must lie in (3/2, 15/4]");
  }
  if (h.gronwall_ks.empty()) throw ConfigError("harness.gronwall_ks must not be empty");
  for (double k : h.gronwall_ks) {
    if (std::find(run.ks.begin(), run.ks.end(), k) == run.ks.end()) {
      throw ConfigError("harness.gronwall_ks entry " + fmt(k) + " is not in diagnostics.ks");
    }
  }
  if (!(h.stability_delta > 0.0)) throw ConfigError("harness.stability_delta must be positive");
  if (!(h.stability_windows > 0.0) || !(h.decay_windows > 0.0)) {
    throw ConfigError("harness.stability_windows and harness.decay_windows must be positive");
  }
  if (h.representation_levels.empty() || h.representation_levels.front() == 0) {
    throw ConfigError("harness.representation_levels must be non-empty and positive");
  }
  const std::size_t nq = largest(h.representation_levels);
  for (std::size_t i = 0; i < h.representation_levels.size(); ++i) {
    if (nq % h.representation_levels[i] != 0) {
      throw ConfigError("harness.representation_levels must divide the finest level");
    }
    if (i > 0 && h.representation_levels[i] <= h.representation_levels[i - 1]) {
      throw ConfigError("harness.representation_levels must increase");
    }
  }
  if (h.representation_cells < 5) throw ConfigError("harness.representation_cells must be >= 5");
  if (!(h.representation_half_width > 0.0) || !(h.representation_time > 0.0)) {
    throw ConfigError("harness.representation_half_width and representation_time must be positive");
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  std::vector<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = strip_comment(raw);
    const std::size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (s[first] == '[') {
      const std::size_t close = s.find(']', first);
      if (close == std::string::npos) fail("unterminated section header", line, static_cast<int>(first) + 1);
      if (!trim(s.substr(close + 1)).empty()) fail("unexpected text after section header", line, static_cast<int>(close) + 2);
      section = trim(s.substr(first + 1, close - first - 1));
      const bool known = std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.section == section; });
      if (!known) fail("unknown section [" + section + "]", line, static_cast<int>(first) + 1);
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail("expected key = value", line, static_cast<int>(first) + 1);
    const std::string name = trim(s.substr(0, eq));
    if (section.empty()) fail("key '" + name + "' outside any section", line, static_cast<int>(first) + 1);
    const Key* k = find_key(section, name);
    if (!k) fail("unknown key '" + section + "." + name + "'", line, static_cast<int>(first) + 1);
    const std::string dotted = section + "." + name;
    if (std::find(seen.begin(), seen.end(), dotted) != seen.end()) {
      fail("duplicate key '" + dotted + "'", line, static_cast<int>(first) + 1);
    }
    seen.push_back(dotted);
    k->set(c, lex_value(s, eq + 1, line));
  }
  for (const std::string& ov : overrides) apply_override(c, ov);
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string format_config(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  std::ostringstream out;
  std::string section;
  for (const Key& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      section = k.section;
      out << "[" << section << "]\n";
    }
    out << k.name << " = " << k.get(c) << "\n";
  }
  const MagneticConfig mag = c.run.magnetic();
  out << "\n# derived, not read back\n";
  if (mag.magnetized()) {
    out << "# t_omega = " << fmt(*mag.t_omega()) << "\n";
    out << "# gyro_period = " << fmt(*mag.gyro_period()) << "\n";
  } else {
    out << "# t_omega = none (omega = 0, no singular times)\n";
  }
  out << "# dt_limit = " << fmt(c.run.dt_limit()) << "\n";
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : keys()) out.push_back(k.section + "." + k.name);
  return out;
}

}  // namespace mvp
