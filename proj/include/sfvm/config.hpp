#ifndef SFVM_CONFIG_HPP_
#define SFVM_CONFIG_HPP_

// Experiment configuration: sectioned key = value text.
//
//   # comment
//   [spacetime]
//   domain = interval        ; or circle
//   a = -1
//   b = 1
//   T = 0.5
//
// Coefficients are expressions in t, x, u (see expression.hpp). Every error
// names the file and line it comes from.

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sfvm/builtin_fluxes.hpp"
#include "sfvm/entropy.hpp"
#include "sfvm/errors.hpp"
#include "sfvm/expression.hpp"
#include "sfvm/harness.hpp"
#include "sfvm/scheme.hpp"

namespace sfvm {

class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(std::string_view text, std::string source = "<config>") {
    IniDocument doc;
    doc.source_ = std::move(source);
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = strip(cut_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') doc.fail(line, "unterminated section header");
        section = strip(s.substr(1, s.size() - 2));
        if (section.empty()) doc.fail(line, "empty section name");
        if (doc.sections_.count(section)) doc.fail(line, "duplicate section [" + section + "]");
        doc.sections_[section];
        doc.section_lines_[section] = line;
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) doc.fail(line, "expected 'key = value'");
      if (section.empty()) doc.fail(line, "key outside of any section");
      const std::string key = strip(s.substr(0, eq));
      const std::string value = strip(s.substr(eq + 1));
      if (key.empty()) doc.fail(line, "empty key");
      auto& sec = doc.sections_[section];
      if (sec.count(key)) doc.fail(line, "duplicate key '" + key + "' in [" + section + "]");
      sec[key] = {value, line};
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  const std::string& source() const { return source_; }
  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  const Entry& require(const std::string& section, const std::string& key) const {
    if (const Entry* e = find(section, key)) return *e;
    const auto l = section_lines_.find(section);
    fail(l == section_lines_.end() ? 0 : l->second, "missing key '" + key + "' in [" + section + "]");
  }

  std::string get_string(const std::string& section, const std::string& key, const std::string& def) const {
    const Entry* e = find(section, key);
    return e ? e->value : def;
  }

  double to_double(const Entry& e, const std::string& key) const {
    // plain numbers and constant expressions such as 2*pi
    try {
      const Expression ex = Expression::parse(e.value);
      if (ex.depends_on(Var::T) || ex.depends_on(Var::X) || ex.depends_on(Var::U))
        fail(e.line, key + ": expected a constant, got '" + e.value + "'");
      return ex(0.0, 0.0, 0.0);
    } catch (const ConfigError& err) {
      if (std::string(err.what()).rfind(source_, 0) == 0) throw;
      fail(e.line, key + ": " + err.what());
    }
  }

  double get_double(const std::string& section, const std::string& key, double def) const {
    const Entry* e = find(section, key);
    return e ? to_double(*e, key) : def;
  }

  std::optional<double> get_optional_double(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return to_double(*e, key);
  }

  int get_int(const std::string& section, const std::string& key, int def) const {
    const Entry* e = find(section, key);
    if (!e) return def;
    char* end = nullptr;
    const long v = std::strtol(e->value.c_str(), &end, 10);
    if (e->value.empty() || *end != '\0') fail(e->line, key + ": expected an integer, got '" + e->value + "'");
    return static_cast<int>(v);
  }

  bool get_bool(const std::string& section, const std::string& key, bool def) const {
    const Entry* e = find(section, key);
    if (!e) return def;
    const std::string& v = e->value;
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(e->line, key + ": expected true/false, got '" + v + "'");
  }

  std::vector<double> get_list(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return {};
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double({strip(item), e->line}, key));
    return out;
  }

  Expression get_expression(const std::string& section, const std::string& key, const std::string& def) const {
    const Entry* e = find(section, key);
    if (!e) return Expression::parse(def);
    try {
      return Expression::parse(e->value);
    } catch (const ConfigError& err) {
      fail(e->line, key + ": " + err.what());
    }
  }

  /// Rejects sections and keys outside the schema.
  void check_schema(const std::map<std::string, std::set<std::string>>& schema) const {
    for (const auto& [sec, keys] : sections_) {
      auto s = schema.find(sec);
      if (s == schema.end()) fail(section_lines_.at(sec), "unknown section [" + sec + "]");
      for (const auto& [key, entry] : keys)
        if (!s->second.count(key)) fail(entry.line, "unknown key '" + key + "' in [" + sec + "]");
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  static std::string cut_comment(const std::string& s) {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
  }
  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

struct OutputOptions {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct Config {
  std::string source;  // path or label
  std::string text;    // verbatim config, embedded in run artifacts

  SpatialDomain domain;
  double T = 1.0;

  std::string flux_id = "burgers";
  Interval flux_range{-1.0, 1.0};
  FluxField flux = burgers_flux({-1.0, 1.0});

  int cells = 100;
  RunConfig run;
  NumericalFluxSpec spec;
  BoundaryData boundary;
  std::string u_B_text;

  bool entropy_enabled = true;
  EntropyCheckOptions entropy;
  std::vector<std::string> convex_pairs;

  OutputOptions output;

  std::optional<std::string> geometry;  // builtin geometry for classify
  std::string experiment;               // convergence study
  std::vector<double> hs;

  SpatialPartition partition() const { return SpatialPartition::uniform(domain, cells); }
};

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"spacetime", {"domain", "a", "b", "length", "T"}},
      {"flux", {"builtin", "speed", "k", "seed", "density", "flux", "u_range"}},
      {"mesh", {"cells", "cfl_target", "dt", "u_range"}},
      {"scheme", {"flux", "rusanov_speed", "inversion_tol", "threads"}},
      {"boundary", {"u_B", "alpha_dt", "alpha_dx"}},
      {"entropy", {"enabled", "kruzkov", "lattice", "convex", "dissipation", "tol_scale"}},
      {"output", {"directory", "csv", "json"}},
      {"geometry", {"builtin"}},
      {"convergence", {"experiment", "h"}},
  };
  return schema;
}

namespace detail {

inline Interval parse_range(const IniDocument& doc, const std::string& sec, const std::string& key, Interval def) {
  const auto* e = doc.find(sec, key);
  if (!e) return def;
  const auto v = doc.get_list(sec, key);
  if (v.size() != 2 || !(v[1] > v[0])) doc.fail(e->line, key + ": expected 'lo, hi' with lo < hi");
  return {v[0], v[1]};
}

inline Coefficient expression_coefficient(const Expression& e) {
  Coefficient c;
  c.value = [e](std::span<const double> p) { return e(p[kT], p[kX], 0.0); };
  return c;
}

}  // namespace detail

inline Config parse_config(std::string_view text, std::string source = "<config>") {
  const IniDocument doc = IniDocument::parse(text, source);
  doc.check_schema(config_schema());
  Config cfg;
  cfg.source = source;
  cfg.text = std::string(text);

  const std::string domain = doc.get_string("spacetime", "domain", "interval");
  if (domain == "interval") {
    cfg.domain = SpatialDomain::interval(doc.get_double("spacetime", "a", 0.0), doc.get_double("spacetime", "b", 1.0));
    if (!(cfg.domain.b > cfg.domain.a)) doc.fail(doc.require("spacetime", "b").line, "b must exceed a");
  } else if (domain == "circle") {
    const double L = doc.get_double("spacetime", "length", 1.0);
    if (!(L > 0.0)) doc.fail(doc.require("spacetime", "length").line, "circle length must be positive");
    cfg.domain = SpatialDomain::circle(L);
  } else {
    doc.fail(doc.require("spacetime", "domain").line, "domain must be 'interval' or 'circle'");
  }
  cfg.T = doc.get_double("spacetime", "T", 1.0);
  if (!(cfg.T > 0.0)) doc.fail(doc.require("spacetime", "T").line, "T must be positive");

  cfg.flux_range = detail::parse_range(doc, "flux", "u_range", {-1.0, 1.0});
  cfg.flux_id = doc.get_string("flux", "builtin", "burgers");
  if (cfg.flux_id == "burgers") {
    cfg.flux = burgers_flux(cfg.flux_range);
  } else if (cfg.flux_id == "linear") {
    cfg.flux = linear_flux(doc.get_double("flux", "speed", 1.0), cfg.flux_range);
  } else if (cfg.flux_id == "phi_transport") {
    cfg.flux = phi_transport_flux(doc.get_double("flux", "k", 2.0 * std::numbers::pi), cfg.flux_range);
  } else if (cfg.flux_id == "random_poly") {
    cfg.flux = random_polynomial_flux(static_cast<std::uint64_t>(doc.get_int("flux", "seed", 0)), cfg.flux_range);
  } else if (cfg.flux_id == "expression") {
    const Expression density = doc.get_expression("flux", "density", "u");
    const Expression f = doc.get_expression("flux", "flux", "0");
    cfg.flux = expression_flux(density, f, cfg.flux_range, {0.0, cfg.domain.a}, {cfg.T, cfg.domain.b});
  } else {
    doc.fail(doc.require("flux", "builtin").line, "unknown built-in flux '" + cfg.flux_id +
                                                      "' (burgers, linear, phi_transport, random_poly, expression)");
  }

  cfg.cells = doc.get_int("mesh", "cells", 100);
  if (cfg.cells < 1) doc.fail(doc.require("mesh", "cells").line, "cells must be positive");
  cfg.run.cfl_target = doc.get_double("mesh", "cfl_target", 0.5);
  if (!(cfg.run.cfl_target > 0.0 && cfg.run.cfl_target <= 0.5))
    doc.fail(doc.require("mesh", "cfl_target").line, "cfl_target must lie in (0, 0.5]");
  cfg.run.fixed_dt = doc.get_optional_double("mesh", "dt");
  if (cfg.run.fixed_dt && !(*cfg.run.fixed_dt > 0.0)) doc.fail(doc.require("mesh", "dt").line, "dt must be positive");
  if (doc.find("mesh", "u_range")) cfg.run.u_range = detail::parse_range(doc, "mesh", "u_range", {});

  const std::string kind = doc.get_string("scheme", "flux", "godunov");
  const auto k = parse_flux_kind(kind);
  if (!k) doc.fail(doc.require("scheme", "flux").line, "unknown numerical flux '" + kind + "' (godunov, rusanov, antidiffusive)");
  cfg.spec.kind = *k;
  cfg.spec.rusanov_speed = doc.get_optional_double("scheme", "rusanov_speed");
  if (cfg.spec.rusanov_speed && !(*cfg.spec.rusanov_speed > 0.0))
    doc.fail(doc.require("scheme", "rusanov_speed").line, "rusanov_speed must be positive");
  cfg.run.inversion_tol = doc.get_double("scheme", "inversion_tol", 1e-12);
  if (!(cfg.run.inversion_tol > 0.0)) doc.fail(doc.require("scheme", "inversion_tol").line, "inversion_tol must be positive");
  cfg.run.threads = doc.get_int("scheme", "threads", 0);
  if (cfg.run.threads < 0) doc.fail(doc.require("scheme", "threads").line, "threads must be non-negative");

  cfg.u_B_text = doc.get_string("boundary", "u_B", "0");
  const Expression uB = doc.get_expression("boundary", "u_B", "0");
  if (uB.depends_on(Var::U)) doc.fail(doc.require("boundary", "u_B").line, "u_B may depend on t and x only");
  cfg.boundary.u_B = [uB](double t, double x) { return uB(t, x, 0.0); };
  const Expression adt = doc.get_expression("boundary", "alpha_dt", "1");
  const Expression adx = doc.get_expression("boundary", "alpha_dx", "1");
  cfg.boundary.alpha_B = detail::expression_coefficient(adt) * CoordinateForm::basis(2, {kT}) +
                         detail::expression_coefficient(adx) * CoordinateForm::basis(2, {kX});

  cfg.entropy_enabled = doc.get_bool("entropy", "enabled", true);
  cfg.entropy.kruzkov = doc.get_bool("entropy", "kruzkov", true);
  cfg.entropy.dissipation = doc.get_bool("entropy", "dissipation", true);
  cfg.entropy.tol_scale = doc.get_double("entropy", "tol_scale", 1e-9);
  if (!(cfg.entropy.tol_scale > 0.0)) doc.fail(doc.require("entropy", "tol_scale").line, "tol_scale must be positive");
  cfg.entropy.extra_lattice = doc.get_list("entropy", "lattice");
  if (const auto* e = doc.find("entropy", "convex")) {
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (item != "square" && item != "identity") doc.fail(e->line, "convex: unknown pair '" + item + "' (square, identity)");
      cfg.convex_pairs.push_back(item);
    }
  }
  cfg.entropy.inversion_tol = cfg.run.inversion_tol;
  cfg.entropy.threads = cfg.run.threads;

  cfg.output.directory = doc.get_string("output", "directory", "out");
  cfg.output.csv = doc.get_bool("output", "csv", true);
  cfg.output.json = doc.get_bool("output", "json", true);

  if (const auto* e = doc.find("geometry", "builtin")) {
    if (e->value != "annulus" && e->value != "square_with_hole")
      doc.fail(e->line, "unknown geometry '" + e->value + "' (annulus, square_with_hole)");
    cfg.geometry = e->value;
  }
  cfg.experiment = doc.get_string("convergence", "experiment", "");
  if (!cfg.experiment.empty() && cfg.experiment != "linear_advection" && cfg.experiment != "burgers_rarefaction" &&
      cfg.experiment != "burgers_shock")
    doc.fail(doc.require("convergence", "experiment").line,
             "unknown experiment '" + cfg.experiment + "' (linear_advection, burgers_rarefaction, burgers_shock)");
  cfg.hs = doc.get_list("convergence", "h");
  for (std::size_t i = 0; i < cfg.hs.size(); ++i)
    if (!(cfg.hs[i] > 0.0) || (i > 0 && !(cfg.hs[i] < cfg.hs[i - 1])))
      doc.fail(doc.require("convergence", "h").line, "h must be positive and strictly decreasing");
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

/// Convex pairs named in the config, on the given window.
inline std::vector<EntropyPair> convex_pairs(const Config& cfg, Interval window) {
  std::vector<EntropyPair> out;
  for (const auto& n : cfg.convex_pairs)
    out.push_back(n == "square" ? EntropyPair::square(window) : EntropyPair::identity(window));
  return out;
}

inline Experiment experiment_by_name(const std::string& name) {
  if (name == "linear_advection") return linear_advection_experiment();
  if (name == "burgers_rarefaction") return burgers_rarefaction_experiment();
  if (name == "burgers_shock") return burgers_shock_experiment();
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace sfvm

#endif  // SFVM_CONFIG_HPP_
