#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "wot/grid.hpp"
#include "wot/norms.hpp"

namespace wot::cli {

using json = nlohmann::ordered_json;

/// Rejected configuration; key is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"norm", "ot", "rays", "convexity", "plimit", "project", "conjecture", "density"};
  return names;
}

/// Typed reads from one TOML table. Every read is recorded, with the value
/// actually used, into the resolved config; finish() rejects leftovers.
class Section {
 public:
  Section(const toml::table* table, std::string path, json* resolved)
      : table_(table), path_(std::move(path)), resolved_(resolved) {}

  bool has(std::string_view key) const { return table_ && table_->contains(key); }

  double real(std::string_view key, double def) {
    double v = def;
    if (const auto* n = node(key)) {
      if (auto x = n->value_exact<double>()) {
        v = *x;
      } else if (auto i = n->value_exact<std::int64_t>()) {
        v = static_cast<double>(*i);
      } else {
        throw ConfigError(full(key), "expected a number");
      }
    }
    record(key, v);
    return v;
  }

  std::int64_t integer(std::string_view key, std::int64_t def) {
    std::int64_t v = def;
    if (const auto* n = node(key)) {
      auto x = n->value_exact<std::int64_t>();
      if (!x) throw ConfigError(full(key), "expected an integer");
      v = *x;
    }
    record(key, v);
    return v;
  }

  /// Integer in [lo, hi].
  std::int64_t integer(std::string_view key, std::int64_t def, std::int64_t lo, std::int64_t hi) {
    const std::int64_t v = integer(key, def);
    if (v < lo || v > hi) {
      throw ConfigError(full(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
    }
    return v;
  }

  bool boolean(std::string_view key, bool def) {
    bool v = def;
    if (const auto* n = node(key)) {
      auto x = n->value_exact<bool>();
      if (!x) throw ConfigError(full(key), "expected true or false");
      v = *x;
    }
    record(key, v);
    return v;
  }

  std::string string(std::string_view key, const std::string& def) {
    std::string v = def;
    if (const auto* n = node(key)) {
      auto x = n->value_exact<std::string>();
      if (!x) throw ConfigError(full(key), "expected a string");
      v = *x;
    }
    record(key, v);
    return v;
  }

  std::string choice(std::string_view key, const std::string& def, const std::vector<std::string>& allowed) {
    std::string v = string(key, def);
    for (const auto& a : allowed) {
      if (a == v) return v;
    }
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(full(key), "unknown value \"" + v + "\" (expected one of " + list + ")");
  }

  std::vector<double> reals(std::string_view key, const std::vector<double>& def) {
    std::vector<double> v = def;
    if (const auto* arr = array(key)) {
      v.clear();
      for (const auto& e : *arr) {
        if (auto x = e.value_exact<double>()) {
          v.push_back(*x);
        } else if (auto i = e.value_exact<std::int64_t>()) {
          v.push_back(static_cast<double>(*i));
        } else {
          throw ConfigError(full(key), "expected an array of numbers");
        }
      }
    }
    record(key, v);
    return v;
  }

  std::vector<std::int64_t> integers(std::string_view key, const std::vector<std::int64_t>& def) {
    std::vector<std::int64_t> v = def;
    if (const auto* arr = array(key)) {
      v.clear();
      for (const auto& e : *arr) {
        auto x = e.value_exact<std::int64_t>();
        if (!x) throw ConfigError(full(key), "expected an array of integers");
        v.push_back(*x);
      }
    }
    record(key, v);
    return v;
  }

  std::vector<std::string> strings(std::string_view key, const std::vector<std::string>& def) {
    std::vector<std::string> v = def;
    if (const auto* arr = array(key)) {
      v.clear();
      for (const auto& e : *arr) {
        auto x = e.value_exact<std::string>();
        if (!x) throw ConfigError(full(key), "expected an array of strings");
        v.push_back(*x);
      }
    }
    record(key, v);
    return v;
  }

  /// Array of equal-length numeric rows.
  std::vector<std::vector<double>> rows(std::string_view key, const std::vector<std::vector<double>>& def) {
    std::vector<std::vector<double>> v = def;
    if (const auto* arr = array(key)) {
      v.clear();
      for (const auto& e : *arr) {
        const auto* row = e.as_array();
        if (!row) throw ConfigError(full(key), "expected an array of arrays");
        std::vector<double> r;
        for (const auto& x : *row) {
          if (auto d = x.value_exact<double>()) {
            r.push_back(*d);
          } else if (auto i = x.value_exact<std::int64_t>()) {
            r.push_back(static_cast<double>(*i));
          } else {
            throw ConfigError(full(key), "expected numeric rows");
          }
        }
        if (!v.empty() && r.size() != v.front().size()) throw ConfigError(full(key), "rows differ in length");
        v.push_back(std::move(r));
      }
    }
    record(key, v);
    return v;
  }

  Section sub(std::string_view key) {
    const toml::table* t = nullptr;
    if (const auto* n = node(key)) {
      t = n->as_table();
      if (!t) throw ConfigError(full(key), "expected a table");
    }
    json& slot = (*resolved_)[std::string(key)];
    if (slot.is_null()) slot = json::object();
    return Section(t, full(key), &slot);
  }

  /// Throws on any key that was never read.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!read_.count(std::string(k.str()))) throw ConfigError(full(k.str()), "unknown key");
    }
  }

  const std::string& path() const { return path_; }
  std::string full(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

 private:
  const toml::node* node(std::string_view key) {
    read_.insert(std::string(key));
    if (!table_) return nullptr;
    return table_->get(key);
  }

  const toml::array* array(std::string_view key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    const auto* a = n->as_array();
    if (!a) throw ConfigError(full(key), "expected an array");
    return a;
  }

  template <class T>
  void record(std::string_view key, const T& v) {
    read_.insert(std::string(key));
    (*resolved_)[std::string(key)] = v;
  }
  // JSON has no infinities
  void record(std::string_view key, double v) {
    read_.insert(std::string(key));
    if (std::isfinite(v)) {
      (*resolved_)[std::string(key)] = v;
    } else {
      (*resolved_)[std::string(key)] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
  }

  const toml::table* table_;
  std::string path_;
  json* resolved_;
  std::set<std::string> read_;
};

/// Named tolerances. Unknown names are rejected.
inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"embedding_rel", 1e-12},  // slack on |w|_{k,gamma} <= C |w|_H
      {"constant_rel", 1e-6},    // closed-form C against quadrature
      {"linear_rel", 1e-5},      // norm of w(t) = t
      {"gradient_rel", 1e-4},    // directional derivative against central differences
      {"lp_abs", 1e-9},          // exact solver against brute force, duality gap
      {"support", 1e-9},         // complementary slackness on the support
      {"cycle", 1e-9},           // cyclical monotonicity
      {"inversion", 1e-10},      // gradient-map round trip
      {"ray_rel", 0.0},          // ray additivity, relative to the diameter; 0 selects 1e-8 (1e-6 for paths)
      {"deficit_cells", 5.0},    // entropy deficit tolerance in cell widths
      {"compare", 1e-12},        // relative slack of monotonicity comparisons
      {"plan", 1e-12},           // l1 distance below which plans count as equal
      {"density_abs", 1e-12},    // absolute slack in the density estimate
  };
  return t;
}

struct CostConfig {
  /// lp_squared, linf_squared, lp_metric, sobolev, warped_sup
  std::string kind = "lp_squared";
  double p = 2.0;
  std::vector<std::vector<double>> warp;
};

struct SweepConfig {
  std::vector<std::int64_t> levels;
  std::vector<double> p_values;
  std::vector<double> t_values;
  std::vector<std::int64_t> panels;
  std::vector<std::string> costs;
  std::vector<std::int64_t> cells_per_axis;
};

struct ExperimentConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  SobolevParams sobolev;
  QuadratureSpec quadrature;
  GridSpec grid;
  CostConfig cost;
  SweepConfig sweep;
  std::string out_dir = "out";
  std::map<std::string, double> tolerance = default_tolerances();
  /// Raw subcommand table, read by the runner.
  toml::table experiment;
  /// Every field with the value in force; experiment keys are added by the runner.
  json resolved;
};

namespace detail {

/// "a.b.c" -> {"a", "b", "c"}
inline std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : key) {
    if (ch == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts) {
    if (p.empty()) throw ConfigError(key, "malformed override key");
  }
  return parts;
}

}  // namespace detail

/// Applies `key=value`; the value is read as a TOML value, falling back to a bare string.
inline void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", "override \"" + assignment + "\" is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const auto parts = detail::split_key(key);

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + text);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", text}};
  }
  toml::table* t = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto* n = t->get(parts[i]);
    if (!n) {
      t->insert(parts[i], toml::table{});
      n = t->get(parts[i]);
    }
    t = n->as_table();
    if (!t) throw ConfigError(key, "override descends into a non-table value");
  }
  t->insert_or_assign(parts.back(), *parsed.get("v"));
}

/// Validates everything except the experiment table.
inline ExperimentConfig parse_config(const toml::table& root) {
  ExperimentConfig c;
  c.resolved = json::object();
  Section top(&root, "", &c.resolved);

  c.subcommand = top.choice("subcommand", "", subcommands());
  const std::int64_t seed = top.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  {
    Section s = top.sub("sobolev");
    const auto k = s.integer("k", 4, 1, 64);
    const double gamma = s.real("gamma", 0.3);
    try {
      c.sobolev = SobolevParams(static_cast<int>(k), gamma);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sobolev.gamma", e.what());
    }
    s.finish();
  }
  {
    Section s = top.sub("quadrature");
    c.quadrature.panels_per_cell = static_cast<int>(s.integer("panels_per_cell", 2, 1, 64));
    c.quadrature.gauss_points = static_cast<int>(s.integer("gauss_points", 8, 1, 64));
    s.finish();
  }
  {
    Section s = top.sub("grid");
    c.grid.dim = static_cast<int>(s.integer("dim", 1, 1, 3));
    c.grid.half_range = s.real("half_range", 8.0);
    c.grid.cells_per_axis = static_cast<int>(s.integer("cells_per_axis", 400, 1, 100000));
    try {
      c.grid.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("grid", e.what());
    }
    s.finish();
  }
  {
    Section s = top.sub("cost");
    c.cost.kind = s.choice("kind", "lp_squared", {"lp_squared", "linf_squared", "lp_metric", "sobolev", "warped_sup"});
    c.cost.p = s.real("p", 2.0);
    if (!(c.cost.p >= 1.0)) throw ConfigError("cost.p", "must be >= 1 (inf is written as inf)");
    c.cost.warp = s.rows("warp", {});
    if (c.cost.kind == "warped_sup" && c.cost.warp.empty()) throw ConfigError("cost.warp", "required for warped_sup");
    if (!c.cost.warp.empty() && c.cost.warp.size() != c.cost.warp.front().size()) {
      throw ConfigError("cost.warp", "must be a square matrix");
    }
    s.finish();
  }
  {
    Section s = top.sub("sweep");
    c.sweep.levels = s.integers("levels", {});
    c.sweep.p_values = s.reals("p_values", {});
    c.sweep.t_values = s.reals("t_values", {});
    c.sweep.panels = s.integers("panels", {});
    c.sweep.costs = s.strings("costs", {});
    c.sweep.cells_per_axis = s.integers("cells_per_axis", {});
    for (double t : c.sweep.t_values) {
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("sweep.t_values", "entries must lie in [0, 1]");
    }
    for (auto l : c.sweep.levels) {
      if (l < 0 || l > 16) throw ConfigError("sweep.levels", "entries must lie in [0, 16]");
    }
    for (auto p : c.sweep.panels) {
      if (p < 1 || p > 64) throw ConfigError("sweep.panels", "entries must lie in [1, 64]");
    }
    for (auto m : c.sweep.cells_per_axis) {
      if (m < 1) throw ConfigError("sweep.cells_per_axis", "entries must be positive");
    }
    s.finish();
  }
  {
    Section s = top.sub("output");
    c.out_dir = s.string("dir", "out");
    s.finish();
  }
  {
    Section s = top.sub("tolerance");
    for (auto& [name, value] : c.tolerance) {
      value = s.real(name, value);
      if (!(value >= 0.0)) throw ConfigError("tolerance." + name, "must be nonnegative");
    }
    s.finish();
  }
  if (const auto* n = root.get("experiment")) {
    const auto* t = n->as_table();
    if (!t) throw ConfigError("experiment", "expected a table");
    c.experiment = *t;
  }
  c.resolved["experiment"] = json::object();
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key != "experiment" && !c.resolved.contains(key)) throw ConfigError(key, "unknown key");
  }
  if (c.subcommand.empty()) throw ConfigError("subcommand", "missing");
  return c;
}

/// Reads a TOML file, applies seed / out / overrides, and validates.
inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                                    std::optional<std::int64_t> seed, const std::optional<std::string>& out_dir) {
  toml::table root;
  if (!path.empty()) {
    try {
      root = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
      std::string msg(e.description());
      const auto& src = e.source();
      if (src.begin) msg += " (line " + std::to_string(src.begin.line) + ", column " + std::to_string(src.begin.column) + ")";
      throw ConfigError("", path + ": " + msg);
    }
  }
  for (const auto& o : overrides) apply_override(root, o);
  if (seed) root.insert_or_assign("seed", *seed);
  if (out_dir) {
    if (!root.contains("output")) root.insert("output", toml::table{});
    auto* t = root.get("output")->as_table();
    if (!t) throw ConfigError("output", "expected a table");
    t->insert_or_assign("dir", *out_dir);
  }
  return parse_config(root);
}

}  // namespace wot::cli
