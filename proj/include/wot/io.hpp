#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wot/duality.hpp"
#include "wot/entropy.hpp"
#include "wot/experiments.hpp"
#include "wot/paths.hpp"
#include "wot/rays.hpp"
#include "wot/transport.hpp"

namespace wot::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip text for a double; "nan" / "inf" / "-inf" spelled out.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// JSON has no infinities: they become strings, NaN becomes null.
inline json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json to_json(const DyadicPath& w) {
  return json{{"level", w.level()}, {"knots", std::vector<double>(w.knots().begin(), w.knots().end())}};
}

inline DyadicPath path_from_json(const json& j) {
  return DyadicPath(j.at("level").get<int>(), j.at("knots").get<std::vector<double>>());
}

inline json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Support entries only: [row, col, mass].
inline json to_json(const TransportPlan& plan) {
  json support = json::array();
  for (auto [i, j] : plan.support()) support.push_back(json::array({i, j, plan.mass(i, j)}));
  return json{{"rows", plan.rows()}, {"cols", plan.cols()}, {"support", std::move(support)}};
}

inline json to_json(const DualPotentials& pot) { return json{{"phi", pot.phi}, {"psi", pot.psi}}; }

inline json to_json(const CycleCheckReport& r) {
  json cycle = json::array();
  for (auto [i, j] : r.worst_cycle) cycle.push_back(json::array({i, j}));
  return json{{"passed", r.passed},           {"worst_violation", number(r.worst_violation)},
              {"worst_cycle", std::move(cycle)}, {"cycles_checked", r.cycles_checked},
              {"support_size", r.support_size}, {"sampled", r.sampled}};
}

inline json to_json(const SupportSystemReport& r) {
  return json{{"passed", r.passed},
              {"worst_support_slack", number(r.worst_support_slack)},
              {"worst_support_entry", json::array({r.worst_support_entry.first, r.worst_support_entry.second})},
              {"worst_violation", number(r.worst_violation)},
              {"worst_violation_entry", json::array({r.worst_violation_entry.first, r.worst_violation_entry.second})}};
}

inline json to_json(const std::variant<MongeMap, SplitReport>& v) {
  if (const auto* map = std::get_if<MongeMap>(&v)) return json{{"kind", "map"}, {"target_of", map->target_of}};
  json rows = json::array();
  for (const auto& row : std::get<SplitReport>(v).rows) {
    json masses = json::array();
    for (auto [j, m] : row.masses) masses.push_back(json::array({j, m}));
    rows.push_back(json{{"source", row.source}, {"row_mass", row.row_mass}, {"masses", std::move(masses)}});
  }
  return json{{"kind", "split"}, {"rows", std::move(rows)}};
}

inline json point_json(const Vec& v) { return v; }
inline json point_json(const DyadicPath& w) { return to_json(w); }

/// Nodes, oriented edges with residuals, uncertain pairs.
template <class Point>
json to_json(const RayGraph<Point>& g) {
  json nodes = json::array();
  for (const auto& p : g.points) nodes.push_back(point_json(p));
  json edges = json::array();
  for (std::size_t k = 0; k < g.oriented_pairs.size(); ++k) {
    edges.push_back(json::array({g.oriented_pairs[k].first, g.oriented_pairs[k].second, g.residuals[k]}));
  }
  json gamma = json::array();
  for (auto [w, z] : g.gamma) gamma.push_back(json::array({w, z}));
  json uncertain = json::array();
  for (auto [x, y] : g.uncertain_pairs) uncertain.push_back(json::array({x, y}));
  return json{{"tol", g.tol},           {"nodes", std::move(nodes)},         {"gamma", std::move(gamma)},
              {"edges", std::move(edges)}, {"uncertain", std::move(uncertain)}};
}

inline json to_json(const NonBranchingReport& r) {
  json v = json::array();
  for (const auto& b : r.violations) v.push_back(json{{"point", b.point}, {"a", b.partner_a}, {"b", b.partner_b}, {"residual", b.residual}});
  return json{{"passed", r.passed},
              {"worst_residual", r.worst_residual},
              {"triples_checked", r.triples_checked},
              {"violations", std::move(v)}};
}

inline json to_json(const GridSpec& g) {
  return json{{"dim", g.dim}, {"half_range", g.half_range}, {"cells_per_axis", g.cells_per_axis}};
}

inline json to_json(const KConvexityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"t", row.t}, {"entropy", number(row.entropy)}, {"bound", number(row.bound)}, {"deficit", number(row.deficit)}});
  }
  return json{{"k", r.k},
              {"entropy0", number(r.entropy0)},
              {"entropy1", number(r.entropy1)},
              {"w2", r.w2},
              {"cell_width", r.cell_width},
              {"tolerance_constant", r.tolerance_constant},
              {"tolerance", r.tolerance},
              {"truncation_mass", r.truncation_mass},
              {"min_deficit", number(r.min_deficit)},
              {"max_abs_deficit", number(r.max_abs_deficit)},
              {"infinite_entropy", r.infinite_entropy},
              {"rows", std::move(rows)}};
}

/// Comma-separated table with a commented preamble:
///   # version: ...
///   # config: {...}
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    Row& operator<<(double x) {
      cells_.push_back(format_double(x));
      return *this;
    }
    Row& operator<<(int x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& operator<<(std::size_t x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& operator<<(bool x) {
      cells_.push_back(x ? "true" : "false");
      return *this;
    }
    Row& operator<<(const std::string& x) {
      cells_.push_back(x);
      return *this;
    }
    Row& operator<<(const char* x) { return *this << std::string(x); }

   private:
    std::vector<std::string>& cells_;
  };

  Row row() {
    rows_.emplace_back();
    return Row(rows_.back());
  }

  std::size_t size() const { return rows_.size(); }

  void write(std::ostream& os, const std::vector<std::string>& preamble = {}) const {
    for (const auto& line : preamble) os << "# " << line << '\n';
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace wot::io
