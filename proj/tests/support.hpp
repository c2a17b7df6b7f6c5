#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "gridcascade/dcflow.hpp"
#include "gridcascade/geo.hpp"
#include "gridcascade/grid.hpp"
#include "gridcascade/lp.hpp"

namespace testing {

using namespace gridcascade;

struct RandomGridOptions {
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 50;
  /// Extra lines on top of a spanning tree, as a fraction of the node count.
  double extra_lines = 0.6;
  double extent = 100.0;
  bool connected = true;
};

/// Balanced grid with random coordinates, reactances and roles. Connected
/// unless options say otherwise (then each component is balanced).
inline Grid random_grid(std::mt19937_64& rng, const RandomGridOptions& options = {}) {
  std::uniform_int_distribution<std::size_t> count(options.min_nodes, options.max_nodes);
  std::uniform_real_distribution<double> coord(0.0, options.extent);
  std::uniform_real_distribution<double> reactance(0.2, 3.0);
  std::uniform_real_distribution<double> power(0.5, 4.0);
  const auto n = count(rng);

  std::vector<Line> lines;
  auto add_line = [&](NodeId a, NodeId b) {
    lines.push_back({lines.size(), a, b, reactance(rng), std::nullopt});
  };
  // two halves when disconnected, each spanning-tree connected
  const std::size_t split = options.connected ? n : std::max<std::size_t>(2, n / 2);
  for (NodeId v = 1; v < n; ++v) {
    const NodeId lo = v < split ? 0 : split;
    if (v == lo) continue;
    add_line(std::uniform_int_distribution<NodeId>(lo, v - 1)(rng), v);
  }
  const auto extra = static_cast<std::size_t>(options.extra_lines * static_cast<double>(n));
  for (std::size_t k = 0; k < extra; ++k) {
    NodeId a = std::uniform_int_distribution<NodeId>(0, n - 1)(rng);
    NodeId b = std::uniform_int_distribution<NodeId>(0, n - 1)(rng);
    if (a == b || (a < split) != (b < split)) continue;
    add_line(a, b);
  }

  std::vector<Node> nodes(n);
  std::vector<double> value(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    nodes[v].id = v;
    nodes[v].coord = {coord(rng), coord(rng)};
  }
  // per group: first node supplies everything, others demand or stay neutral
  for (auto [lo, hi] : {std::pair{NodeId{0}, split}, std::pair{split, n}}) {
    if (lo >= hi) continue;
    double total = 0.0;
    std::vector<NodeId> supplies{lo};
    for (NodeId v = lo + 1; v < hi; ++v) {
      const auto roll = std::uniform_int_distribution<int>(0, 5)(rng);
      if (roll == 0) {
        supplies.push_back(v);
      } else if (roll <= 4) {
        value[v] = power(rng);
        nodes[v].role = NodeRole::demand(value[v]);
        total += value[v];
      }
    }
    if (total == 0.0) {
      const NodeId v = hi - 1 == lo ? lo : hi - 1;
      if (v != lo) {
        supplies.erase(std::remove(supplies.begin(), supplies.end(), v), supplies.end());
        nodes[v].role = NodeRole::demand(1.0);
        total = 1.0;
      }
    }
    if (total == 0.0) continue;
    std::vector<double> share(supplies.size());
    double share_total = 0.0;
    for (auto& s : share) share_total += (s = power(rng));
    for (std::size_t i = 0; i < supplies.size(); ++i) {
      nodes[supplies[i]].role = NodeRole::supply(total * share[i] / share_total);
    }
  }
  return Grid(std::move(nodes), std::move(lines));
}

/// Hand-built grid where controlling in the middle of the cascade beats
/// controlling right away or at the end. Node 0 generates 3; node 1
/// (demand 1) hangs off it via line 0 (u = 1.5); node 2 (demand 2) is fed
/// through three parallel unit-reactance lines: 1 (u = 1.8), 2 (u = 0.8)
/// and 3 (u = 1). Losing line 3 overloads line 2 in round 1 and line 1 in
/// round 2. While line 2 lives the even split caps node 2 at 2 * 0.8.
inline Grid timing_fixture() {
  std::vector<Node> nodes{
      {0, NodeRole::supply(3.0), {0, 0}},
      {1, NodeRole::demand(1.0), {10, 0}},
      {2, NodeRole::demand(2.0), {0, 10}},
  };
  std::vector<Line> lines{
      {0, 0, 1, 1.0, 1.5},
      {1, 0, 2, 1.0, 1.8},
      {2, 0, 2, 1.0, 0.8},
      {3, 0, 2, 1.0, 1.0},
  };
  return Grid(std::move(nodes), std::move(lines));
}

inline const LineSet kTimingFailure{3};

/// Exhaustive vertex enumeration: every choice of n tight rows among the
/// constraints and finite bounds that pins a unique feasible point. Returns
/// the least objective over those points, or nullopt when none is feasible.
/// Only meaningful for LPs whose feasible region has a vertex optimum.
inline std::optional<double> vertex_enumeration_optimum(const lp::LinearProgram& program,
                                                        double tolerance = 1e-7) {
  const auto n = program.variables.size();
  struct Row {
    Eigen::VectorXd a;
    double b;
    bool equality;
  };
  std::vector<Row> rows;
  for (const auto& c : program.constraints) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& t : c.terms) a[static_cast<Eigen::Index>(t.var)] += t.coef;
    rows.push_back({a, c.rhs, c.sense == lp::Sense::equal});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = program.variables[j];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    e[static_cast<Eigen::Index>(j)] = 1.0;
    if (std::isfinite(v.lower) && v.lower == v.upper) {
      rows.push_back({e, v.lower, true});
      continue;
    }
    if (std::isfinite(v.lower)) rows.push_back({e, v.lower, false});
    if (std::isfinite(v.upper)) rows.push_back({e, v.upper, false});
  }
  std::vector<std::size_t> forced, optional;
  for (std::size_t i = 0; i < rows.size(); ++i) (rows[i].equality ? forced : optional).push_back(i);

  std::optional<double> best;
  std::vector<std::size_t> chosen;
  auto evaluate = [&] {
    std::vector<std::size_t> active = forced;
    active.insert(active.end(), chosen.begin(), chosen.end());
    Eigen::MatrixXd A(static_cast<Eigen::Index>(active.size()), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      A.row(static_cast<Eigen::Index>(k)) = rows[active[k]].a.transpose();
      b[static_cast<Eigen::Index>(k)] = rows[active[k]].b;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(n)) return;
    const Eigen::VectorXd x = qr.solve(b);
    if ((A * x - b).lpNorm<Eigen::Infinity>() > tolerance) return;
    std::vector<double> xv(x.data(), x.data() + x.size());
    if (program.max_violation(xv) > tolerance) return;
    const double z = program.objective(xv);
    if (!best || z < *best) best = z;
  };
  // forced rows may be linearly dependent; only their rank counts
  Eigen::MatrixXd F(static_cast<Eigen::Index>(forced.size()), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < forced.size(); ++k) F.row(static_cast<Eigen::Index>(k)) = rows[forced[k]].a.transpose();
  const auto forced_rank = forced.empty() ? std::size_t{0} : static_cast<std::size_t>(Eigen::FullPivLU<Eigen::MatrixXd>(F).rank());
  const std::size_t need = n - std::min(n, forced_rank);
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (chosen.size() == need) {
      evaluate();
      return;
    }
    for (std::size_t i = start; i + (need - chosen.size()) <= optional.size(); ++i) {
      chosen.push_back(optional[i]);
      self(self, i + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

using Mask = std::uint32_t;

inline Mask mask_of(const LineSet& s) {
  Mask m = 0;
  for (auto id : s) m |= Mask{1} << id;
  return m;
}

/// Grid with at most `max_lines` lines, not necessarily connected or balanced.
inline Grid random_geometry(std::mt19937_64& rng, std::size_t max_lines, double extent = 100.0) {
  std::uniform_int_distribution<std::size_t> nn(2, 20);
  std::uniform_real_distribution<double> coord(0.0, extent);
  const auto n = nn(rng);
  std::vector<Node> nodes(n);
  for (NodeId v = 0; v < n; ++v) nodes[v] = {v, NodeRole::neutral(), {coord(rng), coord(rng)}};
  // occasional exact duplicates and collinear placements stress degenerate cases
  if (n > 3 && rng() % 3 == 0) nodes[2].coord = {nodes[0].coord.x, nodes[1].coord.y};
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  const auto m = std::uniform_int_distribution<std::size_t>(1, max_lines)(rng);
  std::vector<Line> lines;
  while (lines.size() < m) {
    const NodeId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    lines.push_back({lines.size(), a, b, 1.0, 1.0});
  }
  return Grid(std::move(nodes), std::move(lines));
}

/// Every lattice point's line set is contained in some candidate's.
inline bool covered_on_lattice(const Grid& g, double r, const std::vector<Candidate>& cands, std::size_t lattice) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& n : g.nodes()) {
    x0 = std::min(x0, n.coord.x);
    y0 = std::min(y0, n.coord.y);
    x1 = std::max(x1, n.coord.x);
    y1 = std::max(y1, n.coord.y);
  }
  x0 -= r;
  y0 -= r;
  x1 += r;
  y1 += r;
  std::vector<Mask> cmask;
  for (const auto& c : cands) cmask.push_back(mask_of(c.affected));
  std::set<Mask> seen;
  for (std::size_t i = 0; i < lattice; ++i) {
    for (std::size_t j = 0; j < lattice; ++j) {
      const Point p{x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(lattice - 1),
                    y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(lattice - 1)};
      Mask m = 0;
      for (const auto& l : g.lines()) {
        if (segment_distance(p, g.node(l.from).coord, g.node(l.to).coord) <= r) m |= Mask{1} << l.id;
      }
      seen.insert(m);
    }
  }
  for (Mask m : seen) {
    bool ok = false;
    for (Mask c : cmask) {
      if ((m & ~c) == 0) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

inline std::set<LineSet> families(const std::vector<Candidate>& cands) {
  std::set<LineSet> out;
  for (const auto& c : cands) out.insert(c.affected);
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// Randomized depth-first walk from a to b over alive lines; a simple path.
inline std::optional<Path> random_simple_path(const Grid& g, const LineMask& alive, NodeId a, NodeId b,
                                              std::mt19937_64& rng) {
  std::vector<bool> visited(g.node_count(), false);
  Path path{a, {}};
  auto dfs = [&](auto&& self, NodeId v) -> bool {
    if (v == b) return true;
    visited[v] = true;
    std::vector<LineId> next(g.incident(v).begin(), g.incident(v).end());
    std::shuffle(next.begin(), next.end(), rng);
    for (auto id : next) {
      if (!alive[id]) continue;
      const auto& l = g.line(id);
      const NodeId w = l.from == v ? l.to : l.from;
      if (visited[w]) continue;
      path.lines.push_back(id);
      if (self(self, w)) return true;
      path.lines.pop_back();
    }
    return false;
  };
  if (!dfs(dfs, a)) return std::nullopt;
  return path;
}

}  // namespace testing
