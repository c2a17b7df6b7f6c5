#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridcascade {

using NodeId = std::size_t;
using LineId = std::size_t;

/// Sorted, duplicate-free list of line ids.
using LineSet = std::vector<LineId>;

/// Per-line liveness flags, indexed by LineId.
using LineMask = std::vector<bool>;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class NodeKind { neutral, supply, demand };

/// Supply P > 0, demand D > 0, or neutral. Zero-valued roles are neutral.
struct NodeRole {
  NodeKind kind = NodeKind::neutral;
  double power = 0.0;

  static NodeRole supply(double p) { return {NodeKind::supply, p}; }
  static NodeRole demand(double d) { return {NodeKind::demand, d}; }
  static NodeRole neutral() { return {}; }

  friend bool operator==(const NodeRole&, const NodeRole&) = default;
};

struct Node {
  NodeId id = 0;
  NodeRole role;
  Point coord;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Line {
  LineId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double reactance = 1.0;
  std::optional<double> capacity;

  friend bool operator==(const Line&, const Line&) = default;
};

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public GridError {
 public:
  ParseError(const std::string& source, std::size_t line_number, const std::string& what);
  std::size_t line_number() const { return line_number_; }

 private:
  std::size_t line_number_;
};

class ValidationError : public GridError {
 public:
  using GridError::GridError;
};

class BalanceError : public GridError {
 public:
  using GridError::GridError;
};

/// Immutable transmission grid. Node and line ids are dense in [0, N) and
/// [0, L); nodes()[i].id == i and lines()[k].id == k.
class Grid {
 public:
  Grid() = default;

  /// Validates and normalizes. Nodes and lines may be given in any order but
  /// their ids must be dense. Throws ValidationError.
  Grid(std::vector<Node> nodes, std::vector<Line> lines);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t line_count() const { return lines_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Line>& lines() const { return lines_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Line& line(LineId id) const { return lines_.at(id); }

  /// Lines incident to a node, ascending.
  std::span<const LineId> incident(NodeId id) const;

  /// P_i for supply nodes, 0 otherwise.
  std::vector<double> supply() const;
  /// D_i for demand nodes, 0 otherwise.
  std::vector<double> demand() const;
  double total_demand() const;
  double total_supply() const;

  bool has_capacities() const;
  /// Capacities u; throws ValidationError when any line lacks one.
  std::vector<double> capacities() const;
  Grid with_capacities(std::span<const double> capacities) const;
  Grid with_reactances(std::span<const double> reactances) const;
  Grid without_lines(std::span<const LineId> removed) const;

  LineMask all_alive() const { return LineMask(lines_.size(), true); }
  LineMask alive_except(std::span<const LineId> removed) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.nodes_ == b.nodes_ && a.lines_ == b.lines_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Line> lines_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<LineId> adjacency_;
};

struct Components {
  /// component_of[node] in [0, count). Components are numbered in order of
  /// their smallest node id.
  std::vector<std::size_t> component_of;
  std::size_t count = 0;

  std::vector<std::vector<NodeId>> groups() const;
};

Components connected_components(const Grid& grid, const LineMask& alive);
Components connected_components(const Grid& grid, std::span<const LineId> removed);

struct ComponentBalance {
  std::vector<NodeId> nodes;
  double supply = 0.0;
  double demand = 0.0;
  /// |supply - demand| <= 1e-9 * max(supply, demand).
  bool balanced = true;
};

std::vector<ComponentBalance> balance_check(const Grid& grid, const LineMask& alive);
std::vector<ComponentBalance> balance_check(const Grid& grid);

struct LoadOptions {
  bool require_balanced = false;
};

Grid parse_grid(const std::string& text, const std::string& source = "<string>",
                const LoadOptions& options = {});
Grid load_grid(const std::filesystem::path& path, const LoadOptions& options = {});

/// Byte-stable text form. Reactance is always written so reparsing is exact.
std::string serialize_grid(const Grid& grid);
void save_grid(const Grid& grid, const std::filesystem::path& path);

double distance(Point a, Point b);

}  // namespace gridcascade
