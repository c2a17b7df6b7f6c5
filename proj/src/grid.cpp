#include "gridcascade/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

namespace gridcascade {

ParseError::ParseError(const std::string& source, std::size_t line_number,
                       const std::string& what)
    : GridError(fmt::format("{}:{}: {}", source, line_number, what)),
      line_number_(line_number) {}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Grid::Grid(std::vector<Node> nodes, std::vector<Line> lines)
    : nodes_(std::move(nodes)), lines_(std::move(lines)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(lines_.begin(), lines_.end(),
            [](const Line& a, const Line& b) { return a.id < b.id; });

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.id != i) {
      throw ValidationError(fmt::format("node ids must be dense: expected {}, found {}", i, n.id));
    }
    if (!std::isfinite(n.coord.x) || !std::isfinite(n.coord.y)) {
      throw ValidationError(fmt::format("node {} has non-finite coordinates", n.id));
    }
    if (!std::isfinite(n.role.power) || n.role.power < 0.0) {
      throw ValidationError(fmt::format("node {} has invalid power {}", n.id, n.role.power));
    }
    if (n.role.kind == NodeKind::neutral || n.role.power == 0.0) {
      n.role = NodeRole::neutral();
    }
  }
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    const auto& l = lines_[k];
    if (l.id != k) {
      throw ValidationError(fmt::format("line ids must be dense: expected {}, found {}", k, l.id));
    }
    if (l.from >= nodes_.size() || l.to >= nodes_.size()) {
      throw ValidationError(fmt::format("line {} references missing node {}", l.id,
                                        l.from >= nodes_.size() ? l.from : l.to));
    }
    if (l.from == l.to) {
      throw ValidationError(fmt::format("line {} is a self-loop on node {}", l.id, l.from));
    }
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) {
      throw ValidationError(fmt::format("line {} has non-positive reactance {}", l.id, l.reactance));
    }
    if (l.capacity && (!(*l.capacity >= 0.0) || !std::isfinite(*l.capacity))) {
      throw ValidationError(fmt::format("line {} has invalid capacity {}", l.id, *l.capacity));
    }
  }

  // CSR adjacency
  adjacency_offsets_.assign(nodes_.size() + 1, 0);
  for (const auto& l : lines_) {
    ++adjacency_offsets_[l.from + 1];
    ++adjacency_offsets_[l.to + 1];
  }
  std::partial_sum(adjacency_offsets_.begin(), adjacency_offsets_.end(),
                   adjacency_offsets_.begin());
  adjacency_.resize(adjacency_offsets_.back());
  auto cursor = adjacency_offsets_;
  for (const auto& l : lines_) {
    adjacency_[cursor[l.from]++] = l.id;
    adjacency_[cursor[l.to]++] = l.id;
  }
}

std::span<const LineId> Grid::incident(NodeId id) const {
  return std::span<const LineId>(adjacency_).subspan(
      adjacency_offsets_.at(id), adjacency_offsets_.at(id + 1) - adjacency_offsets_.at(id));
}

std::vector<double> Grid::supply() const {
  std::vector<double> out(nodes_.size(), 0.0);
  for (const auto& n : nodes_) {
    if (n.role.kind == NodeKind::supply) out[n.id] = n.role.power;
  }
  return out;
}

std::vector<double> Grid::demand() const {
  std::vector<double> out(nodes_.size(), 0.0);
  for (const auto& n : nodes_) {
    if (n.role.kind == NodeKind::demand) out[n.id] = n.role.power;
  }
  return out;
}

double Grid::total_demand() const {
  auto d = demand();
  return std::accumulate(d.begin(), d.end(), 0.0);
}

double Grid::total_supply() const {
  auto p = supply();
  return std::accumulate(p.begin(), p.end(), 0.0);
}

bool Grid::has_capacities() const {
  return std::all_of(lines_.begin(), lines_.end(),
                     [](const Line& l) { return l.capacity.has_value(); });
}

std::vector<double> Grid::capacities() const {
  std::vector<double> u;
  u.reserve(lines_.size());
  for (const auto& l : lines_) {
    if (!l.capacity) {
      throw ValidationError(fmt::format("line {} has no capacity; provision the grid first", l.id));
    }
    u.push_back(*l.capacity);
  }
  return u;
}

Grid Grid::with_capacities(std::span<const double> capacities) const {
  if (capacities.size() != lines_.size()) {
    throw ValidationError(fmt::format("expected {} capacities, got {}", lines_.size(),
                                      capacities.size()));
  }
  auto lines = lines_;
  for (std::size_t k = 0; k < lines.size(); ++k) lines[k].capacity = capacities[k];
  return Grid(nodes_, std::move(lines));
}

Grid Grid::with_reactances(std::span<const double> reactances) const {
  if (reactances.size() != lines_.size()) {
    throw ValidationError(fmt::format("expected {} reactances, got {}", lines_.size(),
                                      reactances.size()));
  }
  auto lines = lines_;
  for (std::size_t k = 0; k < lines.size(); ++k) lines[k].reactance = reactances[k];
  return Grid(nodes_, std::move(lines));
}

Grid Grid::without_lines(std::span<const LineId> removed) const {
  auto alive = alive_except(removed);
  std::vector<Line> lines;
  for (const auto& l : lines_) {
    if (!alive[l.id]) continue;
    auto copy = l;
    copy.id = lines.size();
    lines.push_back(copy);
  }
  return Grid(nodes_, std::move(lines));
}

LineMask Grid::alive_except(std::span<const LineId> removed) const {
  LineMask alive(lines_.size(), true);
  for (auto id : removed) {
    if (id >= lines_.size()) {
      throw ValidationError(fmt::format("line {} does not exist", id));
    }
    alive[id] = false;
  }
  return alive;
}

std::vector<std::vector<NodeId>> Components::groups() const {
  std::vector<std::vector<NodeId>> out(count);
  for (NodeId i = 0; i < component_of.size(); ++i) out[component_of[i]].push_back(i);
  return out;
}

Components connected_components(const Grid& grid, const LineMask& alive) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  Components out;
  out.component_of.assign(grid.node_count(), unset);
  std::vector<NodeId> stack;
  for (NodeId start = 0; start < grid.node_count(); ++start) {
    if (out.component_of[start] != unset) continue;
    const auto c = out.count++;
    out.component_of[start] = c;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto lid : grid.incident(v)) {
        if (!alive[lid]) continue;
        const auto& l = grid.line(lid);
        const auto w = l.from == v ? l.to : l.from;
        if (out.component_of[w] == unset) {
          out.component_of[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
  return out;
}

Components connected_components(const Grid& grid, std::span<const LineId> removed) {
  return connected_components(grid, grid.alive_except(removed));
}

std::vector<ComponentBalance> balance_check(const Grid& grid, const LineMask& alive) {
  const auto comps = connected_components(grid, alive);
  std::vector<ComponentBalance> out(comps.count);
  for (const auto& n : grid.nodes()) {
    auto& b = out[comps.component_of[n.id]];
    b.nodes.push_back(n.id);
    if (n.role.kind == NodeKind::supply) b.supply += n.role.power;
    if (n.role.kind == NodeKind::demand) b.demand += n.role.power;
  }
  for (auto& b : out) {
    b.balanced = std::abs(b.supply - b.demand) <= 1e-9 * std::max(b.supply, b.demand);
  }
  return out;
}

std::vector<ComponentBalance> balance_check(const Grid& grid) {
  return balance_check(grid, grid.all_alive());
}

}  // namespace gridcascade
