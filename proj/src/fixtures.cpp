#include "gridcascade/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

namespace gridcascade::fixtures {

LineId MRingIndex::tie(std::size_t area) const {
  if (!with_ties_) throw std::logic_error("M-ring built without tie lines");
  return base(area) + 4;
}

std::vector<LineId> MRingIndex::even_lines() const {
  std::vector<LineId> out;
  for (std::size_t i = 0; i < M_; ++i) {
    out.push_back(even(i));
    out.push_back(even_parallel(i));
  }
  return out;
}

std::vector<LineId> MRingIndex::odd_lines() const {
  std::vector<LineId> out;
  for (std::size_t i = 0; i < M_; ++i) {
    out.push_back(odd(i));
    out.push_back(odd_parallel(i));
  }
  return out;
}

std::vector<LineId> MRingIndex::tie_lines() const {
  std::vector<LineId> out;
  if (!with_ties_) return out;
  for (std::size_t i = 0; i < M_; ++i) out.push_back(tie(i));
  return out;
}

LineSet MRingIndex::area_failure(std::size_t area) const {
  LineSet out{even(area), even_parallel(area), odd(area), odd_parallel(area)};
  if (with_ties_) {
    out.push_back(tie(area));
    out.push_back(tie(area + M_ - 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

LineSet MRingIndex::parallel_failure(std::size_t area) const {
  return {even(area), even_parallel(area)};
}

Grid make_mring(std::size_t M, const MRingOptions& options) {
  if (M < 2) throw std::invalid_argument(fmt::format("M-ring needs M >= 2, got {}", M));
  const MRingIndex idx(M, options.with_ties);
  const double pi = std::numbers::pi;
  const double R = options.layout_radius;
  const double half_width = pi / (3.0 * static_cast<double>(M));

  std::vector<Node> nodes(3 * M);
  auto polar = [](double r, double angle) { return Point{r * std::cos(angle), r * std::sin(angle)}; };
  for (std::size_t i = 0; i < M; ++i) {
    const double angle = 2.0 * pi * static_cast<double>(i) / static_cast<double>(M);
    nodes[i] = {i, NodeRole::supply(2.0), polar(0.8 * R, angle)};
    nodes[idx.even_demand(i)] = {idx.even_demand(i), NodeRole::demand(1.0), polar(R, angle - half_width)};
    nodes[idx.odd_demand(i)] = {idx.odd_demand(i), NodeRole::demand(1.0), polar(R, angle + half_width)};
  }

  std::vector<Line> lines;
  lines.reserve(idx.lines_per_area() * M);
  auto add = [&](NodeId from, NodeId to) {
    lines.push_back({lines.size(), from, to, 1.0, options.capacity});
  };
  for (std::size_t i = 0; i < M; ++i) {
    add(i, idx.even_demand(i));
    add(i, idx.even_demand(i));
    add(i, idx.odd_demand(i));
    add(i, idx.odd_demand(i));
    if (options.with_ties) add(idx.odd_demand(i), idx.even_demand(i + 1));
  }
  return Grid(std::move(nodes), std::move(lines));
}

QGraphIndex::QGraphIndex(std::size_t m) : m_(m) {
  if (m < 3) throw std::invalid_argument(fmt::format("Q-graph needs m >= 3, got {}", m));
  LineId next = 0;
  for (std::size_t p = 1; p <= m; ++p) {
    std::vector<LineId> ids(path_length(p));
    for (auto& id : ids) id = next++;
    paths_.push_back(std::move(ids));
  }
}

std::size_t QGraphIndex::path_of(LineId line) const {
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    if (line >= paths_[p].front() && line <= paths_[p].back()) return p + 1;
  }
  throw std::out_of_range(fmt::format("line {} is not in Q_{}", line, m_));
}

Grid make_qgraph(std::size_t m, const QGraphOptions& options) {
  const QGraphIndex idx(m);
  const double W = options.width;
  std::vector<Node> nodes;
  nodes.push_back({0, NodeRole::supply(1.0), {0.0, 0.0}});
  nodes.push_back({1, NodeRole::demand(1.0), {W, 0.0}});

  std::vector<Line> lines;
  for (std::size_t p = 1; p <= m; ++p) {
    const auto len = QGraphIndex::path_length(p);
    // Polyline: up from the supply, across at height h, down to the demand.
    const double h = (static_cast<double>(p) - 0.5 * static_cast<double>(m + 1)) * options.path_spacing;
    const double rise = std::abs(h);
    const double total = 2.0 * rise + W;
    auto at = [&](double s) -> Point {
      if (s <= rise) return {0.0, std::copysign(s, h)};
      if (s <= rise + W) return {s - rise, h};
      return {W, std::copysign(total - s, h)};
    };
    NodeId prev = 0;
    for (std::size_t k = 1; k <= len; ++k) {
      NodeId cur = 1;
      if (k < len) {
        cur = nodes.size();
        nodes.push_back({cur, NodeRole::neutral(),
                         at(total * static_cast<double>(k) / static_cast<double>(len))});
      }
      lines.push_back({lines.size(), prev, cur, 1.0, options.capacity});
      prev = cur;
    }
  }
  return Grid(std::move(nodes), std::move(lines));
}

SingleFailureFlows expected_singlefailure_flows(std::size_t M) {
  const double m = static_cast<double>(M);
  const double denom = 2.0 * m + 0.5;
  return {2.0 * m / denom, m / denom, 1.0 - m / denom, 1.0 - 2.0 * m / denom};
}

double expected_qgraph_path_flow(std::size_t m) {
  return 1.0 / (1.5 - std::ldexp(1.0, -static_cast<int>(m - 1)));
}

}  // namespace gridcascade::fixtures
