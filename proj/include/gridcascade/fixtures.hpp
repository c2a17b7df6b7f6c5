#pragma once

#include <optional>
#include <vector>

#include "gridcascade/grid.hpp"

namespace gridcascade::fixtures {

struct MRingOptions {
  bool with_ties = true;
  /// Radius of the circle the areas are laid out on, in km.
  double layout_radius = 100.0;
  /// Uniform capacity assigned to every line, if any.
  std::optional<double> capacity;
};

/// Line numbering of an M-ring. Area i owns generator i and demand nodes
/// M+2i (even) and M+2i+1 (odd). Each area contributes two parallel even
/// lines, two parallel odd lines and, when present, the tie line leaving its
/// odd demand node towards the next area's even demand node.
class MRingIndex {
 public:
  MRingIndex(std::size_t M, bool with_ties) : M_(M), with_ties_(with_ties) {}

  std::size_t M() const { return M_; }
  bool with_ties() const { return with_ties_; }
  std::size_t lines_per_area() const { return with_ties_ ? 5 : 4; }

  NodeId generator(std::size_t area) const { return area % M_; }
  NodeId even_demand(std::size_t area) const { return M_ + 2 * (area % M_); }
  NodeId odd_demand(std::size_t area) const { return M_ + 2 * (area % M_) + 1; }

  LineId even(std::size_t area) const { return base(area); }
  LineId even_parallel(std::size_t area) const { return base(area) + 1; }
  LineId odd(std::size_t area) const { return base(area) + 2; }
  LineId odd_parallel(std::size_t area) const { return base(area) + 3; }
  /// Tie from odd_demand(area) to even_demand(area + 1).
  LineId tie(std::size_t area) const;

  std::vector<LineId> even_lines() const;
  std::vector<LineId> odd_lines() const;
  std::vector<LineId> tie_lines() const;

  /// Four internal lines of the area plus both tie lines touching it.
  LineSet area_failure(std::size_t area) const;
  /// Both even lines of the area.
  LineSet parallel_failure(std::size_t area) const;

 private:
  LineId base(std::size_t area) const { return (area % M_) * lines_per_area(); }

  std::size_t M_;
  bool with_ties_;
};

/// M generators with P = 2, 2M demands with D = 1, unit reactance.
Grid make_mring(std::size_t M, const MRingOptions& options = {});

struct QGraphOptions {
  double capacity = 0.5;
  /// Vertical spacing between neighbouring paths in km.
  double path_spacing = 10.0;
  /// Horizontal distance between supply and demand node in km.
  double width = 100.0;
};

/// Node 0 is the supply (P = 1), node 1 the demand (D = 1). Path p
/// (1-based) has 2 lines for p <= 2 and 2^(p-1) lines otherwise, listed from
/// the supply side.
class QGraphIndex {
 public:
  explicit QGraphIndex(std::size_t m);

  std::size_t m() const { return m_; }
  static std::size_t path_length(std::size_t p) { return p <= 2 ? 2 : std::size_t{1} << (p - 1); }
  const std::vector<LineId>& path_lines(std::size_t p) const { return paths_.at(p - 1); }
  /// Path (1-based) a line belongs to.
  std::size_t path_of(LineId line) const;

 private:
  std::size_t m_;
  std::vector<std::vector<LineId>> paths_;
};

Grid make_qgraph(std::size_t m, const QGraphOptions& options = {});

struct SingleFailureFlows {
  double parallel;  // surviving line parallel to the failed one
  double even;      // every other even line
  double odd;
  double tie;
};

/// Closed-form flows on the M-ring after one even line of area 0 fails.
SingleFailureFlows expected_singlefailure_flows(std::size_t M);

/// Total phase drop supply -> demand on the intact Q_m: 1 / (1.5 - 2^-(m-1)).
double expected_qgraph_path_flow(std::size_t m);

}  // namespace gridcascade::fixtures
