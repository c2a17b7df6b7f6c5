#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "gridcascade/grid.hpp"

namespace gridcascade {

/// Net injection per node: +P for supply, -D for demand, 0 for neutral.
using Injection = std::vector<double>;

struct FlowSolution {
  /// Signed flow per line, positive in from -> to direction. Zero on dead lines.
  std::vector<double> flow;
  /// Phase angle per node; the smallest node id of each component has phase 0.
  std::vector<double> phase;
};

struct FlowTolerances {
  /// Per-component |sum of injection| must be within this fraction of the
  /// component's total absolute injection.
  double balance = 1e-9;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnbalancedError : public FlowError {
 public:
  using FlowError::FlowError;
};

class SingularSystemError : public FlowError {
 public:
  using FlowError::FlowError;
};

Injection make_injection(std::span<const double> supply, std::span<const double> demand);

/// Solves the linearized power-flow equations on the alive subgraph. Each
/// component is solved independently through its reduced weighted Laplacian.
FlowSolution solve_flow(const Grid& grid, const LineMask& alive, std::span<const double> injection,
                        const FlowTolerances& tolerances = {});

/// Same, with an explicit reference node per component (any node of it).
/// Flows do not depend on the choice; phases shift by a per-component constant.
FlowSolution solve_flow(const Grid& grid, const LineMask& alive, std::span<const double> injection,
                        std::span<const NodeId> references, const FlowTolerances& tolerances = {});

/// Factorizes the reduced Laplacian of every component of the alive subgraph
/// once; repeated solves on the same topology reuse the factors. Not
/// thread-safe; use one instance per worker.
class FlowSolver {
 public:
  FlowSolver(const Grid& grid, LineMask alive);
  FlowSolver(const Grid& grid, LineMask alive, std::span<const NodeId> references);
  ~FlowSolver();
  FlowSolver(FlowSolver&&) noexcept;
  FlowSolver& operator=(FlowSolver&&) noexcept;

  const LineMask& alive() const { return alive_; }
  const Components& components() const { return components_; }

  FlowSolution solve(std::span<const double> injection, const FlowTolerances& tolerances = {});

 private:
  struct ComponentSystem;

  const Grid* grid_;
  LineMask alive_;
  Components components_;
  std::vector<ComponentSystem> systems_;
};

/// A walk through the grid: a start node and the lines traversed in order.
struct Path {
  NodeId start = 0;
  std::vector<LineId> lines;
};

/// Sum of flow * reactance along the path, signed by traversal direction.
/// Equals phase(start) - phase(end). Throws FlowError when a line is dead or
/// does not continue from the current node.
double path_sum(const FlowSolution& solution, const Grid& grid, const LineMask& alive,
                const Path& path);

/// Net outflow minus injection per node.
std::vector<double> conservation_residual(const FlowSolution& solution, const Grid& grid,
                                          const LineMask& alive, std::span<const double> injection);

}  // namespace gridcascade
