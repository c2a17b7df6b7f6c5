#include "gridcascade/dcflow.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/core.h>

namespace gridcascade {

Injection make_injection(std::span<const double> supply, std::span<const double> demand) {
  Injection inj(supply.size(), 0.0);
  for (std::size_t i = 0; i < inj.size(); ++i) inj[i] = supply[i] - demand[i];
  return inj;
}

// Reduced Laplacian of one component with the reference node's row and
// column removed; local index 0 is the reference.
struct FlowSolver::ComponentSystem {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> local;  // indexed by position in `nodes`
  Eigen::SparseMatrix<double> reduced;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor;
};

FlowSolver::FlowSolver(const Grid& grid, LineMask alive)
    : FlowSolver(grid, std::move(alive), std::span<const NodeId>{}) {}

FlowSolver::FlowSolver(const Grid& grid, LineMask alive, std::span<const NodeId> references)
    : grid_(&grid), alive_(std::move(alive)) {
  if (alive_.size() != grid.line_count()) {
    throw FlowError(fmt::format("alive mask has {} entries for {} lines", alive_.size(),
                                grid.line_count()));
  }
  components_ = connected_components(grid, alive_);
  auto groups = components_.groups();
  systems_.resize(components_.count);

  std::vector<std::size_t> position(grid.node_count(), 0);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    auto& sys = systems_[c];
    sys.nodes = std::move(groups[c]);
    if (!references.empty()) {
      auto ref = references[c];
      auto it = std::find(sys.nodes.begin(), sys.nodes.end(), ref);
      if (it == sys.nodes.end()) {
        throw FlowError(fmt::format("reference node {} is not in component {}", ref, c));
      }
      std::iter_swap(sys.nodes.begin(), it);
    }
    for (std::size_t k = 0; k < sys.nodes.size(); ++k) position[sys.nodes[k]] = k;
    const auto n = sys.nodes.size();
    if (n < 2) continue;

    std::vector<Eigen::Triplet<double>> triplets;
    for (auto v : sys.nodes) {
      for (auto lid : grid.incident(v)) {
        if (!alive_[lid]) continue;
        const auto& l = grid.line(lid);
        if (l.from != v) continue;  // visit each line once
        const double b = 1.0 / l.reactance;
        const auto i = position[l.from];
        const auto j = position[l.to];
        if (i > 0) triplets.emplace_back(i - 1, i - 1, b);
        if (j > 0) triplets.emplace_back(j - 1, j - 1, b);
        if (i > 0 && j > 0) {
          triplets.emplace_back(i - 1, j - 1, -b);
          triplets.emplace_back(j - 1, i - 1, -b);
        }
      }
    }
    sys.reduced.resize(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1));
    sys.reduced.setFromTriplets(triplets.begin(), triplets.end());
    sys.factor = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    sys.factor->compute(sys.reduced);
    if (sys.factor->info() != Eigen::Success) {
      throw SingularSystemError(
          fmt::format("factorization failed for component of node {}", sys.nodes.front()));
    }
  }
}

FlowSolver::~FlowSolver() = default;
FlowSolver::FlowSolver(FlowSolver&&) noexcept = default;
FlowSolver& FlowSolver::operator=(FlowSolver&&) noexcept = default;

FlowSolution FlowSolver::solve(std::span<const double> injection,
                               const FlowTolerances& tolerances) {
  const auto& grid = *grid_;
  if (injection.size() != grid.node_count()) {
    throw FlowError(fmt::format("injection has {} entries for {} nodes", injection.size(),
                                grid.node_count()));
  }
  FlowSolution sol;
  sol.flow.assign(grid.line_count(), 0.0);
  sol.phase.assign(grid.node_count(), 0.0);

  for (const auto& sys : systems_) {
    double sum = 0.0, positive = 0.0, negative = 0.0, largest = 0.0;
    for (auto v : sys.nodes) {
      sum += injection[v];
      largest = std::max(largest, std::abs(injection[v]));
      (injection[v] > 0 ? positive : negative) += std::abs(injection[v]);
    }
    if (largest == 0.0) continue;
    if (std::abs(sum) > tolerances.balance * std::max(positive, negative)) {
      throw UnbalancedError(fmt::format(
          "component of node {} is unbalanced: net injection {} (supply {}, demand {})",
          sys.nodes.front(), sum, positive, negative));
    }
    if (sys.nodes.size() < 2) continue;

    const auto m = static_cast<Eigen::Index>(sys.nodes.size() - 1);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m; ++k) rhs[k] = injection[sys.nodes[k + 1]];
    Eigen::VectorXd theta = sys.factor->solve(rhs);
    // one step of iterative refinement
    Eigen::VectorXd r = rhs - sys.reduced * theta;
    theta += sys.factor->solve(r);
    if (sys.factor->info() != Eigen::Success || !theta.allFinite()) {
      throw SingularSystemError(
          fmt::format("solve failed for component of node {}", sys.nodes.front()));
    }
    sol.phase[sys.nodes.front()] = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) sol.phase[sys.nodes[k + 1]] = theta[k];
  }

  for (const auto& l : grid.lines()) {
    if (!alive_[l.id]) continue;
    sol.flow[l.id] = (sol.phase[l.from] - sol.phase[l.to]) / l.reactance;
  }
  return sol;
}

FlowSolution solve_flow(const Grid& grid, const LineMask& alive, std::span<const double> injection,
                        const FlowTolerances& tolerances) {
  FlowSolver solver(grid, alive);
  return solver.solve(injection, tolerances);
}

FlowSolution solve_flow(const Grid& grid, const LineMask& alive, std::span<const double> injection,
                        std::span<const NodeId> references, const FlowTolerances& tolerances) {
  FlowSolver solver(grid, alive, references);
  return solver.solve(injection, tolerances);
}

double path_sum(const FlowSolution& solution, const Grid& grid, const LineMask& alive,
                const Path& path) {
  double total = 0.0;
  NodeId at = path.start;
  for (auto lid : path.lines) {
    if (lid >= grid.line_count()) throw FlowError(fmt::format("line {} does not exist", lid));
    const auto& l = grid.line(lid);
    if (!alive[lid]) throw FlowError(fmt::format("path uses dead line {}", lid));
    if (l.from == at) {
      total += solution.flow[lid] * l.reactance;
      at = l.to;
    } else if (l.to == at) {
      total -= solution.flow[lid] * l.reactance;
      at = l.from;
    } else {
      throw FlowError(fmt::format("path is disconnected: line {} does not touch node {}", lid, at));
    }
  }
  return total;
}

std::vector<double> conservation_residual(const FlowSolution& solution, const Grid& grid,
                                          const LineMask& alive,
                                          std::span<const double> injection) {
  std::vector<double> res(grid.node_count(), 0.0);
  for (const auto& l : grid.lines()) {
    if (!alive[l.id]) continue;
    res[l.from] += solution.flow[l.id];
    res[l.to] -= solution.flow[l.id];
  }
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= injection[i];
  return res;
}

}  // namespace gridcascade
