#include "gridcascade/provisioning.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "gridcascade/cascade.hpp"
#include "gridcascade/dcflow.hpp"
#include "gridcascade/parallel.hpp"

namespace gridcascade {

void ProvisioningSpec::validate() const {
  if (k != 0 && k != 1) throw std::invalid_argument(fmt::format("k must be 0 or 1, got {}", k));
  if (!(fos >= 1.0)) throw std::invalid_argument(fmt::format("factor of safety must be >= 1, got {}", fos));
  for (const auto& [line, K] : overrides) {
    if (!(K >= 1.0)) {
      throw std::invalid_argument(fmt::format("factor of safety override for line {} is {}", line, K));
    }
  }
}

namespace {

std::vector<double> intact_flows(const Grid& grid) {
  auto sol = solve_flow(grid, grid.all_alive(), make_injection(grid.supply(), grid.demand()));
  for (auto& f : sol.flow) f = std::abs(f);
  return sol.flow;
}

struct ContingencyOutcome {
  std::vector<double> worst;
  LineSet islanding;
};

ContingencyOutcome worst_case_flows(const Grid& grid, std::size_t jobs) {
  const auto n = grid.line_count();
  const auto demand = grid.demand();
  const auto supply = grid.supply();
  const auto base_components = connected_components(grid, grid.all_alive()).count;

  // Each chunk keeps its own running max; max is exact, so the merge does not
  // depend on how contingencies were scheduled.
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(n, 64));
  std::vector<std::vector<double>> chunk_max(chunks, std::vector<double>(n, 0.0));
  std::vector<char> islanded(n, 0);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    auto& worst = chunk_max[c];
    for (std::size_t r = c; r < n; r += chunks) {
      auto alive = grid.all_alive();
      alive[r] = false;
      auto balanced = shed(grid, alive, demand, supply);
      islanded[r] = balanced.components.count > base_components;
      FlowSolver solver(grid, alive);
      const auto sol = solver.solve(make_injection(balanced.supply, balanced.demand));
      for (std::size_t k = 0; k < n; ++k) worst[k] = std::max(worst[k], std::abs(sol.flow[k]));
    }
  });

  ContingencyOutcome out;
  out.worst = intact_flows(grid);
  for (const auto& worst : chunk_max) {
    for (std::size_t k = 0; k < n; ++k) out.worst[k] = std::max(out.worst[k], worst[k]);
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (islanded[r]) out.islanding.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<double> provision_n(const Grid& grid, double fos) {
  return provision(grid, ProvisioningSpec{0, fos, {}}).capacities;
}

std::vector<double> provision_n_minus_1(const Grid& grid, double fos, std::size_t jobs) {
  return provision(grid, ProvisioningSpec{1, fos, {}}, jobs).capacities;
}

ProvisioningResult provision(const Grid& grid, const ProvisioningSpec& spec, std::size_t jobs) {
  spec.validate();
  ProvisioningResult out;
  if (spec.k == 0) {
    out.base_flow = intact_flows(grid);
  } else {
    auto worst = worst_case_flows(grid, jobs);
    out.base_flow = std::move(worst.worst);
    out.islanding_contingencies = std::move(worst.islanding);
  }
  out.capacities.resize(grid.line_count());
  for (std::size_t k = 0; k < grid.line_count(); ++k) {
    auto it = spec.overrides.find(k);
    const double K = it == spec.overrides.end() ? spec.fos : it->second;
    out.capacities[k] = K * out.base_flow[k];
  }
  return out;
}

}  // namespace gridcascade
