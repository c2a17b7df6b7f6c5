#pragma once

#include <map>
#include <vector>

#include "gridcascade/grid.hpp"

namespace gridcascade {

/// Contingency order k (0 = intact grid only, 1 = every single-line outage)
/// and the factor of safety K applied on top of the worst-case flow.
struct ProvisioningSpec {
  int k = 0;
  double fos = 1.0;
  /// Per-line factor of safety replacing `fos` for the listed lines.
  std::map<LineId, double> overrides;

  void validate() const;
};

struct ProvisioningResult {
  std::vector<double> capacities;
  /// Worst-case |f| per line before the factor of safety.
  std::vector<double> base_flow;
  /// Single-line contingencies that split the grid and needed shedding.
  LineSet islanding_contingencies;
};

/// u = K |f| on the intact grid.
std::vector<double> provision_n(const Grid& grid, double fos);

/// u = K max(|f| intact, max_r |f^r|) over all single-line outages r.
std::vector<double> provision_n_minus_1(const Grid& grid, double fos, std::size_t jobs = 0);

ProvisioningResult provision(const Grid& grid, const ProvisioningSpec& spec, std::size_t jobs = 0);

}  // namespace gridcascade
