#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridcascade/cascade.hpp"
#include "gridcascade/grid.hpp"
#include "gridcascade/lp.hpp"

namespace gridcascade {

/// Cascade state just before round t: the quantities the controller sees.
struct ControlSnapshot {
  std::size_t round = 0;
  LineMask alive;
  std::vector<double> demand;
  std::vector<double> supply;
  std::vector<double> moving_average;
  Components components;
};

ControlSnapshot make_snapshot(const Grid& grid, const CascadeState& state);

/// Index of each LP variable; npos where the variable does not exist
/// (dead lines, non-demand nodes, ...).
struct ControlLp {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  lp::LinearProgram program;
  std::vector<std::size_t> shed;       // per node
  std::vector<std::size_t> flow;       // per line
  std::vector<std::size_t> abs_flow;   // per line
  std::vector<std::size_t> phase;      // per node
  std::vector<std::size_t> generation; // per node
  std::vector<std::size_t> lambda;     // per component
};

/// Minimum total shedding such that the next round's moving average of every
/// alive line stays at or below (1 - epsilon) u, with each component's
/// generators ramped down by a common fraction lambda.
ControlLp build_lp(const ControlSnapshot& snapshot, const Grid& grid, double alpha, double epsilon);

struct ControlSolution {
  lp::Status status = lp::Status::infeasible;
  std::vector<double> shed;        // per node, 0 where not a demand node
  std::vector<double> lambda;      // per component
  std::vector<double> flow;        // per line, 0 on dead lines
  std::vector<double> phase;       // per node
  std::vector<double> generation;  // per node
  double objective = 0.0;
  double served_demand = 0.0;
  double max_violation = 0.0;
  double dual_infeasibility = 0.0;

  bool optimal() const { return status == lp::Status::optimal; }
};

/// Solves the LP (DenseSimplex unless `solver` is given); s and lambda are
/// clipped to their bounds.
ControlSolution solve_lp(const ControlLp& lp, const ControlSnapshot& snapshot,
                         const lp::Solver* solver = nullptr);

/// State with demand D~ - s and supply P~ (1 - lambda), ready for a cascade step.
CascadeState apply_control(const CascadeState& state, const ControlSolution& solution);

enum class ControlOutcome { stabilized, unstable, infeasible, out_of_range, error };

const char* to_string(ControlOutcome outcome);

struct ControlRow {
  std::size_t round = 0;
  ControlOutcome outcome = ControlOutcome::error;
  double yield = 0.0;
  double shed = 0.0;
  std::string message;
};

struct ControlOptions {
  /// Safety margin in the capacity constraint; the cascade's epsilon if unset.
  std::optional<double> epsilon;
  std::size_t jobs = 0;
};

/// For each t: replay the uncontrolled cascade to just before round t, solve
/// the control LP there, apply it and check that one further round removes
/// nothing. Rounds 0 and 1 both control right after the failure event.
std::vector<ControlRow> control_sweep(const Grid& grid, const LineSet& initial_failure,
                                      const CascadeConfig& config, const std::vector<std::size_t>& rounds,
                                      const ControlOptions& options = {});

/// The single-round version of control_sweep.
ControlRow control_at(const Grid& grid, const LineSet& initial_failure, const CascadeConfig& config,
                      std::size_t round, const ControlOptions& options = {});

}  // namespace gridcascade
