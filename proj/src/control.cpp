#include "gridcascade/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "gridcascade/parallel.hpp"

namespace gridcascade {

using lp::Sense;
using lp::Term;

ControlSnapshot make_snapshot(const Grid& grid, const CascadeState& state) {
  ControlSnapshot snap;
  snap.round = state.round + 1;
  snap.alive = state.alive;
  snap.demand = state.demand;
  snap.supply = state.supply;
  snap.moving_average = state.moving_average;
  snap.components = connected_components(grid, state.alive);
  return snap;
}

ControlLp build_lp(const ControlSnapshot& snap, const Grid& grid, double alpha, double epsilon) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument(fmt::format("alpha {} not in (0, 1]", alpha));
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument(fmt::format("epsilon {} not in [0, 1)", epsilon));
  }
  const auto capacity = grid.capacities();
  const auto n = grid.node_count();
  const auto m = grid.line_count();
  const auto& comp = snap.components;

  ControlLp out;
  auto& prog = out.program;
  out.shed.assign(n, ControlLp::npos);
  out.generation.assign(n, ControlLp::npos);
  out.phase.assign(n, ControlLp::npos);
  out.flow.assign(m, ControlLp::npos);
  out.abs_flow.assign(m, ControlLp::npos);
  out.lambda.assign(comp.count, ControlLp::npos);

  for (const auto& node : grid.nodes()) {
    if (node.role.kind == NodeKind::demand) {
      out.shed[node.id] = prog.add_variable(0.0, snap.demand[node.id], 1.0, fmt::format("s{}", node.id));
    }
  }
  std::vector<bool> seen(comp.count, false);
  for (const auto& node : grid.nodes()) {
    const auto c = comp.component_of[node.id];
    // the smallest node of each component is the phase reference
    const bool reference = !seen[c];
    seen[c] = true;
    out.phase[node.id] = reference ? prog.add_variable(0.0, 0.0, 0.0, fmt::format("theta{}", node.id))
                                   : prog.add_variable(-lp::kInfinity, lp::kInfinity, 0.0,
                                                       fmt::format("theta{}", node.id));
  }
  for (std::size_t c = 0; c < comp.count; ++c) {
    out.lambda[c] = prog.add_variable(0.0, 1.0, 0.0, fmt::format("lambda{}", c));
  }
  for (const auto& node : grid.nodes()) {
    if (node.role.kind == NodeKind::supply) {
      out.generation[node.id] = prog.add_variable(0.0, lp::kInfinity, 0.0, fmt::format("P{}", node.id));
    }
  }
  for (const auto& l : grid.lines()) {
    if (!snap.alive[l.id]) continue;
    out.flow[l.id] = prog.add_variable(-lp::kInfinity, lp::kInfinity, 0.0, fmt::format("f{}", l.id));
    out.abs_flow[l.id] = prog.add_variable(0.0, lp::kInfinity, 0.0, fmt::format("F{}", l.id));
  }

  // conservation: out-flow - in-flow = P_i - (D_i - s_i)
  for (const auto& node : grid.nodes()) {
    std::vector<Term> terms;
    for (auto id : grid.incident(node.id)) {
      if (!snap.alive[id]) continue;
      const auto& l = grid.line(id);
      if (l.from == l.to) continue;
      terms.push_back({out.flow[id], l.from == node.id ? 1.0 : -1.0});
    }
    if (out.generation[node.id] != ControlLp::npos) terms.push_back({out.generation[node.id], -1.0});
    if (out.shed[node.id] != ControlLp::npos) terms.push_back({out.shed[node.id], -1.0});
    prog.add_constraint(std::move(terms), Sense::equal, -snap.demand[node.id] * (node.role.kind == NodeKind::demand),
                        fmt::format("conserve{}", node.id));
  }
  for (const auto& l : grid.lines()) {
    if (!snap.alive[l.id]) continue;
    const auto f = out.flow[l.id], F = out.abs_flow[l.id];
    prog.add_constraint({{out.phase[l.from], 1.0}, {out.phase[l.to], -1.0}, {f, -l.reactance}}, Sense::equal, 0.0,
                        fmt::format("ohm{}", l.id));
    prog.add_constraint({{F, 1.0}, {f, -1.0}}, Sense::greater_equal, 0.0, fmt::format("absp{}", l.id));
    prog.add_constraint({{F, 1.0}, {f, 1.0}}, Sense::greater_equal, 0.0, fmt::format("absn{}", l.id));
    prog.add_constraint({{F, alpha}}, Sense::less_equal,
                        (1.0 - epsilon) * capacity[l.id] - (1.0 - alpha) * snap.moving_average[l.id],
                        fmt::format("cap{}", l.id));
  }
  for (const auto& node : grid.nodes()) {
    if (out.generation[node.id] == ControlLp::npos) continue;
    const double p = snap.supply[node.id];
    prog.add_constraint({{out.generation[node.id], 1.0}, {out.lambda[comp.component_of[node.id]], p}}, Sense::equal,
                        p, fmt::format("ramp{}", node.id));
  }
  std::vector<std::vector<Term>> balance(comp.count);
  std::vector<double> balance_rhs(comp.count, 0.0);
  for (const auto& node : grid.nodes()) {
    const auto c = comp.component_of[node.id];
    if (out.generation[node.id] != ControlLp::npos) balance[c].push_back({out.generation[node.id], 1.0});
    if (out.shed[node.id] != ControlLp::npos) {
      balance[c].push_back({out.shed[node.id], 1.0});
      balance_rhs[c] += snap.demand[node.id];
    }
  }
  for (std::size_t c = 0; c < comp.count; ++c) {
    prog.add_constraint(std::move(balance[c]), Sense::equal, balance_rhs[c], fmt::format("balance{}", c));
  }
  return out;
}

ControlSolution solve_lp(const ControlLp& model, const ControlSnapshot& snap, const lp::Solver* solver) {
  lp::DenseSimplex fallback;
  const lp::Solver& backend = solver ? *solver : fallback;
  const auto raw = backend.solve(model.program);

  ControlSolution sol;
  sol.status = raw.status;
  if (!sol.optimal()) return sol;
  sol.dual_infeasibility = raw.dual_infeasibility;
  sol.max_violation = model.program.max_violation(raw.x);

  auto value = [&](std::size_t index) { return index == ControlLp::npos ? 0.0 : raw.x[index]; };
  const auto n = model.shed.size();
  sol.shed.assign(n, 0.0);
  sol.phase.assign(n, 0.0);
  sol.generation.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sol.shed[i] = std::clamp(value(model.shed[i]), 0.0, snap.demand[i]);
    sol.phase[i] = value(model.phase[i]);
    sol.generation[i] = std::max(0.0, value(model.generation[i]));
  }
  sol.flow.assign(model.flow.size(), 0.0);
  for (std::size_t k = 0; k < model.flow.size(); ++k) sol.flow[k] = value(model.flow[k]);
  sol.lambda.assign(model.lambda.size(), 0.0);
  for (std::size_t c = 0; c < model.lambda.size(); ++c) sol.lambda[c] = std::clamp(value(model.lambda[c]), 0.0, 1.0);
  sol.objective = std::accumulate(sol.shed.begin(), sol.shed.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (model.shed[i] != ControlLp::npos) sol.served_demand += snap.demand[i] - sol.shed[i];
  }
  return sol;
}

CascadeState apply_control(const CascadeState& state, const ControlSolution& solution) {
  CascadeState out = state;
  for (std::size_t i = 0; i < out.demand.size(); ++i) {
    out.demand[i] = std::max(0.0, out.demand[i] - solution.shed[i]);
    if (out.supply[i] > 0.0) out.supply[i] = solution.generation[i];
  }
  out.stable = false;
  return out;
}

const char* to_string(ControlOutcome outcome) {
  switch (outcome) {
    case ControlOutcome::stabilized:
      return "stabilized";
    case ControlOutcome::unstable:
      return "unstable";
    case ControlOutcome::infeasible:
      return "infeasible";
    case ControlOutcome::out_of_range:
      return "out_of_range";
    case ControlOutcome::error:
      return "error";
  }
  return "unknown";
}

ControlRow control_at(const Grid& grid, const LineSet& initial_failure, const CascadeConfig& config,
                      std::size_t round, const ControlOptions& options) {
  ControlRow row;
  row.round = round;
  try {
    auto [state, event] = initial_state(grid, initial_failure, config);
    Rng rng(config.seed);
    std::optional<FlowSolver> solver;
    for (std::size_t t = 1; t < round; ++t) {
      if (state.stable) break;
      step(grid, state, config, rng, solver);
    }
    if (round >= 2 && (state.stable || state.round + 1 != round)) {
      row.outcome = ControlOutcome::out_of_range;
      row.message = fmt::format("cascade stabilizes before round {}", round);
      return row;
    }

    const auto snap = make_snapshot(grid, state);
    const auto model = build_lp(snap, grid, config.alpha, options.epsilon.value_or(config.epsilon));
    const auto solution = solve_lp(model, snap);
    if (!solution.optimal()) {
      row.outcome = ControlOutcome::infeasible;
      row.message = lp::to_string(solution.status);
      return row;
    }
    const double original = grid.total_demand();
    row.shed = solution.objective;
    row.yield = original > 0.0 ? std::clamp(solution.served_demand / original, 0.0, 1.0) : 1.0;

    auto controlled = apply_control(state, solution);
    const auto check = step(grid, controlled, config, rng);
    if (check.faulted.empty()) {
      row.outcome = ControlOutcome::stabilized;
    } else {
      row.outcome = ControlOutcome::unstable;
      row.message = fmt::format("{} lines still fault", check.faulted.size());
    }
  } catch (const std::exception& e) {
    row.outcome = ControlOutcome::error;
    row.message = e.what();
  }
  return row;
}

std::vector<ControlRow> control_sweep(const Grid& grid, const LineSet& initial_failure,
                                      const CascadeConfig& config, const std::vector<std::size_t>& rounds,
                                      const ControlOptions& options) {
  config.validate();
  std::vector<ControlRow> rows(rounds.size());
  parallel_for(rounds.size(), options.jobs,
               [&](std::size_t i) { rows[i] = control_at(grid, initial_failure, config, rounds[i], options); });
  return rows;
}

}  // namespace gridcascade
