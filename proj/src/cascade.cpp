#include "gridcascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "gridcascade/parallel.hpp"

namespace gridcascade {

namespace {

// Components whose supply and demand agree this closely are left untouched.
constexpr double kShedTolerance = 1e-12;

double slack(double capacity, const CascadeConfig& config) {
  return config.compare_tolerance * std::max(1.0, capacity);
}

void fill_overloads(const Grid& grid, const CascadeState& state, std::span<const double> capacity,
                    RoundRecord& record) {
  record.max_overload = 0.0;
  record.max_average_overload = 0.0;
  for (const auto& l : grid.lines()) {
    if (!state.alive[l.id] || !(capacity[l.id] > 0.0)) continue;
    record.max_overload = std::max(record.max_overload, std::abs(state.flow.flow[l.id]) / capacity[l.id]);
    record.max_average_overload =
        std::max(record.max_average_overload, state.moving_average[l.id] / capacity[l.id]);
  }
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

void CascadeConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument(fmt::format("alpha must be in (0, 1], got {}", alpha));
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument(fmt::format("epsilon must be in [0, 1), got {}", epsilon));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("p must be in [0, 1], got {}", p));
  }
  if (max_rounds == 0) throw std::invalid_argument("max_rounds must be positive");
  if (!(compare_tolerance >= 0.0)) throw std::invalid_argument("compare_tolerance must be >= 0");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

OutageBand outage_band(double moving_average, double capacity, const CascadeConfig& config) {
  const double tol = slack(capacity, config);
  if (moving_average > (1.0 + config.epsilon) * capacity + tol) return OutageBand::fault;
  if (moving_average <= (1.0 - config.epsilon) * capacity + tol) return OutageBand::hold;
  return OutageBand::uncertain;
}

bool outage_decision(double moving_average, double capacity, const CascadeConfig& config, Rng& rng) {
  switch (outage_band(moving_average, capacity, config)) {
    case OutageBand::fault:
      return true;
    case OutageBand::hold:
      return false;
    case OutageBand::uncertain:
      return rng.bernoulli(config.p);
  }
  return false;
}

ShedResult shed(const Grid& grid, const LineMask& alive, std::span<const double> demand,
                std::span<const double> supply) {
  ShedResult out;
  out.components = connected_components(grid, alive);
  out.demand.assign(demand.begin(), demand.end());
  out.supply.assign(supply.begin(), supply.end());
  const auto n = out.components.count;
  std::vector<double> total_demand(n, 0.0), total_supply(n, 0.0);
  for (NodeId i = 0; i < grid.node_count(); ++i) {
    total_demand[out.components.component_of[i]] += demand[i];
    total_supply[out.components.component_of[i]] += supply[i];
  }
  out.demand_scale.assign(n, 1.0);
  out.supply_scale.assign(n, 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    const double d = total_demand[c];
    const double s = total_supply[c];
    if (std::abs(d - s) <= kShedTolerance * std::max(d, s)) continue;
    if (d > s) {
      out.demand_scale[c] = s / d;
    } else {
      out.supply_scale[c] = d / s;
    }
  }
  for (NodeId i = 0; i < grid.node_count(); ++i) {
    const auto c = out.components.component_of[i];
    out.demand[i] *= out.demand_scale[c];
    out.supply[i] *= out.supply_scale[c];
  }
  return out;
}

std::pair<CascadeState, RoundRecord> initial_state(const Grid& grid, const LineSet& initial_failure,
                                                   const CascadeConfig& config) {
  config.validate();
  const auto capacity = grid.capacities();

  CascadeState state;
  state.demand = grid.demand();
  state.supply = grid.supply();
  state.alive = grid.all_alive();
  state.flow = solve_flow(grid, state.alive, make_injection(state.supply, state.demand));
  for (const auto& l : grid.lines()) {
    const double f = std::abs(state.flow.flow[l.id]);
    if (f > capacity[l.id] + slack(capacity[l.id], config)) {
      throw InfeasibleGridError(fmt::format(
          "pre-failure flow {} on line {} exceeds its capacity {}", f, l.id, capacity[l.id]));
    }
  }
  state.moving_average.resize(grid.line_count());
  for (std::size_t k = 0; k < grid.line_count(); ++k) {
    state.moving_average[k] = std::abs(state.flow.flow[k]);
  }

  RoundRecord event;
  event.round = 0;
  fill_overloads(grid, state, capacity, event);
  event.served_demand = sum(state.demand);

  LineSet failure = initial_failure;
  std::sort(failure.begin(), failure.end());
  failure.erase(std::unique(failure.begin(), failure.end()), failure.end());
  for (auto id : failure) {
    if (id >= grid.line_count()) {
      throw CascadeError(fmt::format("initial failure names missing line {}", id));
    }
    state.alive[id] = false;
    state.moving_average[id] = 0.0;
    state.flow.flow[id] = 0.0;
  }
  event.faulted = failure;
  event.components = connected_components(grid, state.alive).count;
  state.stable = failure.empty();
  return {std::move(state), std::move(event)};
}

RoundRecord step(const Grid& grid, CascadeState& state, const CascadeConfig& config, Rng& rng,
                 std::optional<FlowSolver>& solver) {
  const auto capacity = grid.capacities();

  auto balanced = shed(grid, state.alive, state.demand, state.supply);
  state.demand = std::move(balanced.demand);
  state.supply = std::move(balanced.supply);

  if (!solver || solver->alive() != state.alive) solver.emplace(grid, state.alive);
  state.flow = solver->solve(make_injection(state.supply, state.demand));

  for (const auto& l : grid.lines()) {
    if (!state.alive[l.id]) continue;
    state.moving_average[l.id] =
        config.alpha * std::abs(state.flow.flow[l.id]) + (1.0 - config.alpha) * state.moving_average[l.id];
  }

  RoundRecord record;
  record.round = state.round + 1;
  record.components = balanced.components.count;
  record.served_demand = sum(state.demand);
  fill_overloads(grid, state, capacity, record);

  // ascending LineId keeps the random stream reproducible
  for (const auto& l : grid.lines()) {
    if (!state.alive[l.id]) continue;
    if (outage_decision(state.moving_average[l.id], capacity[l.id], config, rng)) {
      record.faulted.push_back(l.id);
    }
  }
  for (auto id : record.faulted) {
    state.alive[id] = false;
    state.moving_average[id] = 0.0;
  }
  state.round = record.round;
  state.stable = record.faulted.empty();
  return record;
}

RoundRecord step(const Grid& grid, CascadeState& state, const CascadeConfig& config, Rng& rng) {
  std::optional<FlowSolver> solver;
  return step(grid, state, config, rng, solver);
}

std::vector<LineSet> CascadeReport::faulted_lines_by_round() const {
  std::vector<LineSet> out;
  for (const auto& r : history) out.push_back(r.faulted);
  return out;
}

std::vector<std::size_t> CascadeReport::component_count_by_round() const {
  std::vector<std::size_t> out;
  for (const auto& r : history) out.push_back(r.components);
  return out;
}

std::vector<double> CascadeReport::max_overload_by_round() const {
  std::vector<double> out;
  for (const auto& r : history) out.push_back(r.max_overload);
  return out;
}

std::size_t CascadeReport::total_faulted() const {
  std::size_t n = 0;
  for (const auto& r : history) n += r.faulted.size();
  return n;
}

CascadeReport run_cascade(const Grid& grid, const LineSet& initial_failure,
                          const CascadeConfig& config) {
  auto [state, event] = initial_state(grid, initial_failure, config);
  CascadeReport report;
  report.original_demand = grid.total_demand();
  report.history.push_back(std::move(event));

  Rng rng(config.seed);
  std::optional<FlowSolver> solver;
  while (!state.stable) {
    if (state.round >= config.max_rounds) {
      report.hit_max_rounds = true;
      break;
    }
    report.history.push_back(step(grid, state, config, rng, solver));
  }
  report.rounds = state.round;
  report.final_demand = state.demand;
  report.final_alive = state.alive;
  report.yield = report.original_demand > 0.0 ? sum(state.demand) / report.original_demand : 1.0;
  report.yield = std::clamp(report.yield, 0.0, 1.0);
  return report;
}

MonteCarloResult monte_carlo(const Grid& grid, const LineSet& initial_failure,
                             const CascadeConfig& config, std::size_t runs, std::size_t jobs) {
  if (runs == 0) throw std::invalid_argument("monte_carlo needs at least one run");
  config.validate();
  MonteCarloResult out;
  out.seeds.resize(runs);
  out.reports.resize(runs);
  for (std::size_t i = 0; i < runs; ++i) out.seeds[i] = derive_seed(config.seed, i);
  parallel_for(runs, jobs, [&](std::size_t i) {
    auto cfg = config;
    cfg.seed = out.seeds[i];
    out.reports[i] = run_cascade(grid, initial_failure, cfg);
  });
  double mean = 0.0;
  for (const auto& r : out.reports) mean += r.yield;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (const auto& r : out.reports) var += (r.yield - mean) * (r.yield - mean);
  out.mean_yield = mean;
  out.stddev_yield = std::sqrt(var / static_cast<double>(runs));
  return out;
}

}  // namespace gridcascade
