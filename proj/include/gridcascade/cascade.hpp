#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gridcascade/dcflow.hpp"
#include "gridcascade/grid.hpp"

namespace gridcascade {

struct CascadeConfig {
  /// Moving-average weight of the fresh flow, in (0, 1].
  double alpha = 1.0;
  /// Half-width of the probabilistic band around the capacity, in [0, 1).
  double epsilon = 0.0;
  /// Fault probability inside the band.
  double p = 0.0;
  std::uint64_t seed = 0;
  std::size_t max_rounds = 1000;
  /// Slack on capacity comparisons, relative to max(1, u). Absorbs round-off
  /// when a flow lands exactly on its capacity.
  double compare_tolerance = 1e-9;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

class CascadeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the pre-failure flows already exceed some capacity.
class InfeasibleGridError : public CascadeError {
 public:
  using CascadeError::CascadeError;
};

/// Seedable 64-bit generator with a platform-independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for sub-run `index` (splitmix64 of seed+index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

enum class OutageBand { hold, uncertain, fault };

/// Classifies a moving average against its capacity: fault above (1+eps)u,
/// hold at or below (1-eps)u, uncertain in between.
OutageBand outage_band(double moving_average, double capacity, const CascadeConfig& config);

/// Fault decision for one line; draws from rng only inside the uncertain band.
bool outage_decision(double moving_average, double capacity, const CascadeConfig& config, Rng& rng);

struct ShedResult {
  std::vector<double> demand;
  std::vector<double> supply;
  Components components;
  /// Factor applied to the demands / supplies of each component.
  std::vector<double> demand_scale;
  std::vector<double> supply_scale;
};

/// Scales demand (or supply) uniformly inside every component of the alive
/// subgraph so that supply equals demand in each.
ShedResult shed(const Grid& grid, const LineMask& alive, std::span<const double> demand,
                std::span<const double> supply);

struct CascadeState {
  LineMask alive;
  std::vector<double> demand;
  std::vector<double> supply;
  FlowSolution flow;
  /// Moving average per line; meaningful only where alive.
  std::vector<double> moving_average;
  std::size_t round = 0;
  bool stable = false;
};

struct RoundRecord {
  std::size_t round = 0;
  LineSet faulted;
  std::size_t components = 0;
  /// max |f|/u over alive lines with u > 0.
  double max_overload = 0.0;
  /// max f~/u over alive lines with u > 0.
  double max_average_overload = 0.0;
  double served_demand = 0.0;
};

/// Pre-failure solve, feasibility check and removal of the initial failure.
/// The moving average starts at the pre-failure |f|. Returns the state and
/// the record for round 0 (the failure event itself).
std::pair<CascadeState, RoundRecord> initial_state(const Grid& grid, const LineSet& initial_failure,
                                                   const CascadeConfig& config);

/// One round: shed, solve, update moving averages, apply the outage rule.
/// All faulting lines are removed together. `solver` is reused when its
/// topology matches the state's and rebuilt otherwise.
RoundRecord step(const Grid& grid, CascadeState& state, const CascadeConfig& config, Rng& rng,
                 std::optional<FlowSolver>& solver);
RoundRecord step(const Grid& grid, CascadeState& state, const CascadeConfig& config, Rng& rng);

struct CascadeReport {
  double yield = 1.0;
  std::size_t rounds = 0;
  bool hit_max_rounds = false;
  double original_demand = 0.0;
  /// Entry 0 is the failure event; entry t the t-th round.
  std::vector<RoundRecord> history;
  std::vector<double> final_demand;
  LineMask final_alive;

  std::vector<LineSet> faulted_lines_by_round() const;
  std::vector<std::size_t> component_count_by_round() const;
  std::vector<double> max_overload_by_round() const;
  std::size_t total_faulted() const;
};

/// Runs the cascade until a round removes nothing or max_rounds is reached.
CascadeReport run_cascade(const Grid& grid, const LineSet& initial_failure,
                          const CascadeConfig& config);

struct MonteCarloResult {
  double mean_yield = 0.0;
  double stddev_yield = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<CascadeReport> reports;
};

/// Independent runs with seeds derive_seed(config.seed, i).
MonteCarloResult monte_carlo(const Grid& grid, const LineSet& initial_failure,
                             const CascadeConfig& config, std::size_t runs, std::size_t jobs = 0);

}  // namespace gridcascade
