#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridcascade/cascade.hpp"
#include "gridcascade/control.hpp"
#include "gridcascade/geo.hpp"

namespace gridcascade {

/// One row per round: round,lines_faulted,components,max_overload,served_demand.
std::string cascade_csv(const CascadeReport& report);

/// yield, rounds, stable / hit_max_rounds flags and totals.
std::string cascade_summary_json(const CascadeReport& report);

/// Full report, lossless; used for per-candidate sweep results.
std::string cascade_report_json(const CascadeReport& report);
CascadeReport parse_cascade_report_json(const std::string& text);

/// x,y,affected,yield,rounds,faulted,components,status; one row per entry.
std::string sweep_csv(const SweepResult& result);

/// FeatureCollection of candidate points with the CSV columns as properties.
std::string sweep_geojson(const SweepResult& result);

/// run,seed,yield,rounds,faulted.
std::string monte_carlo_csv(const MonteCarloResult& result);
std::string monte_carlo_json(const MonteCarloResult& result);

struct AlphaTrace {
  double alpha = 1.0;
  CascadeReport report;
};

/// round column then one column per alpha holding max f~/u at that round;
/// empty once that cascade has stopped.
std::string alpha_sweep_csv(const std::vector<AlphaTrace>& traces);

/// alpha,rounds,yield per trace.
std::string alpha_summary_csv(const std::vector<AlphaTrace>& traces);

/// Round,Yield,Shed,Outcome.
std::string control_csv(const std::vector<ControlRow>& rows);

/// Writes atomically (temporary file + rename) so partial results never
/// look complete.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gridcascade
