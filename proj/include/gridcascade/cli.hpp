#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridcascade/cascade.hpp"
#include "gridcascade/geo.hpp"
#include "gridcascade/provisioning.hpp"

namespace gridcascade::cli {

struct FailureSpec {
  enum class Kind { lines, geo, sweep };
  Kind kind = Kind::lines;
  LineSet lines;
  GeoEvent event;  // geo: center and radius; sweep: radius only
};

/// Parses "lines:1,2,3", "lines:" (empty), "geo:x,y,r" or "sweep:r".
FailureSpec parse_failure(const std::string& text);

/// Flat key=value scenario. Relative paths resolve against the scenario file.
struct Scenario {
  std::filesystem::path grid;
  std::optional<ProvisioningSpec> provisioning;
  std::optional<FailureSpec> failure;
  CascadeConfig cascade;
  std::optional<double> control_epsilon;
  std::size_t sections = 1;
  std::size_t runs = 100;
  std::vector<std::size_t> rounds;
  std::vector<double> alphas{0.1, 0.3, 0.5, 1.0};
  std::filesystem::path output = "out";
};

/// Keys: grid, provision (none|n|n-1), fos, fos_override (line:K,...),
/// failure, alpha, epsilon, p, seed, max_rounds, control_epsilon, sections,
/// runs, rounds, alphas, output. `#` starts a comment. Throws ParseError.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>",
                        const std::filesystem::path& base = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Loads the grid and applies the scenario's provisioning, if any.
Grid prepare_grid(const Scenario& scenario, std::size_t jobs = 0);

/// Entry point of the gridcascade executable. Returns the process exit code:
/// 0 on success / stable termination, 2 when a run hits max_rounds, 1 on error.
int main(int argc, char** argv);

}  // namespace gridcascade::cli
