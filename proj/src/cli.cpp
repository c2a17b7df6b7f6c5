#include "gridcascade/cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gridcascade/control.hpp"
#include "gridcascade/fixtures.hpp"
#include "gridcascade/format.hpp"
#include "gridcascade/parallel.hpp"
#include "gridcascade/report_io.hpp"

namespace gridcascade::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& text, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument(fmt::format("bad {} '{}'", what, text));
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_value<T>(item, what));
  return out;
}

}  // namespace

FailureSpec parse_failure(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument(fmt::format("failure '{}' must be lines:..., geo:x,y,r or sweep:r", text));
  }
  const auto kind = trim(text.substr(0, colon));
  const auto body = text.substr(colon + 1);
  FailureSpec spec;
  if (kind == "lines") {
    spec.kind = FailureSpec::Kind::lines;
    spec.lines = parse_list<LineId>(body, "line id");
    std::sort(spec.lines.begin(), spec.lines.end());
    spec.lines.erase(std::unique(spec.lines.begin(), spec.lines.end()), spec.lines.end());
  } else if (kind == "geo") {
    const auto v = parse_list<double>(body, "coordinate");
    if (v.size() != 3) throw std::invalid_argument(fmt::format("geo failure needs x,y,r, got '{}'", body));
    spec.kind = FailureSpec::Kind::geo;
    spec.event = {{v[0], v[1]}, v[2]};
  } else if (kind == "sweep") {
    spec.kind = FailureSpec::Kind::sweep;
    spec.event.radius = parse_value<double>(trim(body), "radius");
  } else {
    throw std::invalid_argument(fmt::format("unknown failure kind '{}'", kind));
  }
  if (spec.kind != FailureSpec::Kind::lines && !(spec.event.radius > 0.0)) {
    throw std::invalid_argument("failure radius must be positive");
  }
  return spec;
}

Scenario parse_scenario(const std::string& text, const std::string& source, const fs::path& base) {
  Scenario sc;
  std::string provision_mode;
  double fos = 1.0;
  std::map<LineId, double> overrides;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, number, fmt::format("expected key = value, got '{}'", line));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(source, number, fmt::format("duplicate key '{}'", key));
    try {
      if (key == "grid") {
        sc.grid = base / value;
      } else if (key == "provision") {
        if (value != "none" && value != "n" && value != "n-1") {
          throw std::invalid_argument(fmt::format("provision must be none, n or n-1, got '{}'", value));
        }
        provision_mode = value;
      } else if (key == "fos") {
        fos = parse_value<double>(value, "factor of safety");
      } else if (key == "fos_override") {
        for (const auto& item : split(value, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw std::invalid_argument(fmt::format("override '{}' is not line:K", item));
          overrides[parse_value<LineId>(trim(item.substr(0, colon)), "line id")] =
              parse_value<double>(trim(item.substr(colon + 1)), "factor of safety");
        }
      } else if (key == "failure") {
        sc.failure = parse_failure(value);
      } else if (key == "alpha") {
        sc.cascade.alpha = parse_value<double>(value, "alpha");
      } else if (key == "epsilon") {
        sc.cascade.epsilon = parse_value<double>(value, "epsilon");
      } else if (key == "p") {
        sc.cascade.p = parse_value<double>(value, "p");
      } else if (key == "seed") {
        sc.cascade.seed = parse_value<std::uint64_t>(value, "seed");
      } else if (key == "max_rounds") {
        sc.cascade.max_rounds = parse_value<std::size_t>(value, "max_rounds");
      } else if (key == "control_epsilon") {
        sc.control_epsilon = parse_value<double>(value, "control_epsilon");
      } else if (key == "sections") {
        sc.sections = parse_value<std::size_t>(value, "sections");
      } else if (key == "runs") {
        sc.runs = parse_value<std::size_t>(value, "runs");
      } else if (key == "rounds") {
        sc.rounds = parse_list<std::size_t>(value, "round");
      } else if (key == "alphas") {
        sc.alphas = parse_list<double>(value, "alpha");
      } else if (key == "output") {
        sc.output = base / value;
      } else {
        throw std::invalid_argument(fmt::format("unknown key '{}'", key));
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, number, e.what());
    }
  }
  if (!provision_mode.empty() && provision_mode != "none") {
    ProvisioningSpec spec;
    spec.k = provision_mode == "n-1" ? 1 : 0;
    spec.fos = fos;
    spec.overrides = std::move(overrides);
    sc.provisioning = std::move(spec);
  }
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  return parse_scenario(read_text(path), path.string(), path.parent_path());
}

Grid prepare_grid(const Scenario& scenario, std::size_t jobs) {
  if (scenario.grid.empty()) throw std::invalid_argument("scenario names no grid");
  auto grid = load_grid(scenario.grid, {.require_balanced = true});
  if (scenario.provisioning) {
    scenario.provisioning->validate();
    const auto result = provision(grid, *scenario.provisioning, jobs);
    for (auto id : result.islanding_contingencies) {
      spdlog::info("contingency of line {} islands the grid; shed before solving", id);
    }
    grid = grid.with_capacities(result.capacities);
  }
  if (!grid.has_capacities()) {
    throw std::invalid_argument(fmt::format("grid {} lacks capacities and no provisioning was requested",
                                            scenario.grid.string()));
  }
  return grid;
}

namespace {

struct Overrides {
  std::optional<std::string> grid;
  std::optional<std::string> failure;
  std::optional<std::string> provision;
  std::optional<double> fos;
  std::optional<double> radius;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_rounds;
  std::optional<std::size_t> sections;
  std::optional<std::size_t> runs;
  std::optional<double> control_epsilon;
  std::optional<std::string> rounds;
  std::optional<std::string> alphas;
  std::optional<std::string> output;
  std::string scenario_path;
  std::size_t jobs = 0;
};

void add_scenario_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("scenario", o.scenario_path, "Scenario file (key = value)");
  cmd->add_option("--grid", o.grid, "Grid file, overrides the scenario");
  cmd->add_option("--failure", o.failure, "lines:1,2 | geo:x,y,r | sweep:r");
  cmd->add_option("--provision", o.provision, "none | n | n-1");
  cmd->add_option("--fos", o.fos, "Factor of safety K");
  cmd->add_option("--alpha", o.alpha, "Moving-average weight in (0, 1]");
  cmd->add_option("--epsilon", o.epsilon, "Outage band half-width in [0, 1)");
  cmd->add_option("--p", o.p, "Fault probability inside the band");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--max-rounds", o.max_rounds, "Round cap");
  cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("-o,--output", o.output, "Output directory");
}

Scenario resolve(const Overrides& o) {
  Scenario sc = o.scenario_path.empty() ? Scenario{} : load_scenario(o.scenario_path);
  if (o.grid) sc.grid = *o.grid;
  if (o.failure) sc.failure = parse_failure(*o.failure);
  if (o.radius) {
    FailureSpec spec;
    spec.kind = FailureSpec::Kind::sweep;
    spec.event.radius = *o.radius;
    sc.failure = spec;
  }
  if (o.provision) {
    if (*o.provision == "none") {
      sc.provisioning.reset();
    } else if (*o.provision == "n" || *o.provision == "n-1") {
      if (!sc.provisioning) sc.provisioning = ProvisioningSpec{};
      sc.provisioning->k = *o.provision == "n-1" ? 1 : 0;
    } else {
      throw std::invalid_argument(fmt::format("--provision must be none, n or n-1, got '{}'", *o.provision));
    }
  }
  if (o.fos) {
    if (!sc.provisioning) throw std::invalid_argument("--fos needs --provision or a provision key");
    sc.provisioning->fos = *o.fos;
  }
  if (o.alpha) sc.cascade.alpha = *o.alpha;
  if (o.epsilon) sc.cascade.epsilon = *o.epsilon;
  if (o.p) sc.cascade.p = *o.p;
  if (o.seed) sc.cascade.seed = *o.seed;
  if (o.max_rounds) sc.cascade.max_rounds = *o.max_rounds;
  if (o.sections) sc.sections = *o.sections;
  if (o.runs) sc.runs = *o.runs;
  if (o.control_epsilon) sc.control_epsilon = *o.control_epsilon;
  if (o.rounds) sc.rounds = parse_list<std::size_t>(*o.rounds, "round");
  if (o.alphas) sc.alphas = parse_list<double>(*o.alphas, "alpha");
  if (o.output) sc.output = *o.output;
  sc.cascade.validate();
  return sc;
}

LineSet initial_failure(const Scenario& sc, const Grid& grid) {
  if (!sc.failure) throw std::invalid_argument("scenario has no failure");
  switch (sc.failure->kind) {
    case FailureSpec::Kind::lines:
      return sc.failure->lines;
    case FailureSpec::Kind::geo:
      return affected_lines(grid, sc.failure->event);
    case FailureSpec::Kind::sweep:
      break;
  }
  throw std::invalid_argument("this command needs a lines: or geo: failure, not sweep:");
}

int cmd_run(const Overrides& o) {
  const auto sc = resolve(o);
  const auto grid = prepare_grid(sc, o.jobs);
  const auto failure = initial_failure(sc, grid);
  spdlog::info("running cascade from {} failed lines", failure.size());
  const auto report = run_cascade(grid, failure, sc.cascade);
  write_text(sc.output / "cascade.csv", cascade_csv(report));
  write_text(sc.output / "summary.json", cascade_summary_json(report));
  fmt::print("yield {} after {} rounds{}\n", format_number(report.yield), report.rounds,
             report.hit_max_rounds ? " (max_rounds reached)" : "");
  return report.hit_max_rounds ? 2 : 0;
}

using Json = nlohmann::ordered_json;

Json config_json(const CascadeConfig& c) {
  return {{"alpha", c.alpha}, {"epsilon", c.epsilon}, {"p", c.p}, {"seed", c.seed}, {"max_rounds", c.max_rounds}};
}

int cmd_sweep(const Overrides& o) {
  const auto sc = resolve(o);
  if (!sc.failure || sc.failure->kind != FailureSpec::Kind::sweep) {
    throw std::invalid_argument("sweep needs failure = sweep:r or --radius");
  }
  const auto grid = prepare_grid(sc, o.jobs);
  const auto dir = sc.output / "candidates";
  const auto config = config_json(sc.cascade);
  auto file_of = [&](std::size_t i) { return dir / fmt::format("{:06}.json", i); };

  SweepOptions options;
  options.jobs = o.jobs;
  options.candidate_options.sections_per_axis = sc.sections;
  options.candidate_options.jobs = o.jobs;
  std::atomic<std::size_t> resumed{0}, done{0};
  options.lookup = [&](std::size_t i, const Candidate& c) -> std::optional<CascadeReport> {
    const auto path = file_of(i);
    if (!fs::exists(path)) return std::nullopt;
    try {
      const auto j = Json::parse(read_text(path));
      if (j.at("lines").get<LineSet>() != c.affected || j.at("config") != config) return std::nullopt;
      ++resumed;
      return parse_cascade_report_json(j.at("report").dump());
    } catch (const std::exception& e) {
      spdlog::warn("ignoring unreadable result {}: {}", path.string(), e.what());
      return std::nullopt;
    }
  };
  options.store = [&](std::size_t i, const Candidate& c, const CascadeReport& r) {
    Json j;
    j["x"] = c.point.x;
    j["y"] = c.point.y;
    j["lines"] = c.affected;
    j["config"] = config;
    j["report"] = Json::parse(cascade_report_json(r));
    write_text(file_of(i), j.dump(2) + "\n");
    const auto n = ++done;
    if (n % 100 == 0) spdlog::info("{} candidates simulated", n);
  };
  const auto result = sweep(grid, sc.failure->event.radius, sc.cascade, options);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    if (!result.entries[i].report) {
      ++failed;
      spdlog::error("candidate {} failed: {}", i, result.entries[i].error);
    }
  }
  write_text(sc.output / "sweep.csv", sweep_csv(result));
  write_text(sc.output / "sweep.geojson", sweep_geojson(result));
  fmt::print("{} candidates ({} resumed, {} failed)\n", result.entries.size(), resumed.load(), failed);
  return 0;
}

int cmd_mc(const Overrides& o) {
  const auto sc = resolve(o);
  const auto grid = prepare_grid(sc, o.jobs);
  const auto result = monte_carlo(grid, initial_failure(sc, grid), sc.cascade, sc.runs, o.jobs);
  write_text(sc.output / "mc.csv", monte_carlo_csv(result));
  write_text(sc.output / "mc.json", monte_carlo_json(result));
  fmt::print("mean yield {} (stddev {}) over {} runs\n", format_number(result.mean_yield),
             format_number(result.stddev_yield), sc.runs);
  return 0;
}

int cmd_alpha_sweep(const Overrides& o) {
  const auto sc = resolve(o);
  const auto grid = prepare_grid(sc, o.jobs);
  const auto failure = initial_failure(sc, grid);
  std::vector<AlphaTrace> traces(sc.alphas.size());
  parallel_for(traces.size(), o.jobs, [&](std::size_t i) {
    auto cfg = sc.cascade;
    cfg.alpha = sc.alphas[i];
    traces[i] = {cfg.alpha, run_cascade(grid, failure, cfg)};
  });
  write_text(sc.output / "alpha_sweep.csv", alpha_sweep_csv(traces));
  write_text(sc.output / "alpha_summary.csv", alpha_summary_csv(traces));
  for (const auto& t : traces) {
    fmt::print("alpha {}: {} rounds, yield {}\n", format_number(t.alpha), t.report.rounds,
               format_number(t.report.yield));
  }
  return 0;
}

int cmd_control_sweep(const Overrides& o) {
  const auto sc = resolve(o);
  if (sc.rounds.empty()) throw std::invalid_argument("control-sweep needs --rounds or a rounds key");
  const auto grid = prepare_grid(sc, o.jobs);
  ControlOptions options;
  options.epsilon = sc.control_epsilon;
  options.jobs = o.jobs;
  const auto rows = control_sweep(grid, initial_failure(sc, grid), sc.cascade, sc.rounds, options);
  for (const auto& r : rows) {
    if (!r.message.empty()) spdlog::warn("round {}: {} ({})", r.round, to_string(r.outcome), r.message);
  }
  write_text(sc.output / "control.csv", control_csv(rows));
  fmt::print("{}", control_csv(rows));
  return 0;
}

struct GenOptions {
  std::string family;
  std::size_t M = 4;
  std::size_t m = 4;
  bool no_ties = false;
  std::optional<double> capacity;
  std::string output;
};

int cmd_gen(const GenOptions& g) {
  Grid grid;
  if (g.family == "mring") {
    if (g.M < 2) throw std::invalid_argument("--M must be at least 2");
    fixtures::MRingOptions opt;
    opt.with_ties = !g.no_ties;
    opt.capacity = g.capacity;
    grid = fixtures::make_mring(g.M, opt);
  } else if (g.family == "qgraph") {
    if (g.m < 3) throw std::invalid_argument("--m must be at least 3");
    fixtures::QGraphOptions opt;
    if (g.capacity) opt.capacity = *g.capacity;
    grid = fixtures::make_qgraph(g.m, opt);
  } else {
    throw std::invalid_argument(fmt::format("unknown family '{}'", g.family));
  }
  if (g.output.empty()) {
    fmt::print("{}", serialize_grid(grid));
  } else {
    write_text(g.output, serialize_grid(grid));
  }
  return 0;
}

struct ProvisionOptions {
  std::string grid;
  std::string mode = "n-1";
  double fos = 1.0;
  std::string overrides;
  std::string output;
  std::size_t jobs = 0;
};

int cmd_provision(const ProvisionOptions& p) {
  const auto grid = load_grid(p.grid, {.require_balanced = true});
  ProvisioningSpec spec;
  if (p.mode != "n" && p.mode != "n-1") throw std::invalid_argument("--provision must be n or n-1");
  spec.k = p.mode == "n-1" ? 1 : 0;
  spec.fos = p.fos;
  for (const auto& item : split(p.overrides, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument(fmt::format("override '{}' is not line:K", item));
    spec.overrides[parse_value<LineId>(trim(item.substr(0, colon)), "line id")] =
        parse_value<double>(trim(item.substr(colon + 1)), "factor of safety");
  }
  const auto result = provision(grid, spec, p.jobs);
  for (auto id : result.islanding_contingencies) spdlog::warn("contingency of line {} islands the grid", id);
  const auto text = serialize_grid(grid.with_capacities(result.capacities));
  if (p.output.empty()) {
    fmt::print("{}", text);
  } else {
    write_text(p.output, text);
  }
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("gridcascade");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("GRIDCASCADE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      spdlog::warn("unknown GRIDCASCADE_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (!spdlog::get("gridcascade")) configure_logging();

  CLI::App app{"Cascading line-failure simulator for DC power grids"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a fixture grid");
  gen_cmd->add_option("family", gen.family, "mring | qgraph")->required();
  gen_cmd->add_option("--M", gen.M, "Areas of the M-ring");
  gen_cmd->add_option("--m", gen.m, "Paths of the Q graph");
  gen_cmd->add_flag("--no-ties", gen.no_ties, "M-ring without tie lines");
  gen_cmd->add_option("--u", gen.capacity, "Uniform capacity");
  gen_cmd->add_option("-o,--output", gen.output, "Output file (default stdout)");

  ProvisionOptions prov;
  auto* prov_cmd = app.add_subcommand("provision", "Assign capacities from contingency flows");
  prov_cmd->add_option("grid", prov.grid, "Grid file")->required();
  prov_cmd->add_option("--provision", prov.mode, "n | n-1");
  prov_cmd->add_option("--fos", prov.fos, "Factor of safety K");
  prov_cmd->add_option("--fos-override", prov.overrides, "Per-line K as line:K,...");
  prov_cmd->add_option("--jobs", prov.jobs, "Worker threads (0 = all cores)");
  prov_cmd->add_option("-o,--output", prov.output, "Output file (default stdout)");

  Overrides run_o, sweep_o, mc_o, alpha_o, control_o;
  auto* run_cmd = app.add_subcommand("run", "Simulate one cascade");
  add_scenario_options(run_cmd, run_o);
  auto* sweep_cmd = app.add_subcommand("sweep", "Simulate every distinct geographic failure of radius r");
  add_scenario_options(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--radius", sweep_o.radius, "Failure radius");
  sweep_cmd->add_option("--sections", sweep_o.sections, "Tiles per axis for candidate generation");
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo over seeds");
  add_scenario_options(mc_cmd, mc_o);
  mc_cmd->add_option("--runs", mc_o.runs, "Number of runs");
  auto* alpha_cmd = app.add_subcommand("alpha-sweep", "Max overload by round for several alphas");
  add_scenario_options(alpha_cmd, alpha_o);
  alpha_cmd->add_option("--alphas", alpha_o.alphas, "Comma-separated alphas");
  auto* control_cmd = app.add_subcommand("control-sweep", "Optimal shedding control at chosen rounds");
  add_scenario_options(control_cmd, control_o);
  control_cmd->add_option("--rounds", control_o.rounds, "Comma-separated rounds");
  control_cmd->add_option("--control-epsilon", control_o.control_epsilon, "Safety margin of the control LP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*prov_cmd) return cmd_provision(prov);
    if (*run_cmd) return cmd_run(run_o);
    if (*sweep_cmd) return cmd_sweep(sweep_o);
    if (*mc_cmd) return cmd_mc(mc_o);
    if (*alpha_cmd) return cmd_alpha_sweep(alpha_o);
    if (*control_cmd) return cmd_control_sweep(control_o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

}  // namespace gridcascade::cli
