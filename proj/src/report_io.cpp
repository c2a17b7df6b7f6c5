#include "gridcascade/report_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "gridcascade/format.hpp"

namespace gridcascade {

using Json = nlohmann::ordered_json;

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::size_t final_components(const CascadeReport& r) {
  return r.history.empty() ? 0 : r.history.back().components;
}

double served(const CascadeReport& r) { return r.yield * r.original_demand; }

}  // namespace

std::string cascade_csv(const CascadeReport& report) {
  std::string out = "round,lines_faulted,components,max_overload,served_demand\n";
  for (const auto& r : report.history) {
    out += fmt::format("{},{},{},{},{}\n", r.round, r.faulted.size(), r.components, format_number(r.max_overload),
                       format_number(r.served_demand));
  }
  return out;
}

std::string cascade_summary_json(const CascadeReport& report) {
  Json j;
  j["yield"] = report.yield;
  j["rounds"] = report.rounds;
  j["stable"] = !report.hit_max_rounds;
  j["hit_max_rounds"] = report.hit_max_rounds;
  j["original_demand"] = report.original_demand;
  j["served_demand"] = served(report);
  j["total_faulted"] = report.total_faulted();
  j["final_components"] = final_components(report);
  return dump(j);
}

std::string cascade_report_json(const CascadeReport& report) {
  Json j;
  j["yield"] = report.yield;
  j["rounds"] = report.rounds;
  j["hit_max_rounds"] = report.hit_max_rounds;
  j["original_demand"] = report.original_demand;
  j["history"] = Json::array();
  for (const auto& r : report.history) {
    j["history"].push_back({{"round", r.round},
                            {"faulted", r.faulted},
                            {"components", r.components},
                            {"max_overload", r.max_overload},
                            {"max_average_overload", r.max_average_overload},
                            {"served_demand", r.served_demand}});
  }
  j["final_demand"] = report.final_demand;
  std::vector<int> alive(report.final_alive.begin(), report.final_alive.end());
  j["final_alive"] = alive;
  return dump(j);
}

CascadeReport parse_cascade_report_json(const std::string& text) {
  const auto j = Json::parse(text);
  CascadeReport report;
  report.yield = j.at("yield").get<double>();
  report.rounds = j.at("rounds").get<std::size_t>();
  report.hit_max_rounds = j.at("hit_max_rounds").get<bool>();
  report.original_demand = j.at("original_demand").get<double>();
  for (const auto& h : j.at("history")) {
    RoundRecord r;
    r.round = h.at("round").get<std::size_t>();
    r.faulted = h.at("faulted").get<LineSet>();
    r.components = h.at("components").get<std::size_t>();
    r.max_overload = h.at("max_overload").get<double>();
    r.max_average_overload = h.at("max_average_overload").get<double>();
    r.served_demand = h.at("served_demand").get<double>();
    report.history.push_back(std::move(r));
  }
  report.final_demand = j.at("final_demand").get<std::vector<double>>();
  for (int a : j.at("final_alive").get<std::vector<int>>()) report.final_alive.push_back(a != 0);
  return report;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "x,y,affected,yield,rounds,faulted,components,status\n";
  for (const auto& e : result.entries) {
    const auto& c = e.candidate;
    if (e.report) {
      const auto& r = *e.report;
      out += fmt::format("{},{},{},{},{},{},{},{}\n", format_number(c.point.x), format_number(c.point.y),
                         c.affected.size(), format_number(r.yield), r.rounds, r.total_faulted(),
                         final_components(r), r.hit_max_rounds ? "max_rounds" : "stable");
    } else {
      out += fmt::format("{},{},{},,,,,error\n", format_number(c.point.x), format_number(c.point.y),
                         c.affected.size());
    }
  }
  return out;
}

std::string sweep_geojson(const SweepResult& result) {
  Json fc;
  fc["type"] = "FeatureCollection";
  fc["radius"] = result.radius;
  fc["features"] = Json::array();
  for (const auto& e : result.entries) {
    Json props;
    props["affected"] = e.candidate.affected.size();
    props["lines"] = e.candidate.affected;
    if (e.report) {
      props["yield"] = e.report->yield;
      props["rounds"] = e.report->rounds;
      props["faulted"] = e.report->total_faulted();
      props["components"] = final_components(*e.report);
      props["status"] = e.report->hit_max_rounds ? "max_rounds" : "stable";
    } else {
      props["status"] = "error";
      props["error"] = e.error;
    }
    fc["features"].push_back({{"type", "Feature"},
                              {"geometry", {{"type", "Point"}, {"coordinates", {e.candidate.point.x, e.candidate.point.y}}}},
                              {"properties", std::move(props)}});
  }
  return dump(fc);
}

std::string monte_carlo_csv(const MonteCarloResult& result) {
  std::string out = "run,seed,yield,rounds,faulted\n";
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    out += fmt::format("{},{},{},{},{}\n", i, result.seeds[i], format_number(r.yield), r.rounds, r.total_faulted());
  }
  return out;
}

std::string monte_carlo_json(const MonteCarloResult& result) {
  Json j;
  j["runs"] = result.reports.size();
  j["mean_yield"] = result.mean_yield;
  j["stddev_yield"] = result.stddev_yield;
  std::size_t capped = 0;
  for (const auto& r : result.reports) capped += r.hit_max_rounds;
  j["hit_max_rounds"] = capped;
  return dump(j);
}

std::string alpha_sweep_csv(const std::vector<AlphaTrace>& traces) {
  std::string out = "round";
  std::size_t longest = 0;
  for (const auto& t : traces) {
    out += ",alpha=" + format_number(t.alpha);
    longest = std::max(longest, t.report.history.size());
  }
  out += "\n";
  for (std::size_t round = 0; round < longest; ++round) {
    out += std::to_string(round);
    for (const auto& t : traces) {
      out += ",";
      if (round < t.report.history.size()) out += format_number(t.report.history[round].max_average_overload);
    }
    out += "\n";
  }
  return out;
}

std::string alpha_summary_csv(const std::vector<AlphaTrace>& traces) {
  std::string out = "alpha,rounds,yield,hit_max_rounds\n";
  for (const auto& t : traces) {
    out += fmt::format("{},{},{},{}\n", format_number(t.alpha), t.report.rounds, format_number(t.report.yield),
                       t.report.hit_max_rounds ? 1 : 0);
  }
  return out;
}

std::string control_csv(const std::vector<ControlRow>& rows) {
  std::string out = "Round,Yield,Shed,Outcome\n";
  for (const auto& r : rows) {
    const bool solved = r.outcome == ControlOutcome::stabilized || r.outcome == ControlOutcome::unstable;
    out += fmt::format("{},{},{},{}\n", r.round, solved ? format_number(r.yield) : "",
                       solved ? format_number(r.shed) : "", to_string(r.outcome));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << text;
    if (!out) throw std::runtime_error(fmt::format("error writing {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gridcascade
