#include "gridcascade/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "gridcascade/parallel.hpp"

namespace gridcascade {

namespace {

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

void validate(LatLon p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw std::invalid_argument(fmt::format("invalid coordinate ({}, {})", p.lat, p.lon));
  }
}

double great_circle_distance(LatLon a, LatLon b) {
  const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double initial_bearing(LatLon from, LatLon to) {
  const double phi1 = deg2rad(from.lat), phi2 = deg2rad(to.lat);
  const double dlambda = deg2rad(to.lon - from.lon);
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return std::atan2(y, x);
}

Point project(LatLon p, LatLon reference) {
  validate(p);
  validate(reference);
  const double d = great_circle_distance(reference, p);
  if (d == 0.0) return {0.0, 0.0};
  const double beta = initial_bearing(reference, p);
  return {d * std::sin(beta), d * std::cos(beta)};
}

Point to_planar(const GeoPoint& p, LatLon reference) {
  if (const auto* planar = std::get_if<Point>(&p)) return *planar;
  return project(std::get<LatLon>(p), reference);
}

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

LineSet affected_lines(const Grid& grid, const GeoEvent& event, double tolerance) {
  if (!(event.radius > 0.0)) {
    throw std::invalid_argument(fmt::format("event radius must be positive, got {}", event.radius));
  }
  LineSet out;
  for (const auto& l : grid.lines()) {
    const auto a = grid.node(l.from).coord;
    const auto b = grid.node(l.to).coord;
    if (segment_distance(event.center, a, b) <= event.radius + tolerance) out.push_back(l.id);
  }
  return out;
}

std::vector<Candidate> distinct_affected_sets(const std::vector<Candidate>& all) {
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return all[a].affected < all[b].affected; });
  std::vector<char> keep(all.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || all[order[k]].affected != all[order[k - 1]].affected) keep[order[k]] = 1;
  }
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (keep[i]) out.push_back(all[i]);
  }
  return out;
}

SweepResult sweep(const Grid& grid, double radius, const CascadeConfig& config,
                  const SweepOptions& options) {
  config.validate();
  SweepResult result;
  result.radius = radius;
  const auto unique = distinct_affected_sets(candidates(grid, radius, options.candidate_options));
  result.entries.resize(unique.size());
  parallel_for(unique.size(), options.jobs, [&](std::size_t i) {
    auto& entry = result.entries[i];
    entry.candidate = unique[i];
    if (options.lookup) {
      if (auto stored = options.lookup(i, entry.candidate)) {
        entry.report = std::move(stored);
        return;
      }
    }
    try {
      entry.report = run_cascade(grid, entry.candidate.affected, config);
      if (options.store) options.store(i, entry.candidate, *entry.report);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  });
  return result;
}

}  // namespace gridcascade
