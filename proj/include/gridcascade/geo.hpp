#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridcascade/cascade.hpp"
#include "gridcascade/grid.hpp"

namespace gridcascade {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Geodetic coordinate in degrees.
struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Either a geodetic coordinate or an already planar (x, y) in km.
using GeoPoint = std::variant<LatLon, Point>;

/// Haversine great-circle distance in km.
double great_circle_distance(LatLon a, LatLon b);

/// Initial bearing from `from` to `to`, radians clockwise from north.
double initial_bearing(LatLon from, LatLon to);

/// Distance-and-bearing projection around `reference`: x = d sin(beta),
/// y = d cos(beta). The reference maps to the origin.
Point project(LatLon p, LatLon reference);

/// Planar inputs pass through unchanged.
Point to_planar(const GeoPoint& p, LatLon reference);

/// Throws std::invalid_argument for latitudes outside [-90, 90] or
/// longitudes outside [-180, 180].
void validate(LatLon p);

double segment_distance(Point p, Point a, Point b);

/// Circular failure: every line within `radius` km of `center` fails.
struct GeoEvent {
  Point center;
  double radius = 0.0;
};

inline constexpr double kGeoTolerance = 1e-9;

/// Lines whose segment lies within event.radius (+ tolerance) of the center.
LineSet affected_lines(const Grid& grid, const GeoEvent& event, double tolerance = kGeoTolerance);

struct Candidate {
  Point point;
  LineSet affected;
};

struct CandidateOptions {
  /// The plane is cut into sections_per_axis^2 tiles processed independently;
  /// each tile sees every line within r of it.
  std::size_t sections_per_axis = 1;
  std::size_t jobs = 1;
  double tolerance = kGeoTolerance;
  /// Candidates closer than this with identical affected sets are merged.
  double merge_distance = 1e-6;
};

/// Vertices of the arrangement of r-hippodromes (pairwise boundary
/// intersections and the joints between straight and circular boundary
/// pieces) plus each segment's midpoint as an interior witness. Every point
/// p of the plane has some candidate v with affected(p) contained in
/// affected(v). Sorted by (x, y).
std::vector<Candidate> candidates(const Grid& grid, double radius, const CandidateOptions& options = {});

/// Keeps the first candidate (in the given order) of each distinct affected set.
std::vector<Candidate> distinct_affected_sets(const std::vector<Candidate>& all);

struct SweepOptions {
  CandidateOptions candidate_options;
  std::size_t jobs = 0;
  /// Returns a stored report for candidate i, if any (resuming a sweep).
  std::function<std::optional<CascadeReport>(std::size_t, const Candidate&)> lookup;
  /// Called with each freshly computed report; may run on worker threads.
  std::function<void(std::size_t, const Candidate&, const CascadeReport&)> store;
};

struct SweepEntry {
  Candidate candidate;
  std::optional<CascadeReport> report;
  std::string error;
};

struct SweepResult {
  double radius = 0.0;
  std::vector<SweepEntry> entries;
};

/// Runs one cascade per distinct affected set, in parallel. Entries follow the
/// candidate order; failures are recorded per entry and do not stop the sweep.
SweepResult sweep(const Grid& grid, double radius, const CascadeConfig& config,
                  const SweepOptions& options = {});

}  // namespace gridcascade
