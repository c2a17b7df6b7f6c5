#include <doctest.h>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>

#include "gridcascade/fixtures.hpp"
#include "gridcascade/geo.hpp"
#include "gridcascade/provisioning.hpp"
#include "support.hpp"

using namespace gridcascade;

namespace {

/// Great-circle distance through the central angle of unit vectors, an
/// independent formula from the haversine used by the library.
double chord_angle_distance(LatLon a, LatLon b) {
  auto unit = [](LatLon p) {
    const double phi = p.lat * std::numbers::pi / 180, lam = p.lon * std::numbers::pi / 180;
    return std::array<double, 3>{std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
  };
  const auto u = unit(a), v = unit(b);
  const double cx = u[1] * v[2] - u[2] * v[1], cy = u[2] * v[0] - u[0] * v[2], cz = u[0] * v[1] - u[1] * v[0];
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return 6371.0 * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

/// Point-to-segment distance by ternary search on the (convex) squared distance.
double brute_segment_distance(Point p, Point a, Point b) {
  double lo = 0.0, hi = 1.0;
  auto at = [&](double t) {
    const double x = a.x + t * (b.x - a.x), y = a.y + t * (b.y - a.y);
    return (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y);
  };
  for (int k = 0; k < 200; ++k) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (at(m1) < at(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::sqrt(std::min({at(0.0), at(1.0), at((lo + hi) / 2)}));
}

}  // namespace

using namespace testing;

TEST_CASE("haversine agrees with an independent great-circle formula") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int k = 0; k < 1000; ++k) {
    const LatLon a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    const double d = great_circle_distance(a, b);
    CHECK(std::abs(d - chord_angle_distance(a, b)) < 1e-6);
    CHECK(d <= std::numbers::pi * kEarthRadiusKm + 1e-9);
  }
}

TEST_CASE("projection") {
  const LatLon ref{32.7, -117.2};
  const auto origin = project(ref, ref);
  CHECK(origin.x == 0.0);
  CHECK(origin.y == 0.0);
  const double degree = 2 * std::numbers::pi * 6371.0 / 360.0;
  const auto north = project({33.7, -117.2}, ref);
  CHECK(std::abs(north.x) < 1e-9);
  CHECK(north.y == doctest::Approx(degree).epsilon(1e-12));
  CHECK(north.y == doctest::Approx(111.19).epsilon(1e-4));
  const auto east = project({0.0, 1.0}, {0.0, 0.0});
  CHECK(east.x == doctest::Approx(degree).epsilon(1e-12));
  CHECK(std::abs(east.y) < 1e-9);
  // distance to the reference is preserved
  const LatLon p{30.0, -110.0};
  const auto q = project(p, ref);
  CHECK(std::hypot(q.x, q.y) == doctest::Approx(chord_angle_distance(p, ref)).epsilon(1e-9));
  CHECK_THROWS_AS(project({91.0, 0.0}, ref), std::invalid_argument);
  CHECK_THROWS_AS(project({0.0, 181.0}, ref), std::invalid_argument);
  const Point planar{3, 4};
  CHECK(to_planar(GeoPoint{planar}, ref) == planar);
}

TEST_CASE("affected lines") {
  // unit square with a centre node joined to the four corners
  const Grid g({{0, NodeRole::neutral(), {0, 0}},
                {1, NodeRole::neutral(), {1, 0}},
                {2, NodeRole::neutral(), {0, 1}},
                {3, NodeRole::neutral(), {-1, 0}},
                {4, NodeRole::neutral(), {0, -1}},
                {5, NodeRole::neutral(), {5, 5}},
                {6, NodeRole::neutral(), {6, 5}}},
               {{0, 0, 1, 1.0, {}}, {1, 0, 2, 1.0, {}}, {2, 0, 3, 1.0, {}}, {3, 0, 4, 1.0, {}}, {4, 5, 6, 1.0, {}}});
  CHECK(affected_lines(g, {{0, 0}, 0.5}) == LineSet{0, 1, 2, 3});
  CHECK(affected_lines(g, {{5.5, 5}, 1e-6}) == LineSet{4});
  CHECK(affected_lines(g, {{3, 3}, 0.5}).empty());
  CHECK_THROWS_AS(affected_lines(g, {{0, 0}, 0.0}), std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coord(-20, 120), rad(0.1, 30);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rg = random_geometry(rng, 30);
    for (int k = 0; k < 50; ++k) {
      const Point c{coord(rng), coord(rng)};
      const double r1 = rad(rng), r2 = r1 + rad(rng);
      const auto l1 = affected_lines(rg, {c, r1});
      const auto l2 = affected_lines(rg, {c, r2});
      CHECK(std::includes(l2.begin(), l2.end(), l1.begin(), l1.end()));
      for (const auto& l : rg.lines()) {
        const double d = brute_segment_distance(c, rg.node(l.from).coord, rg.node(l.to).coord);
        const bool in = std::binary_search(l1.begin(), l1.end(), l.id);
        if (std::abs(d - r1) > 1e-7) CHECK(in == (d <= r1));
      }
    }
  }
}

TEST_CASE("candidate basics") {
  SUBCASE("an isolated line yields its witness") {
    const Grid g({{0, NodeRole::neutral(), {0, 0}}, {1, NodeRole::neutral(), {10, 0}}}, {{0, 0, 1, 1.0, {}}});
    const auto c = distinct_affected_sets(candidates(g, 1.0));
    REQUIRE(c.size() == 1);
    CHECK(c[0].affected == LineSet{0});
  }
  SUBCASE("parallel lines closer than 2r share a candidate") {
    const Grid g({{0, NodeRole::neutral(), {0, 0}},
                  {1, NodeRole::neutral(), {10, 0}},
                  {2, NodeRole::neutral(), {0, 1.5}},
                  {3, NodeRole::neutral(), {10, 1.5}}},
                 {{0, 0, 1, 1.0, {}}, {1, 2, 3, 1.0, {}}});
    const auto fam = families(candidates(g, 1.0));
    CHECK(fam.count(LineSet{0, 1}) == 1);
  }
  SUBCASE("a disk larger than the ring covers everything") {
    const auto g = fixtures::make_mring(5);
    const auto fam = families(candidates(g, 250.0));
    LineSet all(g.line_count());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    CHECK(fam.count(all) == 1);
  }
  SUBCASE("invalid options") {
    const auto g = fixtures::make_mring(3);
    CHECK_THROWS_AS(candidates(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(candidates(g, 1.0, {.sections_per_axis = 0}), std::invalid_argument);
    CHECK(candidates(Grid{}, 1.0).empty());
  }
}

TEST_CASE("candidate line sets are exact") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_geometry(rng, 20);
    for (const auto& c : candidates(g, 12.0)) {
      for (const auto& l : g.lines()) {
        const double d = brute_segment_distance(c.point, g.node(l.from).coord, g.node(l.to).coord);
        const bool in = std::binary_search(c.affected.begin(), c.affected.end(), l.id);
        if (std::abs(d - 12.0) > 1e-6) CHECK(in == (d <= 12.0));
      }
    }
  }
}

TEST_CASE("coverage on a sampling lattice") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 15; ++trial) {
    const auto g = random_geometry(rng, 30);
    const double r = std::uniform_real_distribution<double>(2.0, 25.0)(rng);
    CHECK(covered_on_lattice(g, r, candidates(g, r), 120));
  }
}

TEST_CASE("sectioning reproduces the candidate families") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_geometry(rng, 30);
    const double r = std::uniform_real_distribution<double>(2.0, 20.0)(rng);
    const auto whole = families(candidates(g, r));
    for (std::size_t s : {2, 3, 5}) {
      CHECK(families(candidates(g, r, {.sections_per_axis = s, .jobs = 2})) == whole);
    }
  }
}

TEST_CASE("a disk over area 0 reproduces the area failure") {
  const std::size_t M = 4;
  const auto g = fixtures::make_mring(M, {.capacity = 0.5});
  const fixtures::MRingIndex idx(M, true);
  const GeoEvent event{{90.0, 0.0}, 30.0};
  CHECK(affected_lines(g, event) == idx.area_failure(0));

  const auto result = sweep(g, 30.0, CascadeConfig{}, {.jobs = 2});
  bool found = false;
  for (const auto& e : result.entries) {
    REQUIRE(e.report);
    if (e.candidate.affected == idx.area_failure(0)) {
      found = true;
      CHECK(e.report->yield == doctest::Approx(0.75).epsilon(1e-12));
    }
  }
  CHECK(found);
}

TEST_CASE("sweep runs one cascade per distinct set and honours callbacks") {
  const auto g = fixtures::make_mring(3, {.capacity = 0.5});
  std::atomic<int> stored{0};
  SweepOptions opt;
  opt.jobs = 1;
  opt.store = [&](std::size_t, const Candidate&, const CascadeReport&) { ++stored; };
  const auto first = sweep(g, 10.0, CascadeConfig{}, opt);
  CHECK(stored == static_cast<int>(first.entries.size()));
  std::set<LineSet> distinct;
  for (const auto& e : first.entries) CHECK(distinct.insert(e.candidate.affected).second);

  // a lookup that answers everything suppresses all computation
  int looked = 0;
  opt.lookup = [&](std::size_t i, const Candidate&) -> std::optional<CascadeReport> {
    ++looked;
    return first.entries[i].report;
  };
  stored = 0;
  const auto second = sweep(g, 10.0, CascadeConfig{}, opt);
  CHECK(stored == 0);
  CHECK(looked == static_cast<int>(first.entries.size()));

  // per-candidate errors are recorded, not thrown
  const auto tight = fixtures::make_mring(3, {.capacity = 0.4});
  const auto broken = sweep(tight, 10.0, CascadeConfig{});
  for (const auto& e : broken.entries) {
    CHECK(!e.report);
    CHECK(!e.error.empty());
  }
}
