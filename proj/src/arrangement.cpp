// Vertices of the arrangement of r-hippodromes around grid lines.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <fmt/core.h>

#include "gridcascade/geo.hpp"
#include "gridcascade/parallel.hpp"

namespace gridcascade {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SegmentPiece {
  Point a, b;
};

// Circular arc from `start` sweeping counter-clockwise by `sweep` radians.
struct ArcPiece {
  Point center;
  double radius;
  double start;
  double sweep;
};

struct Hippodrome {
  LineId line;
  Point a, b;
  std::vector<SegmentPiece> segments;
  std::vector<ArcPiece> arcs;
  std::vector<Point> joints;
  Point witness;
};

Hippodrome make_hippodrome(LineId line, Point a, Point b, double r) {
  Hippodrome h{line, a, b, {}, {}, {}, {(a.x + b.x) / 2, (a.y + b.y) / 2}};
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len <= 0.0) {
    h.arcs.push_back({a, r, 0.0, kTwoPi});
    h.joints.push_back({a.x + r, a.y});
    return h;
  }
  const Point d{(b.x - a.x) / len, (b.y - a.y) / len};
  const Point n{-d.y, d.x};
  const Point a_up{a.x + r * n.x, a.y + r * n.y}, b_up{b.x + r * n.x, b.y + r * n.y};
  const Point a_dn{a.x - r * n.x, a.y - r * n.y}, b_dn{b.x - r * n.x, b.y - r * n.y};
  h.segments.push_back({a_up, b_up});
  h.segments.push_back({a_dn, b_dn});
  const double normal_angle = std::atan2(n.y, n.x);
  // cap at b runs from -n through d to +n; cap at a from +n through -d to -n
  h.arcs.push_back({b, r, normal_angle + std::numbers::pi, std::numbers::pi});
  h.arcs.push_back({a, r, normal_angle, std::numbers::pi});
  h.joints = {a_up, b_up, a_dn, b_dn};
  return h;
}

bool on_arc(const ArcPiece& arc, Point p, double tolerance) {
  if (arc.sweep >= kTwoPi) return true;
  double rel = std::atan2(p.y - arc.center.y, p.x - arc.center.x) - arc.start;
  rel = std::fmod(rel, kTwoPi);
  if (rel < 0) rel += kTwoPi;
  const double slack = tolerance / arc.radius;
  return rel <= arc.sweep + slack || rel >= kTwoPi - slack;
}

void intersect(const SegmentPiece& s, const SegmentPiece& t, double tol, std::vector<Point>& out) {
  const double rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
  const double qx = t.b.x - t.a.x, qy = t.b.y - t.a.y;
  const double denom = rx * qy - ry * qx;
  const double scale = std::hypot(rx, ry) * std::hypot(qx, qy);
  // parallel or collinear: overlap ends are joints, which are always candidates
  if (std::abs(denom) <= 1e-14 * scale) return;
  const double wx = t.a.x - s.a.x, wy = t.a.y - s.a.y;
  const double u = (wx * qy - wy * qx) / denom;
  const double v = (wx * ry - wy * rx) / denom;
  const double us = tol / std::hypot(rx, ry), vs = tol / std::hypot(qx, qy);
  if (u < -us || u > 1 + us || v < -vs || v > 1 + vs) return;
  out.push_back({s.a.x + u * rx, s.a.y + u * ry});
}

void intersect(const SegmentPiece& s, const ArcPiece& c, double tol, std::vector<Point>& out) {
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double fx = s.a.x - c.center.x, fy = s.a.y - c.center.y;
  const double A = dx * dx + dy * dy;
  if (A <= 0.0) return;
  // project the center onto the supporting line, then step along it
  const double t0 = -(fx * dx + fy * dy) / A;
  const double px = fx + t0 * dx, py = fy + t0 * dy;
  const double dist = std::hypot(px, py);
  if (dist > c.radius + tol) return;
  const double half = std::sqrt(std::max(0.0, c.radius * c.radius - dist * dist)) / std::sqrt(A);
  const double ts = tol / std::sqrt(A);
  for (double t : {t0 - half, t0 + half}) {
    if (t < -ts || t > 1 + ts) continue;
    const Point p{s.a.x + t * dx, s.a.y + t * dy};
    if (on_arc(c, p, tol)) out.push_back(p);
    if (half == 0.0) break;
  }
}

void intersect(const ArcPiece& c1, const ArcPiece& c2, double tol, std::vector<Point>& out) {
  const double dx = c2.center.x - c1.center.x, dy = c2.center.y - c1.center.y;
  const double d = std::hypot(dx, dy);
  // concentric (shared endpoint): overlapping caps end at joints
  if (d <= tol) return;
  if (d > c1.radius + c2.radius + tol || d < std::abs(c1.radius - c2.radius) - tol) return;
  const double a = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2 * d);
  const double h = std::sqrt(std::max(0.0, c1.radius * c1.radius - a * a));
  const double mx = c1.center.x + a * dx / d, my = c1.center.y + a * dy / d;
  const Point p1{mx - h * dy / d, my + h * dx / d};
  const Point p2{mx + h * dy / d, my - h * dx / d};
  if (on_arc(c1, p1, tol) && on_arc(c2, p1, tol)) out.push_back(p1);
  if (h > 0.0 && on_arc(c1, p2, tol) && on_arc(c2, p2, tol)) out.push_back(p2);
}

void intersect(const Hippodrome& h1, const Hippodrome& h2, double tol, std::vector<Point>& out) {
  for (const auto& s : h1.segments) {
    for (const auto& t : h2.segments) intersect(s, t, tol, out);
    for (const auto& c : h2.arcs) intersect(s, c, tol, out);
  }
  for (const auto& c : h1.arcs) {
    for (const auto& t : h2.segments) intersect(t, c, tol, out);
    for (const auto& c2 : h2.arcs) intersect(c, c2, tol, out);
  }
}

double segment_segment_distance(Point a, Point b, Point c, Point d) {
  const double d1x = b.x - a.x, d1y = b.y - a.y, d2x = d.x - c.x, d2y = d.y - c.y;
  auto cross = [](double ux, double uy, double vx, double vy) { return ux * vy - uy * vx; };
  const double c1 = cross(d1x, d1y, c.x - a.x, c.y - a.y), c2 = cross(d1x, d1y, d.x - a.x, d.y - a.y);
  const double c3 = cross(d2x, d2y, a.x - c.x, a.y - c.y), c4 = cross(d2x, d2y, b.x - c.x, b.y - c.y);
  if (((c1 > 0) != (c2 > 0)) && ((c3 > 0) != (c4 > 0)) && c1 != 0 && c2 != 0 && c3 != 0 && c4 != 0) {
    return 0.0;
  }
  return std::min({segment_distance(a, c, d), segment_distance(b, c, d), segment_distance(c, a, b),
                   segment_distance(d, a, b)});
}

struct Rect {
  double x0, y0, x1, y1;
};

bool inside(const Rect& r, Point p) { return p.x >= r.x0 && p.x <= r.x1 && p.y >= r.y0 && p.y <= r.y1; }

double segment_rect_distance(Point a, Point b, const Rect& r) {
  if (inside(r, a) || inside(r, b)) return 0.0;
  const Point c[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) best = std::min(best, segment_segment_distance(a, b, c[k], c[(k + 1) % 4]));
  return best;
}

struct Tiling {
  Rect bounds;
  std::size_t per_axis;
  double width, height;

  std::size_t tile_of(Point p) const {
    auto cell = [&](double v, double lo, double size) {
      if (size <= 0.0) return std::size_t{0};
      const double k = std::floor((v - lo) / size);
      return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(per_axis - 1)));
    };
    return cell(p.y, bounds.y0, height) * per_axis + cell(p.x, bounds.x0, width);
  }

  Rect tile(std::size_t index) const {
    const auto ix = index % per_axis, iy = index / per_axis;
    return {bounds.x0 + width * static_cast<double>(ix), bounds.y0 + height * static_cast<double>(iy),
            bounds.x0 + width * static_cast<double>(ix + 1), bounds.y0 + height * static_cast<double>(iy + 1)};
  }
};

bool point_less(const Candidate& a, const Candidate& b) {
  return std::tie(a.point.x, a.point.y, a.affected) < std::tie(b.point.x, b.point.y, b.affected);
}

}  // namespace

std::vector<Candidate> candidates(const Grid& grid, double radius, const CandidateOptions& options) {
  if (!(radius > 0.0)) throw std::invalid_argument(fmt::format("radius must be positive, got {}", radius));
  if (options.sections_per_axis == 0) throw std::invalid_argument("sections_per_axis must be >= 1");
  const double tol = options.tolerance;
  if (grid.line_count() == 0) return {};

  std::vector<Hippodrome> hippodromes;
  hippodromes.reserve(grid.line_count());
  Rect bounds{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& l : grid.lines()) {
    const auto a = grid.node(l.from).coord, b = grid.node(l.to).coord;
    hippodromes.push_back(make_hippodrome(l.id, a, b, radius));
    bounds.x0 = std::min({bounds.x0, a.x, b.x});
    bounds.y0 = std::min({bounds.y0, a.y, b.y});
    bounds.x1 = std::max({bounds.x1, a.x, b.x});
    bounds.y1 = std::max({bounds.y1, a.y, b.y});
  }
  const double pad = radius + 2 * tol;
  bounds = {bounds.x0 - pad, bounds.y0 - pad, bounds.x1 + pad, bounds.y1 + pad};
  const auto per_axis = options.sections_per_axis;
  const Tiling tiling{bounds, per_axis, (bounds.x1 - bounds.x0) / static_cast<double>(per_axis),
                      (bounds.y1 - bounds.y0) / static_cast<double>(per_axis)};

  const auto tiles = per_axis * per_axis;
  std::vector<std::vector<Candidate>> found(tiles);
  parallel_for(tiles, options.jobs, [&](std::size_t t) {
    // lines within r of the tile; neighbouring tiles overlap by 2r
    const Rect rect = tiling.tile(t);
    std::vector<const Hippodrome*> local;
    for (const auto& h : hippodromes) {
      if (tiles == 1 || segment_rect_distance(h.a, h.b, rect) <= radius + 4 * tol) local.push_back(&h);
    }

    std::vector<Point> points;
    for (std::size_t i = 0; i < local.size(); ++i) {
      const auto& h1 = *local[i];
      points.push_back(h1.witness);
      points.insert(points.end(), h1.joints.begin(), h1.joints.end());
      for (std::size_t j = i + 1; j < local.size(); ++j) {
        const auto& h2 = *local[j];
        if (segment_segment_distance(h1.a, h1.b, h2.a, h2.b) > 2 * radius + 2 * tol) continue;
        intersect(h1, h2, tol, points);
      }
    }

    auto& mine = found[t];
    for (const auto& p : points) {
      if (tiles > 1 && tiling.tile_of(p) != t) continue;
      Candidate c{p, {}};
      for (const auto* h : local) {
        if (segment_distance(p, h->a, h->b) <= radius + tol) c.affected.push_back(h->line);
      }
      std::sort(c.affected.begin(), c.affected.end());
      mine.push_back(std::move(c));
    }
  });

  std::vector<Candidate> all;
  for (auto& f : found) std::move(f.begin(), f.end(), std::back_inserter(all));
  std::sort(all.begin(), all.end(), point_less);

  // merge near-coincident points that see the same lines
  std::vector<Candidate> merged;
  for (auto& c : all) {
    bool duplicate = false;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
      if (c.point.x - it->point.x > options.merge_distance) break;
      if (std::abs(c.point.y - it->point.y) <= options.merge_distance && it->affected == c.affected) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) merged.push_back(std::move(c));
  }
  return merged;
}

}  // namespace gridcascade
