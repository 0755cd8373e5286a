#include "quickflex/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace quickflex {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.p - o.p) * (b.q - o.q) - (a.q - o.q) * (b.p - o.p);
}

bool same_point(const Point2& a, const Point2& b, double tol = kMergeTol) {
  return std::abs(a.p - b.p) <= tol && std::abs(a.q - b.q) <= tol;
}

}  // namespace

double signed_shoelace(const Polygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    acc += a.p * b.q - b.p * a.q;
  }
  return 0.5 * acc;
}

double shoelace_area(const Polygon& poly) {
  if (poly.vertices.size() < 3)
    throw GeometryError("shoelace_area: polygon needs at least 3 vertices");
  return std::abs(signed_shoelace(poly));
}

double outward_distance(const Segment& seg, const Point2& pt) {
  const double dp = seg.b.p - seg.a.p;
  const double dq = seg.b.q - seg.a.q;
  const double len = std::hypot(dp, dq);
  if (len <= kMergeTol)
    throw GeometryError("outward_distance: degenerate segment");
  // cross((b-a), (pt-a)) is positive on the outward side of a clockwise hull.
  return (dp * (pt.q - seg.a.q) - dq * (pt.p - seg.a.p)) / len;
}

DirectionObjective facet_objective(const Segment& seg) {
  const double dp = seg.b.p - seg.a.p;
  const double dq = seg.b.q - seg.a.q;
  const double len = std::hypot(dp, dq);
  if (len <= kMergeTol)
    throw GeometryError("facet_objective: degenerate segment");
  // Outward unit normal of a clockwise facet, negated into minimization.
  const double np = -dq / len;
  const double nq = dp / len;
  return DirectionObjective(-np, -nq);
}

InsertResult insert_vertex(const Polygon& poly, const Segment& seg, const Point2& pt) {
  InsertResult res;
  res.polygon = poly;
  if (same_point(pt, seg.a) || same_point(pt, seg.b)) return res;
  if (outward_distance(seg, pt) <= kMergeTol) return res;

  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (same_point(v[i], seg.a) && same_point(v[j], seg.b)) {
      Polygon out;
      out.vertices.reserve(n + 1);
      out.vertices.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      out.vertices.push_back(pt);
      out.vertices.insert(out.vertices.end(), v.begin() + static_cast<std::ptrdiff_t>(j), v.end());
      res.inserted = true;
      res.polygon = std::move(out);
      res.left = Segment{seg.a, pt, true};
      res.right = Segment{pt, seg.b, true};
      return res;
    }
  }
  throw GeometryError("insert_vertex: segment is not a facet of the polygon");
}

double area_increase(double a_prev, double a_new) {
  if (a_new <= 0.0) return 0.0;
  return (a_new - a_prev) / a_new;
}

namespace {

Polygon hull_impl(const std::vector<Point2>& points, bool allow_degenerate) {
  std::vector<Point2> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.q < b.q;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) { return same_point(a, b); }),
            pts.end());

  if (pts.size() < 3) {
    if (!allow_degenerate)
      throw GeometryError("convex_hull: fewer than 3 distinct points");
    Polygon out;
    out.vertices = pts;
    return out;
  }

  // Monotone chain; strict turns only, so collinear boundary points merge.
  const std::size_t n = pts.size();
  std::vector<Point2> ring(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(ring[k - 2], ring[k - 1], pts[i]) <= kMergeTol) --k;
    ring[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(ring[k - 2], ring[k - 1], pts[i]) <= kMergeTol) --k;
    ring[k++] = pts[i];
  }
  ring.resize(k - 1);

  if (ring.size() < 3) {
    if (!allow_degenerate)
      throw GeometryError("convex_hull: input is collinear");
    Polygon out;
    out.vertices = {pts.front(), pts.back()};
    return out;
  }
  // The chain above runs counterclockwise; reverse into the clockwise
  // convention keeping the leftmost-lowest vertex first.
  Polygon out;
  out.vertices.push_back(ring.front());
  for (std::size_t i = ring.size(); i-- > 1;) out.vertices.push_back(ring[i]);
  return out;
}

}  // namespace

Polygon convex_hull(const std::vector<Point2>& points) { return hull_impl(points, false); }

Polygon hull_allow_degenerate(const std::vector<Point2>& points) {
  if (points.empty()) throw GeometryError("convex_hull: empty point set");
  return hull_impl(points, true);
}

bool polygon_is_clockwise(const Polygon& poly) { return signed_shoelace(poly) <= 0.0; }

bool polygon_is_convex(const Polygon& poly, double tol) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    const Point2& c = v[(i + 2) % n];
    if (cross(a, b, c) > tol) return false;   // left turn breaks a clockwise hull
  }
  return true;
}

bool point_in_polygon(const Polygon& poly, const Point2& pt, double tol) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Segment s{v[i], v[(i + 1) % n], true};
    if (outward_distance(s, pt) > tol) return false;
  }
  return true;
}

}  // namespace quickflex
