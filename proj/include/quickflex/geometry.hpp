#pragma once

#include <stdexcept>
#include <vector>

#include "quickflex/direction.hpp"

namespace quickflex {

// Planar machinery for PCC (p,q) regions. Hulls are kept in clockwise order
// (signed shoelace sum <= 0); outward normals and distances follow from that
// convention.

struct Point2 {
  double p = 0.0;
  double q = 0.0;
};

struct Polygon {
  std::vector<Point2> vertices;   // clockwise
};

struct Segment {
  Point2 a;
  Point2 b;
  bool active = true;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMergeTol = 1e-9;      // duplicate-vertex merge, pu
inline constexpr double kConvexityTol = 1e-9;

// |signed area| of the polygon; 0 for collinear rings. Throws GeometryError
// for fewer than 3 vertices.
double shoelace_area(const Polygon& poly);

double signed_shoelace(const Polygon& poly);

// Signed perpendicular distance from the segment line, positive on the
// outward side of a clockwise hull. Throws on zero-length segments.
double outward_distance(const Segment& seg, const Point2& pt);

// Direction objective whose minimizer maximizes outward_distance(seg, .).
DirectionObjective facet_objective(const Segment& seg);

struct InsertResult {
  bool inserted = false;
  Polygon polygon;      // updated when inserted, otherwise the input
  Segment left, right;  // children (a->pt) and (pt->b) when inserted
};

// Splices pt between seg.a and seg.b preserving clockwise order. A point on
// or inside the hull (outward distance <= merge tolerance) or duplicating an
// endpoint is rejected: the caller should deactivate the segment.
InsertResult insert_vertex(const Polygon& poly, const Segment& seg, const Point2& pt);

// Relative area increase (a_new - a_prev) / a_new; 0 when a_new is 0
// (zero-area region treated as converged).
double area_increase(double a_prev, double a_new);

// Clockwise convex hull; interior points discarded, collinear boundary
// points merged. Throws GeometryError for fewer than 3 distinct points.
Polygon convex_hull(const std::vector<Point2>& points);

// Same construction but collinear/short inputs collapse to a degenerate
// polygon (<= 2 vertices, area 0) instead of throwing.
Polygon hull_allow_degenerate(const std::vector<Point2>& points);

bool polygon_is_clockwise(const Polygon& poly);
bool polygon_is_convex(const Polygon& poly, double tol = kConvexityTol);
bool point_in_polygon(const Polygon& poly, const Point2& pt, double tol = kConvexityTol);

}  // namespace quickflex
