#include <algorithm>
#include <cmath>

#include "hilreach/oracle.hpp"

namespace hilreach {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Point2> convexHull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double polygonArea(const std::vector<Point2>& polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

bool insideConvexPolygon(const std::vector<Point2>& polygon, const Point2& p, double tolerance) {
  if (polygon.empty()) return false;
  if (polygon.size() == 1) return (p - polygon[0]).norm() <= tolerance;
  if (polygon.size() == 2) {
    const Point2 d = polygon[1] - polygon[0];
    const double t = std::clamp((p - polygon[0]).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (polygon[0] + t * d - p).norm() <= tolerance;
  }
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    // Signed distance of p to the left of edge a -> b.
    if (cross(a, b, p) / (b - a).norm() < -tolerance) return false;
  }
  return true;
}

}  // namespace hilreach
