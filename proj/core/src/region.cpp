#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "monotomo/geometry.hpp"

namespace monotomo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  const double scale = (b - a).norm() * (c - a).norm();
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool is_simple_polygon(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

double polygon_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

std::vector<Vec2> sample_ellipse(const Vec2& c, double a, double b, double rot, int samples) {
  std::vector<Vec2> pts;
  pts.reserve(samples);
  const double cr = std::cos(rot), sr = std::sin(rot);
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const double x = a * std::cos(t), y = b * std::sin(t);
    pts.emplace_back(c.x() + cr * x - sr * y, c.y() + sr * x + cr * y);
  }
  return pts;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Region Region::circle(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  return Region(Circle{center, radius});
}

Region Region::ellipse(Vec2 center, double semi_a, double semi_b, double rotation) {
  if (!(semi_a > 0.0 && semi_b > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  return Region(Ellipse{center, semi_a, semi_b, rotation});
}

Region Region::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  if (!is_simple_polygon(vertices)) throw std::invalid_argument("polygon is not simple");
  if (std::abs(polygon_area(vertices)) <= 0.0) throw std::invalid_argument("polygon has zero area");
  return Region(Polygon{std::move(vertices)});
}

Region Region::rectangle(Vec2 lo, Vec2 hi) {
  if (!(hi.x() > lo.x() && hi.y() > lo.y())) throw std::invalid_argument("rectangle corners out of order");
  return polygon({lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}});
}

Region Region::half_plane(Vec2 anchor, Vec2 normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw std::invalid_argument("half-plane normal must be nonzero");
  return Region(HalfPlane{anchor, normal / len});
}

Region Region::union_of(std::vector<Region> parts) { return Region(Union{std::move(parts)}); }

Region Region::complement(Region inner) {
  return Region(Complement{std::make_shared<const Region>(std::move(inner))});
}

Region Region::intersection(Region a, Region b) {
  return complement(union_of({complement(std::move(a)), complement(std::move(b))}));
}

bool Region::contains(const Vec2& p) const {
  return std::visit(
      Overloaded{
          [&](const Circle& c) { return (p - c.center).squaredNorm() <= c.radius * c.radius; },
          [&](const Ellipse& e) {
            const Vec2 d = p - e.center;
            const double cr = std::cos(e.rotation), sr = std::sin(e.rotation);
            const double x = cr * d.x() + sr * d.y();
            const double y = -sr * d.x() + cr * d.y();
            return (x * x) / (e.semi_a * e.semi_a) + (y * y) / (e.semi_b * e.semi_b) <= 1.0;
          },
          [&](const Polygon& poly) {
            // Even-odd crossing rule.
            bool inside = false;
            const auto& v = poly.vertices;
            for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
              if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
                const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
                if (p.x() < x) inside = !inside;
              }
            }
            return inside;
          },
          [&](const HalfPlane& h) { return (p - h.anchor).dot(h.normal) >= 0.0; },
          [&](const Union& u) {
            return std::any_of(u.parts.begin(), u.parts.end(), [&](const Region& r) { return r.contains(p); });
          },
          [&](const Complement& c) { return !c.inner->contains(p); },
      },
      shape_);
}

std::optional<double> Region::support(const Vec2& n) const {
  return std::visit(
      Overloaded{
          [&](const Circle& c) -> std::optional<double> { return c.center.dot(n) + c.radius; },
          [&](const Ellipse& e) -> std::optional<double> {
            const Vec2 u(std::cos(e.rotation), std::sin(e.rotation));
            const Vec2 v(-u.y(), u.x());
            const double nu = n.dot(u), nv = n.dot(v);
            return e.center.dot(n) + std::sqrt(e.semi_a * e.semi_a * nu * nu + e.semi_b * e.semi_b * nv * nv);
          },
          [&](const Polygon& poly) -> std::optional<double> {
            double h = -std::numeric_limits<double>::infinity();
            for (const auto& v : poly.vertices) h = std::max(h, v.dot(n));
            return h;
          },
          [&](const HalfPlane&) -> std::optional<double> { return std::nullopt; },
          [&](const Union& u) -> std::optional<double> {
            double h = -std::numeric_limits<double>::infinity();
            for (const auto& r : u.parts) {
              auto s = r.support(n);
              if (!s) return std::nullopt;
              h = std::max(h, *s);
            }
            return h;
          },
          [&](const Complement& c) -> std::optional<double> {
            // Intersections built from complements are bounded when some
            // complemented member of the inner union is bounded.
            if (const auto* u = std::get_if<Union>(&c.inner->shape_)) {
              std::optional<double> best;
              for (const auto& part : u->parts) {
                if (const auto* cc = std::get_if<Complement>(&part.shape_)) {
                  if (auto s = cc->inner->support(n)) best = best ? std::min(*best, *s) : *s;
                }
              }
              return best;
            }
            return std::nullopt;
          },
      },
      shape_);
}

std::optional<double> Region::max_radius() const {
  return std::visit(
      Overloaded{
          [&](const Circle& c) -> std::optional<double> { return c.center.norm() + c.radius; },
          [&](const Ellipse& e) -> std::optional<double> {
            return e.center.norm() + std::max(e.semi_a, e.semi_b);
          },
          [&](const Polygon& poly) -> std::optional<double> {
            double r = 0.0;
            for (const auto& v : poly.vertices) r = std::max(r, v.norm());
            return r;
          },
          [&](const HalfPlane&) -> std::optional<double> { return std::nullopt; },
          [&](const Union& u) -> std::optional<double> {
            double r = 0.0;
            for (const auto& part : u.parts) {
              auto s = part.max_radius();
              if (!s) return std::nullopt;
              r = std::max(r, *s);
            }
            return r;
          },
          [&](const Complement& c) -> std::optional<double> {
            if (const auto* u = std::get_if<Union>(&c.inner->shape_)) {
              std::optional<double> best;
              for (const auto& part : u->parts) {
                if (const auto* cc = std::get_if<Complement>(&part.shape_)) {
                  if (auto s = cc->inner->max_radius()) best = best ? std::min(*best, *s) : *s;
                }
              }
              return best;
            }
            return std::nullopt;
          },
      },
      shape_);
}

std::vector<std::vector<Vec2>> Region::outline(double domain_radius, int samples) const {
  return std::visit(
      Overloaded{
          [&](const Circle& c) -> std::vector<std::vector<Vec2>> {
            return {sample_ellipse(c.center, c.radius, c.radius, 0.0, samples)};
          },
          [&](const Ellipse& e) -> std::vector<std::vector<Vec2>> {
            return {sample_ellipse(e.center, e.semi_a, e.semi_b, e.rotation, samples)};
          },
          [&](const Polygon& poly) -> std::vector<std::vector<Vec2>> { return {poly.vertices}; },
          [&](const HalfPlane& h) -> std::vector<std::vector<Vec2>> {
            const double d = h.anchor.dot(h.normal);
            if (d >= domain_radius) return {};
            const double phi = std::atan2(h.normal.y(), h.normal.x());
            const double beta = d <= -domain_radius ? std::numbers::pi : std::acos(d / domain_radius);
            std::vector<Vec2> pts;
            for (int k = 0; k <= samples; ++k) {
              const double t = phi - beta + 2.0 * beta * k / samples;
              pts.emplace_back(domain_radius * std::cos(t), domain_radius * std::sin(t));
            }
            return {pts};
          },
          [&](const Union& u) -> std::vector<std::vector<Vec2>> {
            std::vector<std::vector<Vec2>> all;
            for (const auto& part : u.parts) {
              auto sub = part.outline(domain_radius, samples);
              all.insert(all.end(), sub.begin(), sub.end());
            }
            return all;
          },
          [&](const Complement& c) { return c.inner->outline(domain_radius, samples); },
      },
      shape_);
}

std::string Region::describe() const {
  return std::visit(
      Overloaded{
          [&](const Circle& c) {
            return "circle(" + fmt(c.center.x()) + "," + fmt(c.center.y()) + "," + fmt(c.radius) + ")";
          },
          [&](const Ellipse& e) {
            return "ellipse(" + fmt(e.center.x()) + "," + fmt(e.center.y()) + "," + fmt(e.semi_a) + "," +
                   fmt(e.semi_b) + "," + fmt(e.rotation) + ")";
          },
          [&](const Polygon& poly) {
            std::string s = "polygon(";
            for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
              if (i) s += ",";
              s += fmt(poly.vertices[i].x()) + "," + fmt(poly.vertices[i].y());
            }
            return s + ")";
          },
          [&](const HalfPlane& h) {
            return "halfplane(" + fmt(h.anchor.x()) + "," + fmt(h.anchor.y()) + "," + fmt(h.normal.x()) + "," +
                   fmt(h.normal.y()) + ")";
          },
          [&](const Union& u) {
            std::string s = "union(";
            for (std::size_t i = 0; i < u.parts.size(); ++i) {
              if (i) s += ",";
              s += u.parts[i].describe();
            }
            return s + ")";
          },
          [&](const Complement& c) { return "complement(" + c.inner->describe() + ")"; },
      },
      shape_);
}

}  // namespace monotomo
