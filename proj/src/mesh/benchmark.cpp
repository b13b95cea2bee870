#include "meshmotion/mesh/benchmark.hpp"

#include "meshmotion/mesh/delaunay.hpp"
#include "meshmotion/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace meshmotion {

namespace bg = benchmark_geometry;

double bg::flap_start() {
  const double half = 0.5 * (flap_top - flap_bottom);
  return cx + std::sqrt(radius * radius - half * half);
}

namespace {

struct Sizing {
  double h_min, h_max, grading;

  double distance(const Vec2& p) const {
    const double dc = std::max(0.0, (p - Vec2(bg::cx, bg::cy)).norm() - bg::radius);
    const double dx = std::max({bg::flap_start() - p.x(), 0.0, p.x() - bg::flap_end});
    const double dy = std::max({bg::flap_bottom - p.y(), 0.0, p.y() - bg::flap_top});
    return std::min(dc, std::hypot(dx, dy));
  }
  double operator()(const Vec2& p) const { return std::min(h_max, h_min + grading * distance(p)); }
};

Sizing make_sizing(const BenchmarkMeshOptions& o) {
  if (o.refinement < 0) throw std::invalid_argument("refinement must be >= 0");
  if (!(o.coarsening > 0.0)) throw std::invalid_argument("coarsening must be positive");
  const double s = o.coarsening * std::ldexp(1.0, -o.refinement);
  return {o.h_min * s, o.h_max * s, o.grading * s};
}

int flap_segments(const Sizing& h) {
  return std::max(2, static_cast<int>(std::lround((bg::flap_end - bg::flap_start()) / h.h_min)));
}
int tip_segments(const Sizing& h) {
  return std::max(2, static_cast<int>(std::lround((bg::flap_top - bg::flap_bottom) / h.h_min)));
}

// Samples a curve c(t), t in [0, 1], with spacing following the size field.
// Returns interior sample points only (endpoints excluded).
template <class Curve>
std::vector<Vec2> sample_curve(const Curve& c, const Sizing& h) {
  constexpr int fine = 4000;
  std::vector<double> cumulative(fine + 1, 0.0);
  Vec2 prev = c(0.0);
  for (int i = 1; i <= fine; ++i) {
    const Vec2 p = c(double(i) / fine);
    cumulative[i] = cumulative[i - 1] + (p - prev).norm() / h(0.5 * (p + prev));
    prev = p;
  }
  const int n = std::max(1, static_cast<int>(std::lround(cumulative.back())));
  std::vector<Vec2> out;
  for (int k = 1; k < n; ++k) {
    const double target = cumulative.back() * k / n;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    const int i = static_cast<int>(it - cumulative.begin());
    const double f = (target - cumulative[i - 1]) / (cumulative[i] - cumulative[i - 1]);
    out.push_back(c((i - 1 + f) / fine));
  }
  return out;
}

// Same arithmetic as rectangle_mesh so flap nodes match the solid mesh.
std::vector<Vec2> uniform_samples(const Vec2& a, const Vec2& b, int n) {
  std::vector<Vec2> out;
  for (int k = 1; k < n; ++k) {
    out.emplace_back(a.x() + (b.x() - a.x()) * k / n, a.y() + (b.y() - a.y()) * k / n);
  }
  return out;
}

struct Segment {
  int a, b;
  std::string tag;
};

struct BoundaryLayout {
  std::vector<Vec2> points;
  std::vector<Segment> segments;
  std::vector<Vec2> obstacle;  // obstacle polygon (counter-clockwise)
};

// Adds a polyline chain start -> samples -> end; returns the index of end.
int add_chain(BoundaryLayout& layout, int start, const std::vector<Vec2>& samples, int end,
              const std::string& tag) {
  int prev = start;
  for (const Vec2& p : samples) {
    layout.points.push_back(p);
    const int id = static_cast<int>(layout.points.size()) - 1;
    layout.segments.push_back({prev, id, tag});
    prev = id;
  }
  layout.segments.push_back({prev, end, tag});
  return end;
}

BoundaryLayout boundary_layout(const Sizing& h) {
  BoundaryLayout L;
  const double x0 = bg::flap_start();
  auto add = [&](const Vec2& p) {
    L.points.push_back(p);
    return static_cast<int>(L.points.size()) - 1;
  };
  auto line = [](Vec2 a, Vec2 b) { return [a, b](double t) { return Vec2(a + t * (b - a)); }; };

  // outer channel, counter-clockwise
  const int c0 = add({0, 0}), c1 = add({bg::length, 0}), c2 = add({bg::length, bg::height}), c3 = add({0, bg::height});
  add_chain(L, c0, sample_curve(line(L.points[c0], L.points[c1]), h), c1, "fixed");
  add_chain(L, c1, sample_curve(line(L.points[c1], L.points[c2]), h), c2, "fixed");
  add_chain(L, c2, sample_curve(line(L.points[c2], L.points[c3]), h), c3, "fixed");
  add_chain(L, c3, sample_curve(line(L.points[c3], L.points[c0]), h), c0, "fixed");

  // obstacle: arc from the top junction counter-clockwise to the bottom one,
  // then along the flap
  const int top = add({x0, bg::flap_top});
  const int bottom = add({x0, bg::flap_bottom});
  const int tip_bottom = add({bg::flap_end, bg::flap_bottom});
  const int tip_top = add({bg::flap_end, bg::flap_top});
  const double a0 = std::atan2(bg::flap_top - bg::cy, x0 - bg::cx);
  const double a1 = 2.0 * M_PI + std::atan2(bg::flap_bottom - bg::cy, x0 - bg::cx);
  auto arc = [&](double t) {
    const double a = a0 + t * (a1 - a0);
    return Vec2(bg::cx + bg::radius * std::cos(a), bg::cy + bg::radius * std::sin(a));
  };
  const std::vector<Vec2> arc_samples = sample_curve(arc, h);
  const std::vector<Vec2> bottom_samples = uniform_samples(L.points[bottom], L.points[tip_bottom], flap_segments(h));
  const std::vector<Vec2> tip_samples = uniform_samples(L.points[tip_bottom], L.points[tip_top], tip_segments(h));
  std::vector<Vec2> top_samples = uniform_samples(L.points[top], L.points[tip_top], flap_segments(h));
  std::reverse(top_samples.begin(), top_samples.end());

  // segments run clockwise around the hole so the fluid lies to their left
  std::vector<Vec2> rev(arc_samples.rbegin(), arc_samples.rend());
  add_chain(L, bottom, rev, top, "fixed");
  add_chain(L, top, std::vector<Vec2>(top_samples.rbegin(), top_samples.rend()), tip_top, "moving");
  add_chain(L, tip_top, std::vector<Vec2>(tip_samples.rbegin(), tip_samples.rend()), tip_bottom, "moving");
  add_chain(L, tip_bottom, std::vector<Vec2>(bottom_samples.rbegin(), bottom_samples.rend()), bottom, "moving");

  L.obstacle.push_back(L.points[top]);
  L.obstacle.insert(L.obstacle.end(), arc_samples.begin(), arc_samples.end());
  L.obstacle.push_back(L.points[bottom]);
  L.obstacle.insert(L.obstacle.end(), bottom_samples.begin(), bottom_samples.end());
  L.obstacle.push_back(L.points[tip_bottom]);
  L.obstacle.insert(L.obstacle.end(), tip_samples.begin(), tip_samples.end());
  L.obstacle.push_back(L.points[tip_top]);
  L.obstacle.insert(L.obstacle.end(), top_samples.begin(), top_samples.end());
  return L;
}

bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

// Uniform bucket grid over the channel bounding box.
class PointGrid {
 public:
  explicit PointGrid(double cell)
      : cell_(cell),
        nx_(static_cast<int>(std::ceil(bg::length / cell)) + 1),
        ny_(static_cast<int>(std::ceil(bg::height / cell)) + 1),
        buckets_(static_cast<std::size_t>(nx_) * ny_) {}
  void insert(const Vec2& p, int id) { buckets_[index(ix(p.x()), iy(p.y()))].push_back(id); }
  template <class F>
  void visit(const Vec2& p, double radius, F&& f) const {
    const int i0 = ix(p.x() - radius), i1 = ix(p.x() + radius);
    const int j0 = iy(p.y() - radius), j1 = iy(p.y() + radius);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        for (int id : buckets_[index(i, j)]) f(id);
      }
    }
  }

 private:
  int ix(double x) const { return std::clamp(static_cast<int>(std::floor(x / cell_)), 0, nx_ - 1); }
  int iy(double y) const { return std::clamp(static_cast<int>(std::floor(y / cell_)), 0, ny_ - 1); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> buckets_;
};

bool in_diametral_disk(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (p - a).dot(p - b) <= 0.0;
}

}  // namespace

MeshPtr benchmark_mesh(int refinement) {
  BenchmarkMeshOptions o;
  o.refinement = refinement;
  return benchmark_mesh(o);
}

MeshPtr benchmark_mesh(const BenchmarkMeshOptions& options) {
  const Sizing h = make_sizing(options);
  BoundaryLayout L = boundary_layout(h);

  std::vector<Vec2> points = L.points;
  const int n_boundary_points = static_cast<int>(points.size());
  PointGrid grid(h.h_min);
  for (int i = 0; i < n_boundary_points; ++i) grid.insert(points[i], i);
  PointGrid segment_grid(h.h_max);
  for (std::size_t s = 0; s < L.segments.size(); ++s) {
    segment_grid.insert(0.5 * (points[L.segments[s].a] + points[L.segments[s].b]), static_cast<int>(s));
  }

  auto acceptable = [&](const Vec2& q) {
    if (!(q.x() > 0.0 && q.x() < bg::length && q.y() > 0.0 && q.y() < bg::height)) return false;
    if (inside_polygon(L.obstacle, q)) return false;
    const double rq = h(q);
    bool ok = true;
    grid.visit(q, 0.5 * (rq + h.h_max), [&](int id) {
      if (!ok) return;
      const double r = 0.5 * (rq + h(points[id]));
      if ((points[id] - q).squaredNorm() < r * r) ok = false;
    });
    if (!ok) return false;
    segment_grid.visit(q, h.h_max, [&](int s) {
      if (ok && in_diametral_disk(points[L.segments[s].a], points[L.segments[s].b], q)) ok = false;
    });
    return ok;
  };

  // Bridson sampling seeded from the boundary points
  CounterRng rng(options.seed, static_cast<std::uint64_t>(options.refinement));
  std::vector<int> active(n_boundary_points);
  for (int i = 0; i < n_boundary_points; ++i) active[i] = i;
  constexpr int attempts = 30;
  while (!active.empty()) {
    const std::size_t pick = rng.below(active.size());
    const Vec2 p = points[active[pick]];
    const double rp = h(p);
    bool found = false;
    for (int k = 0; k < attempts; ++k) {
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      const double rad = rp * (1.0 + rng.uniform());
      const Vec2 q = p + rad * Vec2(std::cos(ang), std::sin(ang));
      if (acceptable(q)) {
        points.push_back(q);
        const int id = static_cast<int>(points.size()) - 1;
        grid.insert(q, id);
        active.push_back(id);
        found = true;
        break;
      }
    }
    if (!found) {
      active[pick] = active.back();
      active.pop_back();
    }
  }

  std::vector<Cell> cells = delaunay_triangulate(points);
  std::vector<Cell> kept;
  kept.reserve(cells.size());
  for (const Cell& c : cells) {
    const Vec2 centroid = (points[c[0]] + points[c[1]] + points[c[2]]) / 3.0;
    if (!inside_polygon(L.obstacle, centroid)) kept.push_back(c);
  }

  // every boundary segment must be an edge of the triangulation
  std::map<std::pair<int, int>, int> edge_count;
  for (const Cell& c : kept) {
    for (int k = 0; k < 3; ++k) {
      const int a = c[k], b = c[(k + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(L.segments.size());
  for (const Segment& s : L.segments) {
    if (!edge_count.count({std::min(s.a, s.b), std::max(s.a, s.b)})) {
      throw std::runtime_error("benchmark mesh lost a boundary segment");
    }
    boundary.push_back({{s.a, s.b}, s.tag});
  }
  return make_mesh(std::move(points), std::move(kept), std::move(boundary));
}

MeshPtr flap_solid_mesh(const BenchmarkMeshOptions& options) {
  const Sizing h = make_sizing(options);
  const int nx = flap_segments(h), ny = tip_segments(h);
  const double x0 = bg::flap_start();
  const MeshPtr base = rectangle_mesh(x0, bg::flap_end, bg::flap_bottom, bg::flap_top, nx, ny);
  // retag by side
  std::vector<BoundaryEdge> boundary = base->boundary_edges();
  const double tol = 1e-12;
  for (BoundaryEdge& e : boundary) {
    const Vec2 m = 0.5 * (base->vertex(e.vertices[0]) + base->vertex(e.vertices[1]));
    if (std::abs(m.x() - x0) < tol) e.tag = "clamped";
    else if (std::abs(m.x() - bg::flap_end) < tol) e.tag = "tip";
    else if (std::abs(m.y() - bg::flap_top) < tol) e.tag = "top";
    else e.tag = "bottom";
  }
  return make_mesh(base->vertices(), base->cells(), std::move(boundary));
}

}  // namespace meshmotion
