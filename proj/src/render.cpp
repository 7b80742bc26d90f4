#include "pseudocircle/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace pseudocircle {

RGB palette(long k) {
  static constexpr RGB colours[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
                                    {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {23, 190, 207}};
  constexpr long n = sizeof(colours) / sizeof(colours[0]);
  return colours[((k % n) + n) % n];
}

RGB ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return {static_cast<std::uint8_t>(std::lround(255 * t)), 40, static_cast<std::uint8_t>(std::lround(255 * (1 - t)))};
}

Canvas::Canvas(int width, int height, Viewport view, bool wrap, RGB background)
    : width_(width), height_(height), view_(view), wrap_(wrap) {
  if (width < 1 || height < 1) throw PreconditionError("Canvas: size must be positive");
  if (!(view.x1 > view.x0 && view.y1 > view.y0)) throw PreconditionError("Canvas: empty viewport");
  pixels_.resize(static_cast<std::size_t>(3) * width * height);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = background.r;
    pixels_[i + 1] = background.g;
    pixels_[i + 2] = background.b;
  }
}

RGB Canvas::at(int px, int py) const {
  const auto i = static_cast<std::size_t>(3) * (static_cast<std::size_t>(py) * width_ + px);
  return {pixels_.at(i), pixels_.at(i + 1), pixels_.at(i + 2)};
}

void Canvas::set(int px, int py, RGB c) {
  if (px < 0 || py < 0 || px >= width_ || py >= height_) return;
  const auto i = static_cast<std::size_t>(3) * (static_cast<std::size_t>(py) * width_ + px);
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

bool Canvas::to_pixel(Point p, int& px, int& py) const {
  if (wrap_) {
    p.x -= std::floor(p.x - static_cast<Real>(view_.x0));
    p.y -= std::floor(p.y - static_cast<Real>(view_.y0));
  }
  const double u = (static_cast<double>(p.x) - view_.x0) / (view_.x1 - view_.x0);
  const double v = (static_cast<double>(p.y) - view_.y0) / (view_.y1 - view_.y0);
  if (!(u >= 0 && u < 1 && v >= 0 && v < 1)) return false;
  px = std::min(width_ - 1, static_cast<int>(u * width_));
  py = height_ - 1 - std::min(height_ - 1, static_cast<int>(v * height_));
  return true;
}

void Canvas::plot(Point p, RGB c, int radius) {
  int px = 0, py = 0;
  if (!to_pixel(p, px, py)) return;
  for (int dx = -radius; dx <= radius; ++dx)
    for (int dy = -radius; dy <= radius; ++dy) set(px + dx, py + dy, c);
}

std::string Canvas::ppm() const {
  std::string out = "P6\n" + std::to_string(width_) + " " + std::to_string(height_) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels_.data()), pixels_.size());
  return out;
}

void Canvas::write_ppm(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  const auto data = ppm();
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed: " + path);
}

TraceStats trace_curve(Canvas& canvas, const std::function<Point(Real)>& c, Real t0, Real t1, RGB colour,
                       long max_points) {
  TraceStats st;
  const double sx = canvas.scale_x(), sy = canvas.scale_y();
  const int seeds = 1024;
  struct Seg {
    Real a, b;
    Point pa, pb;
  };
  std::vector<Seg> todo;
  Point prev = c(t0);
  canvas.plot(prev, colour);
  st.points = 1;
  for (int k = 1; k <= seeds; ++k) {
    const Real t = t0 + (t1 - t0) * k / seeds;
    const Point cur = c(t);
    todo.push_back({t0 + (t1 - t0) * (k - 1) / seeds, t, prev, cur});
    prev = cur;
  }
  std::reverse(todo.begin(), todo.end());
  // Depth-first, left to right, so plotting order is deterministic.
  while (!todo.empty()) {
    const Seg s = todo.back();
    todo.pop_back();
    const double d = std::hypot(static_cast<double>(s.pb.x - s.pa.x) * sx, static_cast<double>(s.pb.y - s.pa.y) * sy);
    if (d < 1.0 || st.points >= max_points || s.b - s.a < 1e-15L) {
      if (d >= 1.0) st.complete = false;
      canvas.plot(s.pb, colour);
      ++st.points;
      continue;
    }
    const Real mid = (s.a + s.b) / 2;
    const Point pm = c(mid);
    ++st.points;
    todo.push_back({mid, s.b, pm, s.pb});
    todo.push_back({s.a, mid, s.pa, pm});
  }
  return st;
}

namespace {

std::string budget_warning(const TraceStats& st) {
  return st.complete ? std::string()
                     : "refinement budget of " + std::to_string(st.points) + " points spent; image is coarse";
}

}  // namespace

Viewport fit_horizontal(const std::function<Point(Real)>& c, Real t0, Real t1) {
  const int samples = 4096;
  Real lo = c(t0).x, hi = lo;
  for (int k = 1; k <= samples; ++k) {
    const Real v = c(t0 + (t1 - t0) * k / samples).x;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12L) return {};
  const double pad = 0.05 * static_cast<double>(hi - lo);
  return {static_cast<double>(lo) - pad, 0.0, static_cast<double>(hi) + pad, 1.0};
}

Rendering render_leaf(const ConjugacyStack& H, double x, int resolution, long max_points) {
  const auto leaf = [&](Real t) { return H.inverse_lift({static_cast<Real>(x), t}); };
  Canvas canvas(resolution, resolution, fit_horizontal(leaf, 0, 1));
  const auto st = trace_curve(canvas, leaf, 0, 1, kBlack, max_points);
  return {std::move(canvas), st, budget_warning(st)};
}

Rendering render_chains(const ConjugacyStack& H, long N, double eps, double x, int resolution, long max_points) {
  if (N < 1) throw PreconditionError("render_chains: N must be positive");
  const Real dn = static_cast<Real>(N);
  const Real x0 = x - eps, x1 = x + eps;
  Viewport view = fit_horizontal([&](Real t) { return H.inverse_lift({x0, t}); }, 0, 1);
  const Viewport right = fit_horizontal([&](Real t) { return H.inverse_lift({x1, t}); }, 0, 1);
  if (view.x1 - view.x0 < 1 && right.x1 - right.x0 < 1) {
    view.x0 = std::min(view.x0, right.x0);
    view.x1 = std::max(view.x1, right.x1);
  } else {
    view = {};
  }
  Canvas canvas(resolution, resolution, view);
  TraceStats total;
  for (long i = 0; i < N; ++i) {
    const Real y0 = (static_cast<Real>(i) - 1.25L) / dn, y1 = (static_cast<Real>(i) + 0.25L) / dn;
    // Boundary by arclength parameter s in [0, 4): bottom, right, top, left.
    auto edge = [&](Real s) -> Point {
      const int side = std::min(3, static_cast<int>(s));
      const Real u = s - side;
      switch (side) {
        case 0: return {x0 + (x1 - x0) * u, y0};
        case 1: return {x1, y0 + (y1 - y0) * u};
        case 2: return {x1 - (x1 - x0) * u, y1};
        default: return {x0, y1 - (y1 - y0) * u};
      }
    };
    const long budget = std::max(1L, (max_points - total.points) / (N - i));
    const auto st = trace_curve(
        canvas, [&](Real s) { return H.inverse_lift(edge(s)); }, 0, 4, palette(i), budget);
    total.points += st.points;
    total.complete = total.complete && st.complete;
  }
  return {std::move(canvas), total, budget_warning(total)};
}

Rendering render_orbit(const ConjugacyStack& H, const RotationVector& alpha, Point seed, long k, int resolution) {
  if (k < 1) throw PreconditionError("render_orbit: k must be positive");
  Canvas canvas(resolution, resolution);
  const int radius = std::max(0, resolution / 256);
  const Point w = H.forward(seed);
  for (long i = 0; i < k; ++i) {
    const Point a = alpha.multiple(i);
    const Point z = H.inverse({w.x + a.x, w.y + a.y});
    canvas.plot(z, ramp(k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1)), radius);
  }
  TraceStats st;
  st.points = k;
  return {std::move(canvas), st, {}};
}

}  // namespace pseudocircle
