#pragma once

// Raster pictures of leaves H_n^{-1}({x} x T^1), chain coverings D_{n,x} and
// orbits, written as binary PPM.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pseudocircle/ak.hpp"

namespace pseudocircle {

struct RGB {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const RGB&, const RGB&) = default;
};

inline constexpr RGB kWhite{255, 255, 255};
inline constexpr RGB kBlack{0, 0, 0};

/// Colour k of a fixed cyclic palette.
RGB palette(long k);
/// Blue to red as t runs over [0, 1].
RGB ramp(double t);

struct Viewport {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Pixel buffer over the viewport [x0, x1) x [y0, y1); y grows upwards.
/// With wrap set, each coordinate is first moved by an integer into [x0, x0 + 1) or [y0, y0 + 1).
class Canvas {
 public:
  Canvas(int width, int height, Viewport view = {}, bool wrap = true, RGB background = kWhite);

  int width() const { return width_; }
  int height() const { return height_; }
  const Viewport& viewport() const { return view_; }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  RGB at(int px, int py) const;
  void set(int px, int py, RGB c);
  /// Pixel column and row of a point, or false when it falls outside.
  bool to_pixel(Point p, int& px, int& py) const;
  void plot(Point p, RGB c, int radius = 0);
  /// Pixels per unit length along x and y.
  double scale_x() const { return width_ / (view_.x1 - view_.x0); }
  double scale_y() const { return height_ / (view_.y1 - view_.y0); }

  std::string ppm() const;
  void write_ppm(const std::string& path) const;

 private:
  int width_, height_;
  Viewport view_;
  bool wrap_;
  std::vector<std::uint8_t> pixels_;
};

struct TraceStats {
  long points = 0;
  bool complete = true;
};

/// Plots the lifted curve t -> c(t), t in [t0, t1], splitting parameter
/// intervals until consecutive points are less than one pixel apart or the
/// point budget is spent.
TraceStats trace_curve(Canvas& canvas, const std::function<Point(Real)>& c, Real t0, Real t1, RGB colour,
                       long max_points);

struct Rendering {
  Canvas canvas;
  TraceStats stats;
  std::string warning;
};

/// Viewport [lo, hi] x [0, 1] around the horizontal range of the lifted curve
/// c on [t0, t1], padded by 5%; the unit square when the range is below 1e-12.
Viewport fit_horizontal(const std::function<Point(Real)>& c, Real t0, Real t1);

/// H^{-1}({x} x [0, 1]), with the horizontal range fitted to the leaf.
Rendering render_leaf(const ConjugacyStack& H, double x, int resolution, long max_points = 1L << 24);

/// Outlines of H^{-1}((x - eps, x + eps) x B) for the N elements B of B(N), one colour each,
/// with the horizontal range fitted to the outlines.
Rendering render_chains(const ConjugacyStack& H, long N, double eps, double x, int resolution,
                        long max_points = 1L << 24);

/// f^i(seed) for i = 0..k-1, coloured by i.
Rendering render_orbit(const ConjugacyStack& H, const RotationVector& alpha, Point seed, long k, int resolution);

}  // namespace pseudocircle
