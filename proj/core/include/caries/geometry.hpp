#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace caries {

/// 8-bit grayscale raster, row-major.
class GrayImage {
public:
  GrayImage(int width, int height);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int row, int col) const { return data_[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return data_[index(row, col)]; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const GrayImage&) const = default;

private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Boolean raster, row-major. Stored as bytes (0 or 1).
class BinaryMask {
public:
  BinaryMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int row, int col) const { return data_[index(row, col)] != 0; }
  void set(int row, int col, bool value = true) { data_[index(row, col)] = value ? 1 : 0; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::size_t count() const noexcept;

  bool operator==(const BinaryMask&) const = default;

private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/// Closed polygon in continuous pixel coordinates. The closing edge from the
/// last vertex back to the first is implicit.
class Polygon {
public:
  /// Throws InvalidPolygonError for fewer than 3 vertices or repeated
  /// consecutive vertices (including last/first).
  explicit Polygon(std::vector<Point> vertices);

  std::span<const Point> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  bool operator==(const Polygon&) const = default;

private:
  std::vector<Point> vertices_;
};

/// Half-open integer box [x_min, x_max) x [y_min, y_max).
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 1;
  int y_max = 1;

  /// Validating factory; throws ConfigError when the box is empty.
  static BBox make(int x_min, int y_min, int x_max, int y_max);

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  std::int64_t area() const noexcept { return std::int64_t{width()} * height(); }

  bool operator==(const BBox&) const = default;
};

struct Pixel {
  int row = 0;
  int col = 0;

  auto operator<=>(const Pixel&) const = default;
};

using PixelComponent = std::vector<Pixel>;

/// Foreground iff the pixel center (c + 0.5, r + 0.5) is inside the polygon
/// under the even-odd rule.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

/// 8-connected components of the foreground. Components are ordered by their
/// smallest (row, col) member; pixels within a component are sorted.
std::vector<PixelComponent> connected_components(const BinaryMask& mask);

BBox tight_bbox(std::span<const Pixel> component);

/// Clips the box to a width x height canvas. Returns false when nothing is left.
bool clip_box(const BBox& box, int width, int height, BBox& out);

/// Pixel-set IoU between a (canvas-clipped) box and a mask.
double jaccard_box_mask(const BBox& box, const BinaryMask& mask);

/// Pixel-set IoU between a box and the rasterized polygon.
double jaccard_box_polygon(const BBox& box, const Polygon& poly, int width, int height);

/// Analytic IoU from integer extents.
double jaccard_box_box(const BBox& a, const BBox& b);

}  // namespace caries
