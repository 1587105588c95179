#include "caries/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caries/error.hpp"

namespace caries {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw ShapeError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, 0);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw InvalidPolygonError("polygon needs at least 3 vertices, got " +
                              std::to_string(vertices_.size()));
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i] == vertices_[(i + 1) % vertices_.size()]) {
      throw InvalidPolygonError("polygon has repeated consecutive vertex at index " +
                                std::to_string(i));
    }
  }
}

BBox BBox::make(int x_min, int y_min, int x_max, int y_max) {
  if (x_min >= x_max || y_min >= y_max) {
    throw ConfigError("empty box (" + std::to_string(x_min) + ", " + std::to_string(y_min) + ", " +
                      std::to_string(x_max) + ", " + std::to_string(y_max) + ")");
  }
  return BBox{x_min, y_min, x_max, y_max};
}

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
  BinaryMask mask(width, height);
  const auto verts = poly.vertices();
  const std::size_t n = verts.size();

  double y_lo = verts[0].y;
  double y_hi = verts[0].y;
  for (const auto& v : verts) {
    y_lo = std::min(y_lo, v.y);
    y_hi = std::max(y_hi, v.y);
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(y_lo - 0.5)));
  const int row_end = std::min(height, static_cast<int>(std::ceil(y_hi + 0.5)) + 1);

  std::vector<double> crossings;
  crossings.reserve(n);
  for (int row = row_begin; row < row_end; ++row) {
    const double y = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = verts[i];
      const Point& b = verts[j];
      if ((a.y > y) != (b.y > y)) {
        // Same expression as the classic crossing-number test, so the
        // scanline fill agrees bit-for-bit with per-pixel membership.
        crossings.push_back((b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x);
      }
    }
    if (crossings.empty()) continue;
    if (crossings.size() % 2 != 0) {
      throw InvalidPolygonError("odd crossing count while rasterizing");
    }
    std::sort(crossings.begin(), crossings.end());
    // With sorted crossings, a center x is inside iff lo <= x < hi for some
    // consecutive pair (lo, hi).
    for (std::size_t k = 0; k < crossings.size(); k += 2) {
      const double lo = crossings[k];
      const double hi = crossings[k + 1];
      int col = static_cast<int>(std::ceil(lo - 0.5));
      while (col + 0.5 < lo) ++col;
      while (col - 0.5 >= lo) --col;
      for (col = std::max(col, 0); col < width && col + 0.5 < hi; ++col) mask.set(row, col);
    }
  }
  return mask;
}

std::vector<PixelComponent> connected_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  std::vector<PixelComponent> components;
  std::vector<Pixel> stack;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      if (!mask.at(r, c) || visited[idx]) continue;
      PixelComponent comp;
      visited[idx] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = p.row + dr;
            const int nc = p.col + dc;
            if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
            const std::size_t nidx = static_cast<std::size_t>(nr) * w + nc;
            if (visited[nidx] || !mask.at(nr, nc)) continue;
            visited[nidx] = 1;
            stack.push_back({nr, nc});
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  }
  return components;
}

BBox tight_bbox(std::span<const Pixel> component) {
  if (component.empty()) throw EmptyComponentError("tight_bbox of an empty component");
  BBox box{component[0].col, component[0].row, component[0].col + 1, component[0].row + 1};
  for (const auto& p : component) {
    box.x_min = std::min(box.x_min, p.col);
    box.y_min = std::min(box.y_min, p.row);
    box.x_max = std::max(box.x_max, p.col + 1);
    box.y_max = std::max(box.y_max, p.row + 1);
  }
  return box;
}

bool clip_box(const BBox& box, int width, int height, BBox& out) {
  out.x_min = std::max(box.x_min, 0);
  out.y_min = std::max(box.y_min, 0);
  out.x_max = std::min(box.x_max, width);
  out.y_max = std::min(box.y_max, height);
  return out.x_min < out.x_max && out.y_min < out.y_max;
}

double jaccard_box_mask(const BBox& box, const BinaryMask& mask) {
  const std::int64_t mask_count = static_cast<std::int64_t>(mask.count());
  BBox clipped;
  if (!clip_box(box, mask.width(), mask.height(), clipped)) {
    return 0.0;  // empty box vs mask: intersection is empty
  }
  std::int64_t inter = 0;
  for (int r = clipped.y_min; r < clipped.y_max; ++r) {
    for (int c = clipped.x_min; c < clipped.x_max; ++c) inter += mask.at(r, c) ? 1 : 0;
  }
  const std::int64_t uni = clipped.area() + mask_count - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_box_polygon(const BBox& box, const Polygon& poly, int width, int height) {
  return jaccard_box_mask(box, rasterize_polygon(poly, width, height));
}

double jaccard_box_box(const BBox& a, const BBox& b) {
  const std::int64_t iw = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const std::int64_t ih = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const std::int64_t inter = iw * ih;
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace caries
