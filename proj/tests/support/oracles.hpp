#pragma once

// Reference implementations used only to check the library: brute-force
// rasterization, flood-fill labeling, naive convolution, exhaustive matching
// and central finite differences.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "caries/geometry.hpp"
#include "caries/rng.hpp"
#include "caries/tensor.hpp"

namespace oracle {

/// Even-odd membership of (x, y) by casting a ray to +x and counting crossings.
bool point_in_polygon(const caries::Polygon& poly, double x, double y);

/// Tests every pixel center independently.
caries::BinaryMask brute_force_raster(const caries::Polygon& poly, int width, int height);

/// Label image from a queue-based flood fill with 8-connectivity; 0 is background.
std::vector<int> flood_fill_labels(const caries::BinaryMask& mask, int& label_count);

/// Six nested loops, zero padding, stride 1.
caries::BasicTensor<double> naive_conv(const caries::BasicTensor<double>& input,
                                       const caries::BasicTensor<double>& weights,
                                       const std::vector<double>& bias, int padding);

/// Size of a maximum one-to-one matching over `eligible` (rows x cols), by
/// trying every assignment.
std::size_t max_matching(const std::vector<std::vector<bool>>& eligible);

/// Random simple-or-not polygon with `n` vertices inside [0, w] x [0, h].
caries::Polygon random_polygon(caries::Rng& rng, int n, double w, double h);

/// Central difference of f at every coordinate of x; x is restored afterwards.
std::vector<double> numeric_gradient(const std::function<double()>& f, std::vector<double*> coords, double step);

/// |a - n| <= max(abs_tol, rel_tol * max(|a|, |n|)) for every entry.
/// Returns an empty string on success, else a description of the worst entry.
std::string compare_gradients(const std::vector<double>& analytic, const std::vector<double>& numeric,
                              double rel_tol = 1e-3, double abs_tol = 1e-5);

caries::BasicTensor<double> random_tensor(caries::Rng& rng, caries::Shape shape, double lo = -1.0, double hi = 1.0);

/// Counts (tp, fp) for four readers against 2000 truths whose rounded
/// precision/recall percentages are 61.5/80.5, 63.0/47.7, 81.5/43.0, 89.1/34.4.
struct ReaderCounts {
  std::string name;
  std::int64_t tp;
  std::int64_t fp;
  std::int64_t fn;
};
std::vector<ReaderCounts> table_fixture();
constexpr std::int64_t kFixtureF1Percent[4] = {70, 54, 56, 50};

}  // namespace oracle
