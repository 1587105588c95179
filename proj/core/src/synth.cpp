#include "caries/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "caries/error.hpp"
#include "caries/pgm.hpp"
#include "caries/rng.hpp"

namespace caries {

namespace {

constexpr int kPlacementAttempts = 100;
constexpr int kSeparation = 2;  // min Chebyshev gap between annotations, px
constexpr double kMarginDarkening = 0.45;
constexpr double kJitterPerLooseness = 0.15;
// Where the diagonal edges sit between tangent to the dilated core (0) and
// the corners of its bounding box (1).
constexpr double kCornerLooseness = 0.5;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Background {
  std::vector<double> intensity;
  std::vector<std::uint8_t> interior;  // fully inside a tooth band
};

Background render_background(const PhantomConfig& cfg, Rng& rng) {
  const int w = cfg.image_width;
  const int h = cfg.image_height;
  const double two_pi = 2.0 * std::numbers::pi;

  const double phase_x = rng.uniform(0.0, two_pi);
  const double phase_y = rng.uniform(0.0, two_pi);
  const double edge_wavelength = rng.uniform(0.20, 0.35) * w;
  const std::array<std::array<double, 2>, 2> band_rows{{{0.11 * h, 0.45 * h}, {0.55 * h, 0.89 * h}}};
  std::array<std::array<double, 2>, 2> edge_phase{};
  for (auto& band : edge_phase) {
    band[0] = rng.uniform(0.0, two_pi);
    band[1] = rng.uniform(0.0, two_pi);
  }
  const double edge_amplitude = 0.03 * h;
  const double tooth_period = rng.uniform(0.22, 0.31) * w;
  const double tooth_phase = rng.uniform(0.0, two_pi);

  Background bg;
  bg.intensity.resize(static_cast<std::size_t>(w) * h);
  bg.interior.assign(bg.intensity.size(), 0);
  for (int r = 0; r < h; ++r) {
    const double y = r + 0.5;
    for (int c = 0; c < w; ++c) {
      const double x = c + 0.5;
      const double dark = 40.0 + 10.0 * std::sin(x / 23.0 + phase_x) + 8.0 * std::sin(y / 17.0 + phase_y);
      double band = 0.0;
      for (std::size_t b = 0; b < band_rows.size(); ++b) {
        const double top = band_rows[b][0] + edge_amplitude * std::sin(two_pi * x / edge_wavelength + edge_phase[b][0]);
        const double bottom = band_rows[b][1] + edge_amplitude * std::sin(two_pi * x / edge_wavelength + edge_phase[b][1]);
        band = std::max(band, clamp01(y - top + 0.5) * clamp01(bottom - y + 0.5));
      }
      const double tooth = 175.0 + 30.0 * std::sin(two_pi * x / tooth_period + tooth_phase);
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      bg.intensity[idx] = dark * (1.0 - band) + tooth * band;
      bg.interior[idx] = band >= 1.0 ? 1 : 0;
    }
  }
  return bg;
}

// Octagon around the core ellipse after a square (Chebyshev) dilation by
// `margin`: axis-aligned edges touch the dilated extremes, diagonal edges are
// drawn loosely part way out to the bounding-box corners. Each vertex then
// moves radially outward by up to `jitter`. Every step only grows the region.
std::vector<Point> annotation_outline(const Lesion& les, double jitter, Rng& rng) {
  std::array<double, 8> nx{};
  std::array<double, 8> ny{};
  std::array<double, 8> offset{};
  for (int k = 0; k < 8; ++k) {
    const double angle = k * std::numbers::pi / 4.0;
    nx[k] = std::cos(angle);
    ny[k] = std::sin(angle);
    const double tangent =
        std::sqrt(les.semi_x * les.semi_x * nx[k] * nx[k] + les.semi_y * les.semi_y * ny[k] * ny[k]) +
        les.margin * (std::abs(nx[k]) + std::abs(ny[k]));
    const double corner = (les.semi_x + les.margin) * std::abs(nx[k]) + (les.semi_y + les.margin) * std::abs(ny[k]);
    offset[k] = tangent + kCornerLooseness * (corner - tangent);
  }
  std::vector<Point> verts;
  verts.reserve(8);
  for (int k = 0; k < 8; ++k) {
    const int j = (k + 1) % 8;
    const double det = nx[k] * ny[j] - ny[k] * nx[j];
    double vx = (offset[k] * ny[j] - ny[k] * offset[j]) / det;
    double vy = (nx[k] * offset[j] - offset[k] * nx[j]) / det;
    const double radius = std::hypot(vx, vy);
    const double scale = 1.0 + rng.uniform(0.0, jitter) / radius;
    vx *= scale;
    vy *= scale;
    verts.push_back({les.center_x + vx, les.center_y + vy});
  }
  return verts;
}

// Radius of an axis-aligned ellipse in the direction (dx, dy) from its center.
double ellipse_radius(double semi_x, double semi_y, double dx, double dy) {
  const double rho = std::hypot(dx, dy);
  if (rho == 0.0) return std::min(semi_x, semi_y);
  const double cos_t = dx / rho;
  const double sin_t = dy / rho;
  return semi_x * semi_y / std::hypot(semi_y * cos_t, semi_x * sin_t);
}

bool fits(const BinaryMask& raster, const Background& bg, const BinaryMask& occupied) {
  const int w = raster.width();
  const int h = raster.height();
  bool any = false;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!raster.at(r, c)) continue;
      any = true;
      if (!bg.interior[static_cast<std::size_t>(r) * w + c]) return false;
      for (int dr = -kSeparation; dr <= kSeparation; ++dr) {
        for (int dc = -kSeparation; dc <= kSeparation; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr >= 0 && rr < h && cc >= 0 && cc < w && occupied.at(rr, cc)) return false;
        }
      }
    }
  }
  return any;
}

void darken(const Lesion& les, std::vector<double>& darkening, int w, int h) {
  const double reach = std::max(les.semi_x, les.semi_y) + les.margin + 2.0;
  const int r0 = std::max(0, static_cast<int>(std::floor(les.center_y - reach)));
  const int r1 = std::min(h, static_cast<int>(std::ceil(les.center_y + reach)) + 1);
  const int c0 = std::max(0, static_cast<int>(std::floor(les.center_x - reach)));
  const int c1 = std::min(w, static_cast<int>(std::ceil(les.center_x + reach)) + 1);
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) {
      const double dx = c + 0.5 - les.center_x;
      const double dy = r + 0.5 - les.center_y;
      const double rho = std::hypot(dx, dy);
      const double core = rho - ellipse_radius(les.semi_x, les.semi_y, dx, dy);
      const double outer = rho - ellipse_radius(les.semi_x + les.margin, les.semi_y + les.margin, dx, dy);
      // One-pixel linear ramps smooth both edges.
      const double d = std::max(les.depth * clamp01(0.5 - core),
                                kMarginDarkening * les.depth * clamp01(0.5 - outer));
      double& slot = darkening[static_cast<std::size_t>(r) * w + c];
      slot = std::max(slot, d);
    }
  }
}

}  // namespace

void PhantomConfig::validate() const {
  if (image_width < 1 || image_height < 1) throw ConfigError("image dimensions must be positive");
  if (sample_count < 1) throw ConfigError("sample_count must be at least 1");
  if (lesions_per_image.min < 0 || lesions_per_image.max < lesions_per_image.min) {
    throw ConfigError("lesions_per_image must satisfy 0 <= min <= max");
  }
  if (!(lesion_radius.min >= 2.0) || lesion_radius.max < lesion_radius.min) {
    throw ConfigError("lesion_radius must satisfy 2 <= min <= max");
  }
  if (!(looseness >= 0.0)) throw ConfigError("looseness must be non-negative");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (!(2.0 * (lesion_radius.max + looseness) < std::min(image_width, image_height))) {
    throw ConfigError("lesion does not fit in canvas: 2*(radius max + looseness) must be < min(width, height)");
  }
}

PhantomSample render_phantom(const PhantomConfig& cfg, std::size_t index) {
  cfg.validate();
  const int w = cfg.image_width;
  const int h = cfg.image_height;
  Rng rng(cfg.seed, index);

  Background bg = render_background(cfg, rng);
  BinaryMask occupied(w, h);
  std::vector<double> darkening(bg.intensity.size(), 0.0);
  PhantomSample sample{GrayImage(w, h), {}, {}};

  const auto lesion_count = rng.uniform_int(cfg.lesions_per_image.min, cfg.lesions_per_image.max);
  const double jitter = kJitterPerLooseness * cfg.looseness;
  for (std::int64_t l = 0; l < lesion_count; ++l) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      Lesion les;
      les.semi_x = rng.uniform(cfg.lesion_radius.min, cfg.lesion_radius.max);
      les.semi_y = rng.uniform(cfg.lesion_radius.min, cfg.lesion_radius.max);
      les.margin = rng.uniform(0.0, cfg.looseness);
      les.center_x = rng.uniform(0.0, w);
      les.center_y = rng.uniform(0.0, h);
      les.depth = rng.uniform(55.0, 85.0);
      std::vector<Point> outline = annotation_outline(les, jitter, rng);
      const bool inside_canvas = std::all_of(outline.begin(), outline.end(), [&](const Point& p) {
        return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h;
      });
      if (!inside_canvas) continue;
      Polygon poly(std::move(outline));
      const BinaryMask raster = rasterize_polygon(poly, w, h);
      if (!fits(raster, bg, occupied)) continue;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (raster.at(r, c)) occupied.set(r, c);
        }
      }
      darken(les, darkening, w, h);
      sample.regions.push_back(std::move(poly));
      sample.lesions.push_back(les);
      break;
    }
  }

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      const double noise = cfg.noise_sigma > 0.0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0;
      const double v = std::round(bg.intensity[idx] - darkening[idx] + noise);
      sample.image.at(r, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return sample;
}

BinaryMask lesion_core_mask(const Lesion& les, int width, int height) {
  BinaryMask mask(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double ex = (c + 0.5 - les.center_x) / les.semi_x;
      const double ey = (r + 0.5 - les.center_y) / les.semi_y;
      if (ex * ex + ey * ey <= 1.0) mask.set(r, c);
    }
  }
  return mask;
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split label '" + name + "'");
}

bool DatasetManifest::has_splits() const {
  return !records.empty() && std::all_of(records.begin(), records.end(),
                                         [](const SampleRecord& r) { return r.split.has_value(); });
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

DatasetManifest generate_dataset(const PhantomConfig& config, const std::filesystem::path& output_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec || !std::filesystem::is_directory(output_dir)) {
    throw IoError("cannot create output directory " + output_dir.string());
  }

  DatasetManifest manifest;
  manifest.records.reserve(static_cast<std::size_t>(config.sample_count));
  for (int i = 0; i < config.sample_count; ++i) {
    PhantomSample sample = render_phantom(config, static_cast<std::size_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "img_%05d.pgm", i);
    write_pgm(sample.image, output_dir / name);
    manifest.records.push_back(
        SampleRecord{name, config.image_width, config.image_height, std::move(sample.regions), std::nullopt});
  }
  save_manifest(manifest, output_dir / "manifest.json");
  return manifest;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double test_fraction,
                              double val_fraction_of_train, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0) ||
      !(val_fraction_of_train >= 0.0 && val_fraction_of_train < 1.0)) {
    throw ConfigError("split fractions must lie in [0, 1)");
  }
  const std::size_t n = manifest.records.size();
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n - n_test) * val_fraction_of_train));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  DatasetManifest out = manifest;
  for (std::size_t k = 0; k < n; ++k) {
    Split label = Split::train;
    if (k < n_test) {
      label = Split::test;
    } else if (k < n_test + n_val) {
      label = Split::val;
    }
    out.records[order[k]].split = label;
  }
  return out;
}

BinaryMask region_mask(const SampleRecord& record) {
  BinaryMask mask(record.width, record.height);
  for (const auto& poly : record.regions) {
    const BinaryMask one = rasterize_polygon(poly, record.width, record.height);
    for (int r = 0; r < record.height; ++r) {
      for (int c = 0; c < record.width; ++c) {
        if (one.at(r, c)) mask.set(r, c);
      }
    }
  }
  return mask;
}

}  // namespace caries
