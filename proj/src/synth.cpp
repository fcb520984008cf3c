// Copyright 2026 The Stainscope Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "stainscope/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "stainscope/image_io.h"
#include "stainscope/morphology.h"
#include "stainscope/parallel.h"
#include "stainscope/patches.h"
#include "stainscope/rng.h"

namespace stainscope {

std::string_view to_string(SlideClass c) {
  switch (c) {
    case SlideClass::kNegative: return "negative";
    case SlideClass::kLow: return "low";
    case SlideClass::kHigh: return "high";
  }
  return "?";
}

void SynthSpec::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorKind::kConfig, msg); };
  check(n_negative >= 0 && n_low >= 0 && n_high >= 0, "synth slide counts must be >= 0");
  check(low_blobs.lo >= 1 && low_blobs.lo <= low_blobs.hi, "low_blobs must satisfy 1 <= lo <= hi");
  check(high_blobs.lo >= 1 && high_blobs.lo <= high_blobs.hi, "high_blobs must satisfy 1 <= lo <= hi");
  check(tissue_hue_lo <= tissue_hue_hi && blob_hue_lo <= blob_hue_hi, "hue ranges must be ordered");
  check(noise_sigma >= 0.0, "noise_sigma must be >= 0");
  check(blob_radius_lo >= 1.0 && blob_radius_lo <= blob_radius_hi, "blob radius range invalid");
  check(slide_size >= 512, "slide_size must be >= 512");
  check(site_spacing >= 16, "site_spacing must be >= 16");
  check(low_site_fraction >= 0.0 && low_site_fraction <= 1.0 && high_site_fraction >= 0.0 &&
            high_site_fraction <= 1.0,
        "site fractions must lie in [0, 1]");
  check(border_band >= 1, "border_band must be >= 1");
  check(annotations_per_slide >= 0, "annotations_per_slide must be >= 0");
  check(stride >= 1, "stride must be >= 1");
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Rgbd {
  double r, g, b;
};

Rgbd hsv_to_rgbd(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  const double hp = h / 60.0;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = v - c;
  Rgbd o{0, 0, 0};
  switch (static_cast<int>(hp) % 6) {
    case 0: o = {c, x, 0}; break;
    case 1: o = {x, c, 0}; break;
    case 2: o = {0, c, x}; break;
    case 3: o = {0, x, c}; break;
    case 4: o = {x, 0, c}; break;
    default: o = {c, 0, x}; break;
  }
  return {(o.r + m) * 255.0, (o.g + m) * 255.0, (o.b + m) * 255.0};
}

uint8_t to_u8(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

double clamped_noise(Rng& rng, double sigma, double limit) {
  return std::clamp(rng.normal() * sigma, -limit, limit);
}

// Bilinear value noise in [0, 1] with lattice spacing `cell`.
class ValueNoise {
 public:
  ValueNoise(int width, int height, int cell, Rng& rng)
      : cell_(cell), cols_(width / cell + 2), rows_(height / cell + 2), grid_(cols_ * rows_) {
    for (double& g : grid_) g = rng.uniform();
  }
  double at(int x, int y) const {
    const int gx = x / cell_;
    const int gy = y / cell_;
    const double fx = static_cast<double>(x % cell_) / cell_;
    const double fy = static_cast<double>(y % cell_) / cell_;
    const double a = g(gx, gy) * (1 - fx) + g(gx + 1, gy) * fx;
    const double b = g(gx, gy + 1) * (1 - fx) + g(gx + 1, gy + 1) * fx;
    return a * (1 - fy) + b * fy;
  }

 private:
  double g(int x, int y) const { return grid_[static_cast<size_t>(y) * cols_ + x]; }
  int cell_;
  int cols_;
  int rows_;
  std::vector<double> grid_;
};

// Bluish tissue texture; blue is kept above red so no pixel is brown.
class Texture {
 public:
  Texture(int width, int height, const SynthSpec& spec, Rng& rng)
      : spec_(spec), hue_(width, height, 64, rng), sat_(width, height, 32, rng), val_(width, height, 32, rng) {}

  void paint(Image& img, int x, int y, Rng& rng) const {
    const double h = spec_.tissue_hue_lo + (spec_.tissue_hue_hi - spec_.tissue_hue_lo) * hue_.at(x, y);
    const double s = 0.30 + 0.25 * sat_.at(x, y);
    const double v = 0.50 + 0.30 * val_.at(x, y);
    const Rgbd c = hsv_to_rgbd(h, s, v);
    const double sigma = spec_.noise_sigma;
    int r = to_u8(c.r + clamped_noise(rng, sigma, 2.5 * sigma));
    const int g = to_u8(c.g + clamped_noise(rng, sigma, 2.5 * sigma));
    int b = to_u8(c.b + clamped_noise(rng, sigma, 2.5 * sigma));
    if (r >= b) {
      r = std::min(r, 245);
      b = r + 10;
    }
    img.at(x, y, 0) = static_cast<uint8_t>(r);
    img.at(x, y, 1) = static_cast<uint8_t>(g);
    img.at(x, y, 2) = static_cast<uint8_t>(b);
  }

 private:
  const SynthSpec& spec_;
  ValueNoise hue_;
  ValueNoise sat_;
  ValueNoise val_;
};

std::vector<size_t> blob_pixels(const Blob& blob, int width, int height) {
  std::vector<size_t> px;
  const int x0 = std::max(0, static_cast<int>(std::floor(blob.cx - blob.a)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(blob.cx + blob.a)));
  const int y0 = std::max(0, static_cast<int>(std::floor(blob.cy - blob.b)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(blob.cy + blob.b)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = (x - blob.cx) / blob.a;
      const double dy = (y - blob.cy) / blob.b;
      if (dx * dx + dy * dy <= 1.0) px.push_back(static_cast<size_t>(y) * width + x);
    }
  }
  return px;
}

bool overlaps(const std::vector<size_t>& px, const BinaryMask& mask) {
  return std::any_of(px.begin(), px.end(), [&](size_t i) { return mask[i]; });
}

void paint_blob(Image& img, BinaryMask& support, const std::vector<size_t>& px, const SynthSpec& spec,
                Rng& rng) {
  const double h = rng.uniform(spec.blob_hue_lo, spec.blob_hue_hi);
  const Rgbd c = hsv_to_rgbd(h, rng.uniform(0.60, 0.85), rng.uniform(0.45, 0.65));
  const double sigma = spec.noise_sigma / 2.0;
  auto data = img.data();
  auto bits = support.bits();
  for (size_t i : px) {
    data[3 * i] = to_u8(c.r + clamped_noise(rng, sigma, 2.0 * sigma));
    data[3 * i + 1] = to_u8(c.g + clamped_noise(rng, sigma, 2.0 * sigma));
    data[3 * i + 2] = to_u8(c.b + clamped_noise(rng, sigma, 2.0 * sigma));
    bits[i] = 1;
  }
}

// Star-shaped region r(theta) = r0 (1 + sum_k a_k sin(k theta + phi_k)).
struct Region {
  double cx = 0.0;
  double cy = 0.0;
  double r0 = 0.0;
  double amp[4] = {0, 0, 0, 0};
  double phase[4] = {0, 0, 0, 0};

  double radius(double theta) const {
    double f = 1.0;
    for (int k = 0; k < 4; ++k) f += amp[k] * std::sin((k + 2) * theta + phase[k]);
    return r0 * f;
  }
  double max_radius() const { return r0 * (1.0 + amp[0] + amp[1] + amp[2] + amp[3]); }
  bool contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    return std::hypot(dx, dy) <= radius(std::atan2(dy, dx));
  }
};

std::vector<Region> place_regions(int size, Rng& rng) {
  const int wanted = static_cast<int>(rng.uniform_int(1, 3));
  std::vector<Region> regions;
  for (int attempt = 0; attempt < 400 && static_cast<int>(regions.size()) < wanted; ++attempt) {
    Region r;
    r.r0 = rng.uniform(0.12, 0.20) * size;
    for (int k = 0; k < 4; ++k) {
      r.amp[k] = rng.uniform(0.0, 0.08);
      r.phase[k] = rng.uniform(0.0, 2.0 * kPi);
    }
    const double margin = r.max_radius() + 32.0;
    r.cx = rng.uniform(margin, size - margin);
    r.cy = rng.uniform(margin, size - margin);
    const bool clear = std::all_of(regions.begin(), regions.end(), [&](const Region& o) {
      return std::hypot(r.cx - o.cx, r.cy - o.cy) >= r.max_radius() + o.max_radius() + 48.0;
    });
    if (clear) regions.push_back(r);
  }
  return regions;
}

std::vector<WindowLabel> label_windows(const Image& img, const BinaryMask& blobs, int stride) {
  std::vector<WindowLabel> out;
  const TissueMask tm = tissue_mask(img);
  if (tm.degenerate || !tm.mask.any()) return out;
  const BinaryMask border = morphological_gradient(tm.mask, 1);
  for (PixelPoint c : border_patch_centers(border, stride)) {
    WindowLabel w;
    w.origin = patch_origin(c, img.width(), img.height());
    for (int y = w.origin.y; y < w.origin.y + kPatchSize && !w.positive; ++y) {
      for (int x = w.origin.x; x < w.origin.x + kPatchSize; ++x) {
        if (blobs.get(x, y)) {
          w.positive = true;
          break;
        }
      }
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace

Patch gen_healthy_patch(uint64_t seed, const SynthSpec& spec) {
  spec.validate();
  Rng rng(seed);
  Image img(kPatchSize, kPatchSize, 3);
  const Texture tex(kPatchSize, kPatchSize, spec, rng);
  for (int y = 0; y < kPatchSize; ++y) {
    for (int x = 0; x < kPatchSize; ++x) tex.paint(img, x, y, rng);
  }
  return Patch{std::move(img), {0, 0}, "synth"};
}

InfectedPatch gen_infected_patch(uint64_t seed, int n_blobs, const SynthSpec& spec) {
  require(n_blobs >= 1, ErrorKind::kInvalidInput, "an infected patch needs at least one blob");
  InfectedPatch out{gen_healthy_patch(seed, spec), BinaryMask(kPatchSize, kPatchSize)};
  Rng rng(derive_seed(seed, 1));
  for (int n = 0; n < n_blobs; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      Blob blob;
      blob.cx = rng.uniform(8.0, kPatchSize - 8.0);
      blob.cy = rng.uniform(8.0, kPatchSize - 8.0);
      blob.a = rng.uniform(spec.blob_radius_lo, spec.blob_radius_hi);
      blob.b = rng.uniform(spec.blob_radius_lo, spec.blob_radius_hi);
      const auto px = blob_pixels(blob, kPatchSize, kPatchSize);
      if (px.empty() || overlaps(px, out.blobs)) continue;
      paint_blob(out.patch.image, out.blobs, px, spec, rng);
      placed = true;
    }
    require(placed, ErrorKind::kPlacement,
            "could not place blob " + std::to_string(n + 1) + " of " + std::to_string(n_blobs) +
                " without overlap");
  }
  return out;
}

SyntheticSlide gen_synthetic_slide(uint64_t seed, SlideClass slide_class, const SynthSpec& spec) {
  spec.validate();
  const int size = spec.slide_size;
  Rng rng(seed);
  SyntheticSlide out;
  out.slide_class = slide_class;
  out.image = Image(size, size, 3);
  out.tissue = BinaryMask(size, size);
  out.blob_mask = BinaryMask(size, size);

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int l = static_cast<int>(std::lround(clamped_noise(rng, 2.0, 4.0)));
      out.image.at(x, y, 0) = static_cast<uint8_t>(232 + l);
      out.image.at(x, y, 1) = static_cast<uint8_t>(238 + l);
      out.image.at(x, y, 2) = static_cast<uint8_t>(250 + l);
    }
  }

  const std::vector<Region> regions = place_regions(size, rng);
  const Texture tex(size, size, spec, rng);
  for (const Region& r : regions) {
    const double m = r.max_radius() + 1.0;
    const int x0 = std::max(0, static_cast<int>(r.cx - m));
    const int x1 = std::min(size - 1, static_cast<int>(r.cx + m));
    const int y0 = std::max(0, static_cast<int>(r.cy - m));
    const int y1 = std::min(size - 1, static_cast<int>(r.cy + m));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!r.contains(x, y)) continue;
        out.tissue.set(x, y);
        tex.paint(out.image, x, y, rng);
      }
    }
  }

  if (slide_class != SlideClass::kNegative) {
    const bool high = slide_class == SlideClass::kHigh;
    const double fraction = high ? spec.high_site_fraction : spec.low_site_fraction;
    const IntRange per_site = high ? spec.high_blobs : spec.low_blobs;
    struct Site {
      size_t region;
      double theta;
    };
    std::vector<Site> sites;
    std::vector<Site> chosen;
    for (size_t ri = 0; ri < regions.size(); ++ri) {
      const int n = std::max(1, static_cast<int>(std::lround(2.0 * kPi * regions[ri].r0 / spec.site_spacing)));
      const double theta0 = rng.uniform(0.0, 2.0 * kPi);
      for (int j = 0; j < n; ++j) {
        const Site s{ri, theta0 + 2.0 * kPi * j / n};
        sites.push_back(s);
        if (rng.uniform() < fraction) chosen.push_back(s);
      }
    }
    if (chosen.empty()) chosen.push_back(sites[static_cast<size_t>(rng.uniform_int(0, sites.size() - 1))]);

    const double depth_lo = std::min<double>(spec.blob_radius_hi + 1.0, spec.border_band);
    for (const Site& site : chosen) {
      const Region& r = regions[site.region];
      const double half_arc = 0.5 * spec.site_spacing / r.radius(site.theta);
      const int n_blobs = static_cast<int>(rng.uniform_int(per_site.lo, per_site.hi));
      for (int n = 0; n < n_blobs; ++n) {
        for (int attempt = 0; attempt < 100; ++attempt) {
          const double theta = site.theta + rng.uniform(-half_arc, half_arc);
          const double depth = rng.uniform(depth_lo, spec.border_band);
          const double rr = r.radius(theta) - depth;
          Blob blob;
          blob.cx = r.cx + rr * std::cos(theta);
          blob.cy = r.cy + rr * std::sin(theta);
          blob.a = rng.uniform(spec.blob_radius_lo, spec.blob_radius_hi);
          blob.b = rng.uniform(spec.blob_radius_lo, spec.blob_radius_hi);
          const auto px = blob_pixels(blob, size, size);
          const bool inside = !px.empty() && std::all_of(px.begin(), px.end(),
                                                         [&](size_t i) { return out.tissue[i]; });
          if (!inside || overlaps(px, out.blob_mask)) continue;
          paint_blob(out.image, out.blob_mask, px, spec, rng);
          out.blobs.push_back(blob);
          break;
        }
      }
    }
  }

  out.windows = label_windows(out.image, out.blob_mask, spec.stride);
  return out;
}

std::vector<std::pair<std::string, SlideClass>> synth_slide_ids(const SynthSpec& spec) {
  std::vector<std::pair<std::string, SlideClass>> ids;
  auto add = [&](const char* prefix, int n, SlideClass c) {
    for (int i = 0; i < n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s_%03d", prefix, i);
      ids.emplace_back(buf, c);
    }
  };
  add("neg", spec.n_negative, SlideClass::kNegative);
  add("low", spec.n_low, SlideClass::kLow);
  add("high", spec.n_high, SlideClass::kHigh);
  return ids;
}

namespace {

// Up to `limit` windows, half positive where possible, in extraction order.
std::vector<size_t> pick_annotations(const std::vector<WindowLabel>& windows, int limit, uint64_t seed) {
  std::vector<size_t> all(windows.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (limit == 0 || windows.size() <= static_cast<size_t>(limit)) return all;
  std::vector<size_t> pos;
  std::vector<size_t> neg;
  for (size_t i : all) (windows[i].positive ? pos : neg).push_back(i);
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  const size_t cap = static_cast<size_t>(limit);
  const size_t room = neg.size() < cap ? cap - neg.size() : 0;
  const size_t n_pos = std::min(pos.size(), std::max(cap / 2, room));
  const size_t n_neg = std::min(neg.size(), cap - n_pos);
  std::vector<size_t> pick(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_pos));
  pick.insert(pick.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n_neg));
  std::sort(pick.begin(), pick.end());
  return pick;
}

uint64_t slide_seed(const SynthSpec& spec, SlideClass c, size_t index) {
  return derive_seed(spec.seed, static_cast<uint64_t>(c) * 100000 + index);
}

}  // namespace

DatasetManifest gen_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir, int jobs) {
  spec.validate();
  namespace fs = std::filesystem;
  const auto ids = synth_slide_ids(spec);
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  manifest.slides.resize(ids.size());
  std::vector<nlohmann::ordered_json> truth(ids.size());

  try {
    fs::create_directories(out_dir / "slides");
    fs::create_directories(out_dir / "patches");
  } catch (const fs::filesystem_error& e) {
    fail(ErrorKind::kIo, std::string("cannot create dataset directories: ") + e.what());
  }

  // Per-class index keeps each slide's seed independent of the other counts.
  std::vector<size_t> class_index(ids.size());
  {
    size_t counts[3] = {0, 0, 0};
    for (size_t i = 0; i < ids.size(); ++i) class_index[i] = counts[static_cast<int>(ids[i].second)]++;
  }

  parallel_for(ids.size(), jobs, [&](size_t i) {
    const auto& [id, cls] = ids[i];
    const uint64_t seed = slide_seed(spec, cls, class_index[i]);
    const SyntheticSlide slide = gen_synthetic_slide(seed, cls, spec);

    ManifestSlide& ms = manifest.slides[i];
    ms.slide_id = id;
    ms.image_path = "slides/" + id + ".png";
    ms.diagnosis = cls == SlideClass::kNegative ? SlideDiagnosis::kNegative : SlideDiagnosis::kPositive;
    ms.split = Split::kTrain;
    write_image(out_dir / ms.image_path, slide.image);

    for (size_t w : pick_annotations(slide.windows, spec.annotations_per_slide, derive_seed(seed, 7))) {
      const WindowLabel& win = slide.windows[w];
      Patch p{slide.image.crop(win.origin.x, win.origin.y, kPatchSize, kPatchSize), win.origin, id};
      ManifestPatch mp;
      mp.patch_path = "patches/" + patch_filename(p);
      mp.origin = win.origin;
      mp.label = win.positive ? PatchLabel::kPositive : PatchLabel::kNegative;
      write_image(out_dir / mp.patch_path, p.image);
      ms.patches.push_back(std::move(mp));
    }

    nlohmann::ordered_json blobs = nlohmann::ordered_json::array();
    for (const Blob& b : slide.blobs) blobs.push_back({b.cx, b.cy, b.a, b.b});
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const WindowLabel& w : slide.windows) {
      windows.push_back({{"origin", {w.origin.x, w.origin.y}}, {"positive", w.positive}});
    }
    truth[i] = {{"slide_id", id},
                {"class", to_string(cls)},
                {"blob_pixels", slide.blob_mask.count()},
                {"blobs", std::move(blobs)},
                {"windows", std::move(windows)}};
  });

  nlohmann::ordered_json doc;
  doc["seed"] = spec.seed;
  doc["slides"] = std::move(truth);
  {
    std::ofstream out(out_dir / "ground_truth.json", std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + (out_dir / "ground_truth.json").string());
    out << doc.dump(1) << "\n";
  }
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace stainscope
