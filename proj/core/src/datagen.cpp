#include "confmask/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "confmask/errors.hpp"
#include "confmask/rng.hpp"

namespace confmask {

void SynthParams::validate() const {
  if (width == 0 || height == 0) throw ConfigError("grid must be nonempty");
  if (!(radius_min >= 1.0) || !(radius_max >= radius_min))
    throw ConfigError("radius range must satisfy 1 <= min <= max");
  const double limit = static_cast<double>(std::min(width, height));
  if (2.0 * radius_max + 2.0 > limit)
    throw ConfigError("radius range does not fit the grid: need 2*max+2 <= " +
                      std::to_string(limit));
  if (!(score_sharpness > 0.0))
    throw ConfigError("score sharpness must be positive");
  if (!(fp_rate >= 0.0 && fp_rate <= 1.0))
    throw ConfigError("fp rate must lie in [0, 1]");
}

namespace {

constexpr std::int32_t kFar = 1 << 28;

/// Two-pass L1 distance to the nearest set pixel of `target`; kFar when
/// the grid holds none.
std::vector<std::int32_t> l1_distance(const BinaryMask& target) {
  const std::size_t h = target.height();
  const std::size_t w = target.width();
  std::vector<std::int32_t> d(h * w, kFar);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (target.get(i, j)) d[i * w + j] = 0;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      std::int32_t& cur = d[i * w + j];
      if (i > 0) cur = std::min(cur, d[(i - 1) * w + j] + 1);
      if (j > 0) cur = std::min(cur, d[i * w + j - 1] + 1);
    }
  for (std::size_t i = h; i-- > 0;)
    for (std::size_t j = w; j-- > 0;) {
      std::int32_t& cur = d[i * w + j];
      if (i + 1 < h) cur = std::min(cur, d[(i + 1) * w + j] + 1);
      if (j + 1 < w) cur = std::min(cur, d[i * w + j + 1] + 1);
    }
  return d;
}

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.height(); ++i)
    for (std::size_t j = 0; j < mask.width(); ++j)
      if (!mask.get(i, j)) out.set(i, j, true);
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LabeledPrediction synth_item(const SynthParams& params, std::uint64_t index) {
  params.validate();
  SplitMix64 rng(mix_key(params.seed, index));
  const std::size_t h = params.height;
  const std::size_t w = params.width;

  // Draw order is part of the determinism contract: ellipse axes, center,
  // halo coin, halo width, then per-pixel noise row-major, then halo boosts
  // row-major.
  const double a = rng.next_in(params.radius_min, params.radius_max);
  const double b = rng.next_in(params.radius_min, params.radius_max);
  const double cx = rng.next_in(a, static_cast<double>(w - 1) - a);
  const double cy = rng.next_in(b, static_cast<double>(h - 1) - b);
  const bool halo_active = rng.next_unit() < params.fp_rate;
  std::uint32_t halo_width = 0;
  if (halo_active && params.boundary_fp_width > 0)
    halo_width = 1 + static_cast<std::uint32_t>(
                         rng.next_below(params.boundary_fp_width));

  BinaryMask truth(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double dx = (static_cast<double>(j) - cx) / a;
      const double dy = (static_cast<double>(i) - cy) / b;
      if (dx * dx + dy * dy <= 1.0) truth.set(i, j, true);
    }

  const std::vector<std::int32_t> dist_out = l1_distance(truth);
  const std::vector<std::int32_t> dist_in = l1_distance(complement(truth));

  std::vector<float> scores(h * w, 0.0f);
  for (std::size_t p = 0; p < h * w; ++p) {
    const double sd = truth.get(p / w, p % w)
                          ? static_cast<double>(dist_in[p]) - 0.5
                          : 0.5 - static_cast<double>(dist_out[p]);
    const double noise = rng.next_in(-0.35, 0.35);
    scores[p] =
        static_cast<float>(sigmoid(params.score_sharpness * (sd + noise)));
  }
  if (halo_width > 0) {
    for (std::size_t p = 0; p < h * w; ++p) {
      if (dist_out[p] < 1 ||
          dist_out[p] > static_cast<std::int32_t>(halo_width))
        continue;
      const float boost = static_cast<float>(0.5 + 0.35 * rng.next_unit());
      scores[p] = std::max(scores[p], boost);
    }
  }
  for (float& s : scores) s = std::clamp(s, 0.0f, 1.0f);

  return LabeledPrediction(
      InnerFamily::thresholding(ScoreMap(h, w, std::move(scores))),
      std::move(truth));
}

LabeledPrediction with_erosion_family(const LabeledPrediction& item,
                                      StructuringElement se) {
  return LabeledPrediction(
      InnerFamily::erosion(item.family.prediction(), std::move(se)),
      item.truth);
}

ShrinkLevel brute_force_nonconformity(const LabeledPrediction& item,
                                      double tau) {
  const std::vector<ShrinkLevel> bps = item.family.breakpoints();
  for (const ShrinkLevel& bp : bps)
    if (afp(item, bp) <= tau) return bp;
  return bps.back();
}

}  // namespace confmask
