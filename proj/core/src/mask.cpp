#include "confmask/mask.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "confmask/errors.hpp"

namespace confmask {

BinaryMask::BinaryMask(std::size_t height, std::size_t width)
    : height_(height), width_(width), words_((height * width + 63) / 64, 0) {}

std::size_t BinaryMask::cardinality() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

bool BinaryMask::none() const {
  for (std::uint64_t w : words_)
    if (w != 0) return false;
  return true;
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
  if (!same_shape(other))
    throw DataError("mask shape mismatch: " + std::to_string(height_) + "x" +
                    std::to_string(width_) + " vs " +
                    std::to_string(other.height_) + "x" +
                    std::to_string(other.width_));
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k] & ~other.words_[k]) return false;
  return true;
}

ScoreMap::ScoreMap(std::size_t height, std::size_t width,
                   std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height * width)
    throw DataError("score map size mismatch: expected " +
                    std::to_string(height * width) + " values, got " +
                    std::to_string(values_.size()));
  for (float v : values_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw DataError("score out of range: " + std::to_string(v));
  }
}

StructuringElement::StructuringElement(
    std::vector<std::pair<int, int>> offsets)
    : offsets_(std::move(offsets)) {
  if (offsets_.empty())
    throw ConfigError("structuring element must be nonempty");
  std::sort(offsets_.begin(), offsets_.end());
  offsets_.erase(std::unique(offsets_.begin(), offsets_.end()),
                 offsets_.end());
  bool has_origin = false;
  for (const auto& [di, dj] : offsets_)
    if (di == 0 && dj == 0) has_origin = true;
  if (!has_origin)
    throw ConfigError("structuring element must contain the origin");
}

StructuringElement cross4() {
  return StructuringElement({{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}});
}

StructuringElement square8() {
  std::vector<std::pair<int, int>> offsets;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) offsets.emplace_back(di, dj);
  return StructuringElement(std::move(offsets));
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  BinaryMask out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (!mask.get(i, j)) continue;
      bool keep = true;
      for (const auto& [di, dj] : se.offsets()) {
        std::ptrdiff_t ni = static_cast<std::ptrdiff_t>(i) + di;
        std::ptrdiff_t nj = static_cast<std::ptrdiff_t>(j) + dj;
        if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(h) ||
            nj >= static_cast<std::ptrdiff_t>(w) ||
            !mask.get(static_cast<std::size_t>(ni),
                      static_cast<std::size_t>(nj))) {
          keep = false;
          break;
        }
      }
      if (keep) out.set(i, j, true);
    }
  }
  return out;
}

BinaryMask threshold(const ScoreMap& scores, double level) {
  if (!std::isfinite(level))
    throw ConfigError("threshold level must be finite");
  BinaryMask out(scores.height(), scores.width());
  const std::size_t h = scores.height();
  const std::size_t w = scores.width();
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (static_cast<double>(scores.at(i, j)) >= level) out.set(i, j, true);
  return out;
}

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b))
    throw DataError("mask shape mismatch: " + std::to_string(a.height()) +
                    "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" +
                    std::to_string(b.width()));
}

}  // namespace

std::size_t intersect_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  std::size_t total = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k)
    total += std::popcount(wa[k] & wb[k]);
  return total;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  BinaryMask out(a.height(), a.width());
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) out.words()[k] = wa[k] & wb[k];
  return out;
}

BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  BinaryMask out(a.height(), a.width());
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) out.words()[k] = wa[k] & ~wb[k];
  return out;
}

}  // namespace confmask
