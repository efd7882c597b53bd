#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace confmask {

/// Dense binary mask over a height x width pixel grid, bit-packed row-major.
/// Bit index for pixel (i, j) is i * width + j. Trailing bits in the last
/// word stay zero so popcount-based counting needs no masking.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t height, std::size_t width);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return height_ * width_; }

  bool get(std::size_t i, std::size_t j) const {
    std::size_t bit = i * width_ + j;
    return (words_[bit >> 6] >> (bit & 63)) & 1u;
  }
  void set(std::size_t i, std::size_t j, bool value) {
    std::size_t bit = i * width_ + j;
    std::uint64_t m = std::uint64_t{1} << (bit & 63);
    if (value)
      words_[bit >> 6] |= m;
    else
      words_[bit >> 6] &= ~m;
  }

  /// Number of set pixels.
  std::size_t cardinality() const;
  bool none() const;

  /// True when every set pixel of *this is also set in other.
  bool is_subset_of(const BinaryMask& other) const;

  bool same_shape(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.words_ == b.words_;
  }
  friend bool operator!=(const BinaryMask& a, const BinaryMask& b) {
    return !(a == b);
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Per-pixel scores in [0, 1], row-major. Values must be finite and in range.
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(std::size_t height, std::size_t width, std::vector<float> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  float at(std::size_t i, std::size_t j) const {
    return values_[i * width_ + j];
  }
  const std::vector<float>& values() const { return values_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> values_;
};

/// Structuring element for morphological erosion: a set of (di, dj) offsets.
/// Must contain the origin (0, 0); that makes erosion anti-extensive, which
/// the nesting guarantees rely on. Offsets are stored sorted and deduplicated.
class StructuringElement {
 public:
  explicit StructuringElement(std::vector<std::pair<int, int>> offsets);

  const std::vector<std::pair<int, int>>& offsets() const { return offsets_; }

  friend bool operator==(const StructuringElement& a,
                         const StructuringElement& b) {
    return a.offsets_ == b.offsets_;
  }

 private:
  std::vector<std::pair<int, int>> offsets_;
};

/// 4-neighbourhood cross: origin plus N/S/E/W.
StructuringElement cross4();
/// Full 3x3 square, 8-neighbourhood.
StructuringElement square8();

/// Erosion with border treated as background: a pixel survives only when
/// every offset lands inside the grid and on a set pixel.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);

/// Pixels with score >= level (inclusive). level must be finite.
BinaryMask threshold(const ScoreMap& scores, double level);

std::size_t intersect_count(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
/// a with b's pixels removed.
BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b);

}  // namespace confmask
