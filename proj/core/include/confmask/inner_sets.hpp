#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confmask/mask.hpp"

namespace confmask {

enum class Family { threshold, erosion };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Fallback erosion depth used when calibration demands more shrinkage than
/// any observed score: far beyond what any realistic grid survives, so the
/// inner mask is empty in practice while ordering stays well defined.
inline constexpr std::uint32_t kErosionStepsCap = 65535;

/// A point on a family's shrinkage axis. Threshold levels live in [0.5, 1]
/// plus a dedicated above-max element that always yields the empty mask;
/// erosion depths are nonnegative integers. Levels from different families
/// are not comparable.
class ShrinkLevel {
 public:
  enum class Kind { threshold_level, threshold_above_max, erosion_steps };

  static ShrinkLevel threshold_level(double level);
  static ShrinkLevel threshold_above_max();
  static ShrinkLevel erosion_steps(std::uint32_t steps);
  /// Greatest element of the erosion family's axis.
  static ShrinkLevel erosion_cap() { return erosion_steps(kErosionStepsCap); }

  Kind kind() const { return kind_; }
  Family family() const {
    return kind_ == Kind::erosion_steps ? Family::erosion : Family::threshold;
  }
  double level() const;         // threshold_level only
  std::uint32_t steps() const;  // erosion_steps only
  bool is_above_max() const { return kind_ == Kind::threshold_above_max; }

  /// Ordering within a family; mixing families throws.
  static int compare(const ShrinkLevel& a, const ShrinkLevel& b);

  friend bool operator==(const ShrinkLevel& a, const ShrinkLevel& b) {
    return compare(a, b) == 0;
  }
  friend bool operator!=(const ShrinkLevel& a, const ShrinkLevel& b) {
    return compare(a, b) != 0;
  }
  friend bool operator<(const ShrinkLevel& a, const ShrinkLevel& b) {
    return compare(a, b) < 0;
  }
  friend bool operator<=(const ShrinkLevel& a, const ShrinkLevel& b) {
    return compare(a, b) <= 0;
  }

  std::string describe() const;

 private:
  ShrinkLevel(Kind kind, double level, std::uint32_t steps)
      : kind_(kind), level_(level), steps_(steps) {}

  Kind kind_;
  double level_;
  std::uint32_t steps_;
};

/// A nested family of inner masks for one prediction. Raising the level
/// never adds pixels, and every inner mask stays inside the prediction.
class InnerFamily {
 public:
  /// Score-threshold family: prediction is scores >= 0.5, inner masks raise
  /// that threshold.
  static InnerFamily thresholding(ScoreMap scores);
  /// Erosion family: inner masks peel the prediction with repeated erosion.
  static InnerFamily erosion(BinaryMask prediction, StructuringElement se);

  Family family() const { return family_; }
  const BinaryMask& prediction() const { return prediction_; }
  const ScoreMap& scores() const;
  const StructuringElement& structuring_element() const;

  /// Inner mask at the given level. The level's family must match.
  BinaryMask inner_mask(const ShrinkLevel& level) const;

  /// Levels at which the inner mask can change, ascending, starting at the
  /// family's base level (whose mask equals the prediction). For thresholds
  /// this is 0.5, the distinct prediction scores, 1.0, and the above-max
  /// element; for erosion it is every depth up to the first that empties the
  /// mask (capped at max(height, width)).
  std::vector<ShrinkLevel> breakpoints() const;

 private:
  InnerFamily() = default;

  Family family_ = Family::threshold;
  BinaryMask prediction_;
  std::optional<ScoreMap> scores_;
  std::optional<StructuringElement> se_;
};

}  // namespace confmask
