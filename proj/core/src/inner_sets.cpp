#include "confmask/inner_sets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "confmask/errors.hpp"

namespace confmask {

std::string family_name(Family f) {
  return f == Family::threshold ? "threshold" : "erosion";
}

Family family_from_name(const std::string& name) {
  if (name == "threshold") return Family::threshold;
  if (name == "erosion") return Family::erosion;
  throw ConfigError("unknown family: " + name);
}

ShrinkLevel ShrinkLevel::threshold_level(double level) {
  if (!std::isfinite(level) || level < 0.5 || level > 1.0)
    throw ConfigError("threshold level must lie in [0.5, 1], got " +
                      std::to_string(level));
  return ShrinkLevel(Kind::threshold_level, level, 0);
}

ShrinkLevel ShrinkLevel::threshold_above_max() {
  return ShrinkLevel(Kind::threshold_above_max, 0.0, 0);
}

ShrinkLevel ShrinkLevel::erosion_steps(std::uint32_t steps) {
  return ShrinkLevel(Kind::erosion_steps, 0.0, steps);
}

double ShrinkLevel::level() const {
  if (kind_ != Kind::threshold_level)
    throw InvariantError("level() called on " + describe());
  return level_;
}

std::uint32_t ShrinkLevel::steps() const {
  if (kind_ != Kind::erosion_steps)
    throw InvariantError("steps() called on " + describe());
  return steps_;
}

int ShrinkLevel::compare(const ShrinkLevel& a, const ShrinkLevel& b) {
  if (a.family() != b.family())
    throw InvariantError("cannot compare levels across families: " +
                         a.describe() + " vs " + b.describe());
  if (a.family() == Family::erosion) {
    if (a.steps_ < b.steps_) return -1;
    if (a.steps_ > b.steps_) return 1;
    return 0;
  }
  bool am = a.is_above_max();
  bool bm = b.is_above_max();
  if (am && bm) return 0;
  if (am) return 1;
  if (bm) return -1;
  if (a.level_ < b.level_) return -1;
  if (a.level_ > b.level_) return 1;
  return 0;
}

std::string ShrinkLevel::describe() const {
  switch (kind_) {
    case Kind::threshold_level:
      return "threshold(" + std::to_string(level_) + ")";
    case Kind::threshold_above_max:
      return "threshold(above_max)";
    case Kind::erosion_steps:
      return "erosion(" + std::to_string(steps_) + ")";
  }
  return "?";
}

InnerFamily InnerFamily::thresholding(ScoreMap scores) {
  InnerFamily fam;
  fam.family_ = Family::threshold;
  fam.prediction_ = threshold(scores, 0.5);
  fam.scores_ = std::move(scores);
  return fam;
}

InnerFamily InnerFamily::erosion(BinaryMask prediction,
                                 StructuringElement se) {
  InnerFamily fam;
  fam.family_ = Family::erosion;
  fam.prediction_ = std::move(prediction);
  fam.se_ = std::move(se);
  return fam;
}

const ScoreMap& InnerFamily::scores() const {
  if (!scores_) throw InvariantError("family carries no score map");
  return *scores_;
}

const StructuringElement& InnerFamily::structuring_element() const {
  if (!se_) throw InvariantError("family carries no structuring element");
  return *se_;
}

BinaryMask InnerFamily::inner_mask(const ShrinkLevel& level) const {
  if (level.family() != family_)
    throw InvariantError("level family mismatch: " + level.describe() +
                         " applied to " + family_name(family_) + " family");
  if (family_ == Family::threshold) {
    if (level.is_above_max())
      return BinaryMask(prediction_.height(), prediction_.width());
    // Intersecting with the prediction keeps the family anchored there even
    // at the base level, where >= 0.5 reproduces it exactly.
    return mask_and(threshold(*scores_, level.level()), prediction_);
  }
  BinaryMask cur = prediction_;
  for (std::uint32_t k = 0; k < level.steps(); ++k) {
    if (cur.none()) break;
    BinaryMask next = erode(cur, *se_);
    if (next == cur) break;  // fixpoint, deeper erosion changes nothing
    cur = std::move(next);
  }
  return cur;
}

std::vector<ShrinkLevel> InnerFamily::breakpoints() const {
  std::vector<ShrinkLevel> out;
  if (family_ == Family::threshold) {
    std::set<double> levels;
    levels.insert(0.5);
    levels.insert(1.0);
    const std::size_t h = prediction_.height();
    const std::size_t w = prediction_.width();
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        if (prediction_.get(i, j))
          levels.insert(static_cast<double>(scores_->at(i, j)));
    for (double v : levels) out.push_back(ShrinkLevel::threshold_level(v));
    out.push_back(ShrinkLevel::threshold_above_max());
    return out;
  }
  const std::uint32_t cap = static_cast<std::uint32_t>(
      std::max(prediction_.height(), prediction_.width()));
  out.push_back(ShrinkLevel::erosion_steps(0));
  BinaryMask cur = prediction_;
  std::uint32_t k = 0;
  while (!cur.none() && k < cap) {
    BinaryMask next = erode(cur, *se_);
    if (next == cur) break;  // stable nonempty mask, no further change
    cur = std::move(next);
    ++k;
    out.push_back(ShrinkLevel::erosion_steps(k));
  }
  return out;
}

}  // namespace confmask
