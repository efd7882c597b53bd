#include "confmask/risk.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "confmask/errors.hpp"

namespace confmask {

LabeledPrediction::LabeledPrediction(InnerFamily family_in,
                                     BinaryMask truth_in)
    : family(std::move(family_in)), truth(std::move(truth_in)) {
  if (!family.prediction().same_shape(truth))
    throw DataError("truth dimensions " + std::to_string(truth.height()) +
                    "x" + std::to_string(truth.width()) +
                    " do not match prediction " +
                    std::to_string(family.prediction().height()) + "x" +
                    std::to_string(family.prediction().width()));
}

std::size_t fp_count(const BinaryMask& prediction, const BinaryMask& truth) {
  return prediction.cardinality() - intersect_count(prediction, truth);
}

double afp_from_counts(std::size_t accepted_fp, std::size_t prediction_area) {
  if (prediction_area == 0) return 0.0;
  return static_cast<double>(accepted_fp) /
         static_cast<double>(prediction_area);
}

double afp(const LabeledPrediction& item, const ShrinkLevel& level) {
  const std::size_t area = item.family.prediction().cardinality();
  if (area == 0) return 0.0;
  BinaryMask inner = item.family.inner_mask(level);
  std::size_t accepted_fp =
      inner.cardinality() - intersect_count(inner, item.truth);
  return afp_from_counts(accepted_fp, area);
}

namespace {

ShrinkLevel threshold_score(const LabeledPrediction& item, double tau) {
  const BinaryMask& pred = item.family.prediction();
  const ScoreMap& scores = item.family.scores();
  const std::size_t area = pred.cardinality();
  if (area == 0) return ShrinkLevel::threshold_level(0.5);

  // FP scores sorted once; the FPs accepted at a level are exactly the
  // sorted suffix of scores >= level, because the inner mask is the
  // prediction cut at that level.
  std::vector<float> fp_scores;
  const std::size_t h = pred.height();
  const std::size_t w = pred.width();
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (pred.get(i, j) && !item.truth.get(i, j))
        fp_scores.push_back(scores.at(i, j));
  std::sort(fp_scores.begin(), fp_scores.end());

  for (const ShrinkLevel& level : item.family.breakpoints()) {
    if (level.is_above_max()) break;
    double cut = level.level();
    auto first = std::lower_bound(
        fp_scores.begin(), fp_scores.end(), cut,
        [](float s, double c) { return static_cast<double>(s) < c; });
    std::size_t accepted_fp =
        static_cast<std::size_t>(fp_scores.end() - first);
    if (afp_from_counts(accepted_fp, area) <= tau) return level;
  }
  return ShrinkLevel::threshold_above_max();
}

ShrinkLevel erosion_score(const LabeledPrediction& item, double tau) {
  const std::size_t area = item.family.prediction().cardinality();
  const std::uint32_t cap = static_cast<std::uint32_t>(
      std::max(item.family.prediction().height(),
               item.family.prediction().width()));
  const StructuringElement& se = item.family.structuring_element();

  BinaryMask cur = item.family.prediction();
  std::uint32_t k = 0;
  for (;;) {
    std::size_t accepted_fp =
        cur.cardinality() - intersect_count(cur, item.truth);
    if (afp_from_counts(accepted_fp, area) <= tau)
      return ShrinkLevel::erosion_steps(k);
    if (k >= cap) return ShrinkLevel::erosion_steps(cap);
    BinaryMask next = erode(cur, se);
    // A stable nonempty mask means deeper levels change nothing; report the
    // last breakpoint, mirroring the exhaustive scan.
    if (next == cur) return ShrinkLevel::erosion_steps(k);
    cur = std::move(next);
    ++k;
  }
}

}  // namespace

ShrinkLevel nonconformity_score(const LabeledPrediction& item, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ConfigError("tau must lie in [0, 1], got " + std::to_string(tau));
  if (item.family.family() == Family::threshold)
    return threshold_score(item, tau);
  return erosion_score(item, tau);
}

}  // namespace confmask
