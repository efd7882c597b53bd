#pragma once

#include <cstddef>

#include "confmask/inner_sets.hpp"
#include "confmask/mask.hpp"

namespace confmask {

/// A prediction's inner-set family paired with the ground truth it will be
/// scored against.
struct LabeledPrediction {
  LabeledPrediction(InnerFamily family_in, BinaryMask truth_in);

  InnerFamily family;
  BinaryMask truth;
};

/// Number of predicted pixels outside the truth.
std::size_t fp_count(const BinaryMask& prediction, const BinaryMask& truth);

/// Accepted false-positive proportion from raw counts. Shared by the generic
/// and optimized paths so both divide identically; 0 when the prediction is
/// empty.
double afp_from_counts(std::size_t accepted_fp, std::size_t prediction_area);

/// Fraction of the prediction's area occupied by false positives that the
/// inner mask at `level` still accepts. Denominator is the unshrunken
/// prediction's area throughout; 0 for empty predictions.
double afp(const LabeledPrediction& item, const ShrinkLevel& level);

/// Smallest breakpoint whose inner mask accepts at most a tau fraction of
/// false positives. Walks the shrinkage axis incrementally instead of
/// materializing every inner mask; agrees with the exhaustive breakpoint
/// scan on every input.
ShrinkLevel nonconformity_score(const LabeledPrediction& item, double tau);

}  // namespace confmask
