#pragma once

#include <cstdint>

#include "confmask/mask.hpp"
#include "confmask/risk.hpp"

namespace confmask {

/// Synthetic segmentation scenario: elliptical ground-truth blobs, sigmoid
/// scores driven by signed distance to the blob boundary, and an optional
/// over-segmentation halo so the base prediction carries boundary false
/// positives. Items are i.i.d. across indices under one seed, which makes
/// calibration/test splits exchangeable by construction.
struct SynthParams {
  std::size_t width = 48;
  std::size_t height = 48;
  double radius_min = 7.0;
  double radius_max = 13.0;
  std::uint32_t boundary_fp_width = 2;  // widest halo ring, pixels
  double score_sharpness = 1.1;
  double fp_rate = 0.95;  // probability an item gets a halo
  std::uint64_t seed = 0;

  void validate() const;
};

/// Pure function of (params, index): same arguments, bit-identical item.
/// Returns a threshold-family item; the score map is retained.
LabeledPrediction synth_item(const SynthParams& params, std::uint64_t index);

/// Rebuilds an item under the erosion family, keeping prediction and truth.
LabeledPrediction with_erosion_family(const LabeledPrediction& item,
                                      StructuringElement se);

/// Reference semantics for the nonconformity score: evaluate afp at every
/// breakpoint in order, return the first satisfying one (the final
/// breakpoint, failing that).
ShrinkLevel brute_force_nonconformity(const LabeledPrediction& item,
                                      double tau);

}  // namespace confmask
