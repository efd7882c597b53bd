#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confmask/inner_sets.hpp"
#include "confmask/mask.hpp"
#include "confmask/risk.hpp"

namespace confmask {

/// Calibration configuration: miscoverage level, FP tolerance, and which
/// nested family to calibrate. The structuring element applies to the
/// erosion family only.
struct CalibConfig {
  CalibConfig(double alpha_in, double tau_in, Family family_in,
              std::optional<StructuringElement> se_in = std::nullopt);

  double alpha;
  double tau;
  Family family;
  std::optional<StructuringElement> se;
};

/// Output of a calibration run: the chosen shrink level plus enough metadata
/// to audit which score multiset produced it.
struct CalibratedModel {
  CalibConfig config;
  ShrinkLevel lambda_hat;
  std::size_t n = 0;
  std::string score_digest;  // hex digest of the sorted score multiset
  std::string created_at;    // RFC 3339 UTC
};

struct ApplyResult {
  BinaryMask confidence;  // inner mask at the calibrated level
  BinaryMask uncertain;   // prediction minus confidence
  BinaryMask prediction;
};

/// With n scores and k = ceil((n+1)(1-alpha)): the k-th smallest score when
/// k <= n, otherwise the family's greatest element (empty-mask shrinkage,
/// maximally conservative). Scores must be nonempty and share one family.
ShrinkLevel conformal_quantile(const std::vector<ShrinkLevel>& scores,
                               double alpha);

/// Index-stable hex digest of a sorted score multiset; calibration records
/// it so downstream consumers can audit a model's provenance.
std::string score_multiset_digest(std::vector<ShrinkLevel> scores);

/// Scores every item, takes the conformal quantile, and stamps the model.
/// Per-item scoring runs on `workers` threads (0 = available parallelism);
/// the result does not depend on the worker count. When `scores_out` is
/// given it receives the per-item scores in dataset order.
CalibratedModel calibrate(const std::vector<LabeledPrediction>& items,
                          const CalibConfig& config, unsigned workers = 0,
                          std::vector<ShrinkLevel>* scores_out = nullptr);

/// Splits a prediction into confidence and uncertain regions at the model's
/// calibrated level. The input family must match the model's.
ApplyResult apply(const CalibratedModel& model, const InnerFamily& input);

/// JSON codec for CalibratedModel files.
std::string model_to_json(const CalibratedModel& model);
CalibratedModel model_from_json(const std::string& text);

}  // namespace confmask
