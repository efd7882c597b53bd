#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "confmask/conformal.hpp"
#include "confmask/risk.hpp"

namespace confmask {

/// Per-image quantities entering the EV/CR/ATP aggregates.
struct ImageEval {
  double afp = 0.0;               // at the deployed shrink level
  std::size_t inner_area = 0;
  std::size_t prediction_area = 0;
  std::size_t tp_in_inner = 0;
  bool valid = false;             // afp <= tau
};

/// Aggregates over one evaluation split.
struct EvalReport {
  double ev = 0.0;   // fraction of images with afp <= tau
  double cr = 0.0;   // mean retained-area ratio
  double atp = 0.0;  // mean accepted-TP fraction of prediction area
  std::size_t n_test = 0;
  std::vector<ImageEval> per_image;
};

ImageEval evaluate_image(const LabeledPrediction& item,
                         const ShrinkLevel& level, double tau);

/// Empty-prediction images contribute a true validity flag and zero CR/ATP
/// terms. All three throw on an empty list.
double empirical_validity(const std::vector<ImageEval>& evals);
double contraction_ratio(const std::vector<ImageEval>& evals);
double accepted_tp_fraction(const std::vector<ImageEval>& evals);

EvalReport make_report(std::vector<ImageEval> evals);

/// One aggregated summary row: mean and sample standard deviation of the
/// three aggregates across seeds.
struct MethodSummary {
  std::string method;  // "baseline", "threshold", "erosion"
  double tau = 0.0;
  double alpha = 0.0;
  double ev_mean = 0.0, ev_std = 0.0;
  double cr_mean = 0.0, cr_std = 0.0;
  double atp_mean = 0.0, atp_std = 0.0;
  std::vector<EvalReport> per_seed;  // ordered like the seed list
};

struct ProtocolResult {
  std::vector<std::uint64_t> seeds;
  std::string prng;  // permutation generator, pinned for reproducibility
  std::vector<MethodSummary> rows;
};

/// Per seed: permute the dataset, calibrate on the first half (rounded
/// down), evaluate on the rest. Returns a baseline row (unshrunken
/// prediction, no calibration, evaluated on the same test halves) followed
/// by the configured method's row. Bit-reproducible for a fixed seed list,
/// regardless of worker count.
ProtocolResult run_protocol(const std::vector<LabeledPrediction>& dataset,
                            const CalibConfig& config,
                            const std::vector<std::uint64_t>& seeds,
                            unsigned workers = 0);

/// CSV rendering of the summary rows; byte-stable for fixed inputs.
std::string summary_to_csv(const ProtocolResult& result);

/// Full JSON report with per-seed and per-image detail.
std::string report_to_json(const ProtocolResult& result);

}  // namespace confmask
