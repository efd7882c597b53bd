#include "confmask/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include <json.hpp>

#include "confmask/errors.hpp"
#include "confmask/parallel.hpp"
#include "confmask/rng.hpp"

namespace confmask {

ImageEval evaluate_image(const LabeledPrediction& item,
                         const ShrinkLevel& level, double tau) {
  ImageEval ev;
  ev.prediction_area = item.family.prediction().cardinality();
  BinaryMask inner = item.family.inner_mask(level);
  ev.inner_area = inner.cardinality();
  ev.tp_in_inner = intersect_count(inner, item.truth);
  // inner is a subset of the prediction, so its non-TP pixels are exactly
  // the accepted false positives.
  ev.afp = afp_from_counts(ev.inner_area - ev.tp_in_inner,
                           ev.prediction_area);
  ev.valid = ev.afp <= tau;
  return ev;
}

namespace {

void require_nonempty(const std::vector<ImageEval>& evals) {
  if (evals.empty()) throw DataError("empty evaluation list");
}

double ratio_mean(const std::vector<ImageEval>& evals,
                  std::size_t ImageEval::*numerator) {
  double sum = 0.0;
  for (const ImageEval& e : evals)
    if (e.prediction_area > 0)
      sum += static_cast<double>(e.*numerator) /
             static_cast<double>(e.prediction_area);
  return sum / static_cast<double>(evals.size());
}

}  // namespace

double empirical_validity(const std::vector<ImageEval>& evals) {
  require_nonempty(evals);
  std::size_t valid = 0;
  for (const ImageEval& e : evals) valid += e.valid ? 1 : 0;
  return static_cast<double>(valid) / static_cast<double>(evals.size());
}

double contraction_ratio(const std::vector<ImageEval>& evals) {
  require_nonempty(evals);
  return ratio_mean(evals, &ImageEval::inner_area);
}

double accepted_tp_fraction(const std::vector<ImageEval>& evals) {
  require_nonempty(evals);
  return ratio_mean(evals, &ImageEval::tp_in_inner);
}

EvalReport make_report(std::vector<ImageEval> evals) {
  EvalReport report;
  report.ev = empirical_validity(evals);
  report.cr = contraction_ratio(evals);
  report.atp = accepted_tp_fraction(evals);
  report.n_test = evals.size();
  report.per_image = std::move(evals);
  return report;
}

namespace {

EvalReport evaluate_split(const std::vector<LabeledPrediction>& dataset,
                          const std::vector<std::size_t>& test_idx,
                          const ShrinkLevel& level, double tau,
                          unsigned workers) {
  std::vector<ImageEval> evals(test_idx.size());
  parallel_for(test_idx.size(), workers, [&](std::size_t i) {
    evals[i] = evaluate_image(dataset[test_idx[i]], level, tau);
  });
  return make_report(std::move(evals));
}

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return m;
}

MethodSummary summarize(std::string method, const CalibConfig& config,
                        std::vector<EvalReport> per_seed) {
  std::vector<double> evs, crs, atps;
  for (const EvalReport& r : per_seed) {
    evs.push_back(r.ev);
    crs.push_back(r.cr);
    atps.push_back(r.atp);
  }
  Moments ev = moments(evs), cr = moments(crs), atp = moments(atps);
  MethodSummary row;
  row.method = std::move(method);
  row.tau = config.tau;
  row.alpha = config.alpha;
  row.ev_mean = ev.mean;
  row.ev_std = ev.std_dev;
  row.cr_mean = cr.mean;
  row.cr_std = cr.std_dev;
  row.atp_mean = atp.mean;
  row.atp_std = atp.std_dev;
  row.per_seed = std::move(per_seed);
  return row;
}

}  // namespace

ProtocolResult run_protocol(const std::vector<LabeledPrediction>& dataset,
                            const CalibConfig& config,
                            const std::vector<std::uint64_t>& seeds,
                            unsigned workers) {
  if (dataset.size() < 2)
    throw DataError("dataset too small: protocol needs at least 2 items, got " +
                    std::to_string(dataset.size()));
  if (seeds.empty()) throw ConfigError("seed list must be nonempty");
  for (const LabeledPrediction& item : dataset)
    if (item.family.family() != config.family)
      throw ConfigError("dataset item family " +
                        family_name(item.family.family()) +
                        " does not match configured family " +
                        family_name(config.family));

  const ShrinkLevel base_level = config.family == Family::threshold
                                     ? ShrinkLevel::threshold_level(0.5)
                                     : ShrinkLevel::erosion_steps(0);
  const std::size_t n = dataset.size();
  const std::size_t n_cal = n / 2;

  std::vector<EvalReport> baseline_reports, method_reports;
  for (std::uint64_t seed : seeds) {
    std::vector<std::size_t> perm = random_permutation(n, seed);
    std::vector<std::size_t> test_idx(perm.begin() + n_cal, perm.end());

    std::vector<LabeledPrediction> cal_items;
    cal_items.reserve(n_cal);
    for (std::size_t i = 0; i < n_cal; ++i)
      cal_items.push_back(dataset[perm[i]]);
    CalibratedModel model = calibrate(cal_items, config, workers);

    baseline_reports.push_back(
        evaluate_split(dataset, test_idx, base_level, config.tau, workers));
    method_reports.push_back(evaluate_split(dataset, test_idx,
                                            model.lambda_hat, config.tau,
                                            workers));
  }

  ProtocolResult result;
  result.seeds = seeds;
  result.prng = kPrngName;
  result.rows.push_back(
      summarize("baseline", config, std::move(baseline_reports)));
  result.rows.push_back(
      summarize(family_name(config.family), config, std::move(method_reports)));
  return result;
}

namespace {

std::string fmt_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string summary_to_csv(const ProtocolResult& result) {
  std::string out =
      "method,tau,alpha,ev_mean,ev_std,cr_mean,cr_std,atp_mean,atp_std\n";
  for (const MethodSummary& row : result.rows) {
    out += row.method;
    out += ',' + fmt_param(row.tau) + ',' + fmt_param(row.alpha);
    out += ',' + fmt_fixed(row.ev_mean) + ',' + fmt_fixed(row.ev_std);
    out += ',' + fmt_fixed(row.cr_mean) + ',' + fmt_fixed(row.cr_std);
    out += ',' + fmt_fixed(row.atp_mean) + ',' + fmt_fixed(row.atp_std);
    out += '\n';
  }
  return out;
}

std::string report_to_json(const ProtocolResult& result) {
  nlohmann::ordered_json doc;
  doc["prng"] = result.prng;
  doc["seeds"] = result.seeds;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const MethodSummary& row : result.rows) {
    nlohmann::ordered_json jrow;
    jrow["method"] = row.method;
    jrow["tau"] = row.tau;
    jrow["alpha"] = row.alpha;
    jrow["ev_mean"] = row.ev_mean;
    jrow["ev_std"] = row.ev_std;
    jrow["cr_mean"] = row.cr_mean;
    jrow["cr_std"] = row.cr_std;
    jrow["atp_mean"] = row.atp_mean;
    jrow["atp_std"] = row.atp_std;
    jrow["per_seed"] = nlohmann::ordered_json::array();
    for (const EvalReport& r : row.per_seed) {
      nlohmann::ordered_json jr;
      jr["ev"] = r.ev;
      jr["cr"] = r.cr;
      jr["atp"] = r.atp;
      jr["n_test"] = r.n_test;
      jr["per_image"] = nlohmann::ordered_json::array();
      for (const ImageEval& e : r.per_image) {
        jr["per_image"].push_back(
            {{"afp", e.afp},
             {"inner_area", e.inner_area},
             {"prediction_area", e.prediction_area},
             {"tp_in_inner", e.tp_in_inner},
             {"valid", e.valid}});
      }
      jrow["per_seed"].push_back(std::move(jr));
    }
    doc["rows"].push_back(std::move(jrow));
  }
  return doc.dump(2) + "\n";
}

}  // namespace confmask
