#include "confmask/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <utility>

#include <json.hpp>

#include "confmask/errors.hpp"
#include "confmask/parallel.hpp"

namespace confmask {

namespace {

std::string now_rfc3339_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void append_canonical(std::string& out, const ShrinkLevel& s) {
  switch (s.kind()) {
    case ShrinkLevel::Kind::threshold_level: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "t:%.17g;", s.level());
      out += buf;
      break;
    }
    case ShrinkLevel::Kind::threshold_above_max:
      out += "t:above_max;";
      break;
    case ShrinkLevel::Kind::erosion_steps:
      out += "e:" + std::to_string(s.steps()) + ";";
      break;
  }
}

ShrinkLevel greatest_element(Family family) {
  return family == Family::threshold ? ShrinkLevel::threshold_above_max()
                                     : ShrinkLevel::erosion_cap();
}

}  // namespace

CalibConfig::CalibConfig(double alpha_in, double tau_in, Family family_in,
                         std::optional<StructuringElement> se_in)
    : alpha(alpha_in),
      tau(tau_in),
      family(family_in),
      se(std::move(se_in)) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha out of range: must lie in (0, 1), got " +
                      std::to_string(alpha));
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ConfigError("tau must lie in [0, 1], got " + std::to_string(tau));
  if (family == Family::erosion && !se)
    throw ConfigError("erosion family requires a structuring element");
}

ShrinkLevel conformal_quantile(const std::vector<ShrinkLevel>& scores,
                               double alpha) {
  if (scores.empty()) throw DataError("empty score list");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha out of range: must lie in (0, 1), got " +
                      std::to_string(alpha));
  const Family family = scores.front().family();
  for (const ShrinkLevel& s : scores)
    if (s.family() != family)
      throw InvariantError("mixed families in score list");

  // k = ceil((n+1)(1-alpha)) computed as (n+1) - floor((n+1) alpha); the
  // identity is exact for integers and avoids ceil's rounding hazards.
  const std::size_t n = scores.size();
  const long double scaled =
      static_cast<long double>(n + 1) * static_cast<long double>(alpha);
  const std::size_t k = (n + 1) - static_cast<std::size_t>(std::floor(scaled));
  if (k > n) return greatest_element(family);

  std::vector<ShrinkLevel> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  return sorted[k - 1];
}

std::string score_multiset_digest(std::vector<ShrinkLevel> scores) {
  std::sort(scores.begin(), scores.end());
  std::string canon;
  for (const ShrinkLevel& s : scores) append_canonical(canon, s);
  // FNV-1a, 64-bit.
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

CalibratedModel calibrate(const std::vector<LabeledPrediction>& items,
                          const CalibConfig& config, unsigned workers,
                          std::vector<ShrinkLevel>* scores_out) {
  if (items.empty()) throw DataError("empty calibration set");
  for (const LabeledPrediction& item : items)
    if (item.family.family() != config.family)
      throw ConfigError("calibration item family " +
                        family_name(item.family.family()) +
                        " does not match configured family " +
                        family_name(config.family));

  std::vector<std::optional<ShrinkLevel>> slots(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) {
    slots[i] = nonconformity_score(items[i], config.tau);
  });
  std::vector<ShrinkLevel> scores;
  scores.reserve(items.size());
  for (const auto& s : slots) scores.push_back(*s);
  if (scores_out) *scores_out = scores;

  CalibratedModel model{config, conformal_quantile(scores, config.alpha),
                        items.size(), score_multiset_digest(std::move(scores)),
                        now_rfc3339_utc()};
  return model;
}

ApplyResult apply(const CalibratedModel& model, const InnerFamily& input) {
  if (input.family() != model.config.family)
    throw ConfigError("input family " + family_name(input.family()) +
                      " does not match model family " +
                      family_name(model.config.family));
  BinaryMask confidence = input.inner_mask(model.lambda_hat);
  BinaryMask uncertain = mask_and_not(input.prediction(), confidence);
  return ApplyResult{std::move(confidence), std::move(uncertain),
                     input.prediction()};
}

std::string model_to_json(const CalibratedModel& model) {
  nlohmann::ordered_json doc;
  doc["family"] = family_name(model.config.family);
  doc["alpha"] = model.config.alpha;
  doc["tau"] = model.config.tau;
  if (model.lambda_hat.is_above_max())
    doc["lambda_hat"] = "above_max";
  else if (model.lambda_hat.family() == Family::threshold)
    doc["lambda_hat"] = model.lambda_hat.level();
  else
    doc["lambda_hat"] = model.lambda_hat.steps();
  nlohmann::ordered_json se = nlohmann::ordered_json::array();
  if (model.config.se)
    for (const auto& [di, dj] : model.config.se->offsets())
      se.push_back({di, dj});
  doc["se"] = std::move(se);
  doc["n"] = model.n;
  doc["score_digest"] = model.score_digest;
  doc["created_at"] = model.created_at;
  return doc.dump(2) + "\n";
}

CalibratedModel model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const Family family = family_from_name(doc.at("family").get<std::string>());

    std::optional<StructuringElement> se;
    if (doc.contains("se") && !doc["se"].empty()) {
      std::vector<std::pair<int, int>> offsets;
      for (const auto& off : doc["se"])
        offsets.emplace_back(off.at(0).get<int>(), off.at(1).get<int>());
      se = StructuringElement(std::move(offsets));
    }
    CalibConfig config(doc.at("alpha").get<double>(),
                       doc.at("tau").get<double>(), family, std::move(se));

    const auto& raw = doc.at("lambda_hat");
    ShrinkLevel lambda_hat = ShrinkLevel::threshold_above_max();
    if (raw.is_string()) {
      if (raw.get<std::string>() != "above_max" ||
          family != Family::threshold)
        throw DataError("unrecognized lambda_hat value");
    } else if (family == Family::threshold) {
      lambda_hat = ShrinkLevel::threshold_level(raw.get<double>());
    } else {
      lambda_hat = ShrinkLevel::erosion_steps(raw.get<std::uint32_t>());
    }

    CalibratedModel model{std::move(config), lambda_hat,
                          doc.at("n").get<std::size_t>(),
                          doc.at("score_digest").get<std::string>(),
                          doc.at("created_at").get<std::string>()};
    if (model.n < 1) throw DataError("model n must be at least 1");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    // Out-of-range fields in a stored model are bad data, not bad usage.
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace confmask
