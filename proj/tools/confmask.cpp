#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "confmask/conformal.hpp"
#include "confmask/datagen.hpp"
#include "confmask/errors.hpp"
#include "confmask/inner_sets.hpp"
#include "confmask/io.hpp"
#include "confmask/log.hpp"
#include "confmask/metrics.hpp"
#include "confmask/parallel.hpp"
#include "confmask/risk.hpp"

namespace fs = std::filesystem;
using namespace confmask;

namespace {

StructuringElement parse_se(const std::string& text) {
  if (text == "cross4") return cross4();
  if (text == "square8") return square8();
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open structuring element file: " + path);
    std::vector<std::pair<int, int>> offsets;
    std::string line;
    while (std::getline(in, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      int di = 0, dj = 0;
      const int got = std::sscanf(line.c_str(), "%d %d", &di, &dj);
      if (got == EOF || got == 0) continue;  // blank line
      if (got != 2)
        throw ConfigError("structuring element file " + path +
                          ": expected 'di dj' per line, got: " + line);
      offsets.emplace_back(di, dj);
    }
    return StructuringElement(std::move(offsets));
  }
  throw ConfigError("unknown structuring element '" + text +
                    "' (want cross4, square8, or file:<path>)");
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                    c == '-';
    if (!ok) c = '_';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out << text;
  out.flush();
  if (!out.good()) throw DataError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

/// Prediction source shared by the erosion family and the baseline: the
/// entry's mask when present, otherwise its scores cut at 0.5.
BinaryMask prediction_of(const DatasetItem& item) {
  if (item.mask) return *item.mask;
  if (item.scores) {
    log::info("entry " + item.id + ": prediction derived from scores at 0.5");
    return threshold(*item.scores, 0.5);
  }
  throw DataError("entry " + item.id + ": no prediction source");
}

InnerFamily family_of(const DatasetItem& item, Family family,
                      const std::optional<StructuringElement>& se) {
  if (family == Family::threshold) {
    if (!item.scores)
      throw ConfigError("score maps required (entry " + item.id + ")");
    return InnerFamily::thresholding(*item.scores);
  }
  return InnerFamily::erosion(prediction_of(item), *se);
}

std::vector<LabeledPrediction> labeled_items(
    const std::vector<DatasetItem>& items, Family family,
    const std::optional<StructuringElement>& se) {
  std::vector<LabeledPrediction> out;
  out.reserve(items.size());
  for (const DatasetItem& item : items) {
    if (!item.truth)
      throw DataError("entry " + item.id + ": missing ground truth");
    out.emplace_back(family_of(item, family, se), *item.truth);
  }
  return out;
}

std::string level_text(const ShrinkLevel& level) {
  if (level.is_above_max()) return "above_max";
  if (level.family() == Family::threshold) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", level.level());
    return buf;
  }
  return std::to_string(level.steps()) + " erosion step(s)";
}

void print_score_histogram(const std::vector<ShrinkLevel>& scores) {
  if (scores.empty()) return;
  if (scores.front().family() == Family::erosion) {
    std::map<std::uint32_t, std::size_t> counts;
    for (const ShrinkLevel& s : scores) ++counts[s.steps()];
    std::printf("score histogram (steps x count):");
    for (const auto& [steps, count] : counts)
      std::printf(" %u x%zu", steps, count);
    std::printf("\n");
    return;
  }
  // Threshold scores: ten uniform bins over [0.5, 1] plus the sentinel.
  std::size_t bins[10] = {};
  std::size_t above_max = 0;
  for (const ShrinkLevel& s : scores) {
    if (s.is_above_max()) {
      ++above_max;
      continue;
    }
    int b = static_cast<int>((s.level() - 0.5) / 0.05);
    bins[std::clamp(b, 0, 9)]++;
  }
  std::printf("score histogram (level x count):");
  for (int b = 0; b < 10; ++b) {
    if (bins[b] == 0) continue;
    std::printf(" [%.2f,%.2f) x%zu", 0.5 + 0.05 * b, 0.55 + 0.05 * b,
                bins[b]);
  }
  if (above_max > 0) std::printf(" above_max x%zu", above_max);
  std::printf("\n");
}

// ---- calibrate ----

struct CalibrateOpts {
  std::string manifest;
  double alpha = 0.1;
  double tau = 0.01;
  std::string family = "threshold";
  std::string se = "cross4";
  std::string out = "model.json";
  unsigned workers = 0;
};

void run_calibrate(const CalibrateOpts& opts) {
  const Family family = family_from_name(opts.family);
  std::optional<StructuringElement> se;
  if (family == Family::erosion) se = parse_se(opts.se);
  CalibConfig config(opts.alpha, opts.tau, family, se);

  DatasetManifest manifest = load_manifest(opts.manifest);
  std::vector<DatasetItem> items = load_dataset(manifest, opts.workers);
  std::vector<LabeledPrediction> labeled = labeled_items(items, family, se);
  if (labeled.empty()) throw DataError("empty calibration set");

  std::vector<ShrinkLevel> scores;
  CalibratedModel model = calibrate(labeled, config, opts.workers, &scores);
  write_text(opts.out, model_to_json(model));

  std::printf("n: %zu\n", model.n);
  std::printf("lambda_hat: %s\n", level_text(model.lambda_hat).c_str());
  print_score_histogram(scores);
  std::printf("model written to %s\n", opts.out.c_str());
}

// ---- apply ----

struct ApplyOpts {
  std::string model;
  std::string manifest;
  std::string out = "out";
  bool overlay = false;
  unsigned workers = 0;
};

Rgb overlay_pixel(bool in_confidence, bool in_uncertain, bool in_truth) {
  if (in_confidence && in_truth) return Rgb{255, 191, 0};    // accepted TP
  if (in_confidence) return Rgb{214, 39, 40};                // accepted FP
  if (in_uncertain && !in_truth) return Rgb{106, 90, 205};   // rejected FP
  if (in_truth) return Rgb{44, 160, 44};                     // ground truth
  return Rgb{0, 0, 0};
}

void run_apply(const ApplyOpts& opts) {
  CalibratedModel model = model_from_json(read_text(opts.model));
  DatasetManifest manifest = load_manifest(opts.manifest);
  std::vector<DatasetItem> items = load_dataset(manifest, opts.workers);

  if (opts.overlay)
    for (const DatasetItem& item : items)
      if (!item.truth)
        throw ConfigError("overlay requires ground truth (entry " + item.id +
                          ")");

  fs::create_directories(opts.out);
  parallel_for(items.size(), opts.workers, [&](std::size_t k) {
    const DatasetItem& item = items[k];
    InnerFamily family = family_of(item, model.config.family,
                                   model.config.se);
    ApplyResult result = apply(model, family);
    const std::string stem = sanitize_id(item.id);
    save_mask(result.confidence, fs::path(opts.out) / (stem + "_confidence.pgm"));
    save_mask(result.uncertain, fs::path(opts.out) / (stem + "_uncertain.pgm"));
    if (opts.overlay) {
      const BinaryMask& truth = *item.truth;
      const std::size_t h = truth.height(), w = truth.width();
      std::vector<Rgb> pixels(h * w);
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
          pixels[i * w + j] =
              overlay_pixel(result.confidence.get(i, j),
                            result.uncertain.get(i, j), truth.get(i, j));
      save_rgb_png(h, w, pixels, fs::path(opts.out) / (stem + "_overlay.png"));
    }
  });
  std::printf("wrote %zu entr%s to %s\n", items.size(),
              items.size() == 1 ? "y" : "ies", opts.out.c_str());
}

// ---- eval ----

struct EvalOpts {
  std::string manifest;
  double alpha = 0.1;
  std::vector<double> taus;
  std::string family;  // empty = all applicable
  std::string se = "cross4";
  std::vector<std::uint64_t> seeds;
  std::string out = "reports";
  unsigned workers = 0;
};

void run_eval(const EvalOpts& opts) {
  DatasetManifest manifest = load_manifest(opts.manifest);
  std::vector<DatasetItem> items = load_dataset(manifest, opts.workers);
  if (items.size() < 2)
    throw DataError("dataset too small: protocol needs at least 2 items, got " +
                    std::to_string(items.size()));

  const bool scores_everywhere =
      std::all_of(items.begin(), items.end(),
                  [](const DatasetItem& it) { return it.scores.has_value(); });

  std::vector<Family> families;
  if (opts.family.empty()) {
    if (scores_everywhere) families.push_back(Family::threshold);
    families.push_back(Family::erosion);
  } else {
    families.push_back(family_from_name(opts.family));
  }

  const StructuringElement se = parse_se(opts.se);
  std::map<Family, std::vector<LabeledPrediction>> labeled;
  for (Family family : families)
    labeled.emplace(family, labeled_items(items, family, se));

  ProtocolResult combined;
  combined.seeds = opts.seeds;
  for (double tau : opts.taus) {
    std::optional<MethodSummary> baseline;
    std::vector<MethodSummary> method_rows;
    for (Family family : families) {
      std::optional<StructuringElement> cfg_se;
      if (family == Family::erosion) cfg_se = se;
      CalibConfig config(opts.alpha, tau, family, cfg_se);
      ProtocolResult result =
          run_protocol(labeled.at(family), config, opts.seeds, opts.workers);
      combined.prng = result.prng;
      // The mask-backed prediction is the canonical baseline when both
      // families run; the rows coincide whenever masks equal the 0.5 cut.
      if (!baseline || family == Family::erosion)
        baseline = std::move(result.rows[0]);
      method_rows.push_back(std::move(result.rows[1]));
    }
    combined.rows.push_back(std::move(*baseline));
    for (MethodSummary& row : method_rows)
      combined.rows.push_back(std::move(row));
  }

  fs::create_directories(opts.out);
  const std::string csv = summary_to_csv(combined);
  write_text(fs::path(opts.out) / "report.csv", csv);
  write_text(fs::path(opts.out) / "report.json", report_to_json(combined));
  std::printf("%s", csv.c_str());
  std::printf("reports written to %s\n", opts.out.c_str());
}

// ---- synth ----

struct SynthOpts {
  std::size_t n = 0;
  std::string grid = "48x48";
  std::uint64_t seed = 0;
  double fp_rate = 0.95;
  std::uint32_t halo = 2;
  double sharpness = 1.1;
  std::string radius = "7:13";
  std::string emit = "both";
  std::string out;
  unsigned workers = 0;
};

void run_synth(const SynthOpts& opts) {
  SynthParams params;
  params.seed = opts.seed;
  params.fp_rate = opts.fp_rate;
  params.boundary_fp_width = opts.halo;
  params.score_sharpness = opts.sharpness;
  {
    unsigned long long w = 0, h = 0;
    if (std::sscanf(opts.grid.c_str(), "%llux%llu", &w, &h) != 2 || w == 0 ||
        h == 0)
      throw ConfigError("bad --grid (want WxH): " + opts.grid);
    params.width = w;
    params.height = h;
  }
  {
    double lo = 0, hi = 0;
    if (std::sscanf(opts.radius.c_str(), "%lf:%lf", &lo, &hi) != 2)
      throw ConfigError("bad --radius (want MIN:MAX): " + opts.radius);
    params.radius_min = lo;
    params.radius_max = hi;
  }
  params.validate();
  if (opts.n == 0) throw ConfigError("--n must be positive");

  const bool emit_scores = opts.emit == "scores" || opts.emit == "both";
  const bool emit_masks = opts.emit == "masks" || opts.emit == "both";
  if (!emit_scores && !emit_masks)
    throw ConfigError("bad --emit (want scores, masks, or both): " +
                      opts.emit);

  const fs::path root(opts.out);
  fs::create_directories(root / "truth");
  if (emit_scores) fs::create_directories(root / "scores");
  if (emit_masks) fs::create_directories(root / "masks");

  int width = 4;
  for (std::size_t v = opts.n - 1; v >= 10000; v /= 10) ++width;

  DatasetManifest manifest;
  manifest.root = root;
  manifest.entries.resize(opts.n);
  parallel_for(opts.n, opts.workers, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth-%0*zu", width, i);
    LabeledPrediction item = synth_item(params, i);

    ManifestEntry entry;
    entry.id = name;
    entry.truth_path = std::string("truth/") + name + ".pgm";
    save_mask(item.truth, root / entry.truth_path);
    if (emit_scores) {
      entry.score_map_path = std::string("scores/") + name + ".npy";
      save_scoremap(item.family.scores(), root / entry.score_map_path);
    }
    if (emit_masks) {
      entry.mask_path = std::string("masks/") + name + ".pgm";
      save_mask(item.family.prediction(), root / entry.mask_path);
    }
    manifest.entries[i] = std::move(entry);
  });
  save_manifest(manifest);
  std::printf("wrote %zu synthetic item%s under %s\n", opts.n,
              opts.n == 1 ? "" : "s", opts.out.c_str());
}

// ---- report ----

struct ReportOpts {
  std::string json;
  std::string csv;
};

void run_report(const ReportOpts& opts) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(opts.json));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report file is not valid JSON: ") + e.what());
  }
  try {
    std::printf("%-10s %-8s %-7s %-15s %-15s %-15s\n", "method", "tau",
                "alpha", "EV", "CR", "ATP");
    std::string csv =
        "method,tau,alpha,ev_mean,ev_std,cr_mean,cr_std,atp_mean,atp_std\n";
    for (const auto& row : doc.at("rows")) {
      const std::string method = row.at("method").get<std::string>();
      const double tau = row.at("tau").get<double>();
      const double alpha = row.at("alpha").get<double>();
      const double ev_m = row.at("ev_mean").get<double>();
      const double ev_s = row.at("ev_std").get<double>();
      const double cr_m = row.at("cr_mean").get<double>();
      const double cr_s = row.at("cr_std").get<double>();
      const double atp_m = row.at("atp_mean").get<double>();
      const double atp_s = row.at("atp_std").get<double>();
      char ev[32], cr[32], atp[32];
      std::snprintf(ev, sizeof ev, "%.3f+/-%.3f", ev_m, ev_s);
      std::snprintf(cr, sizeof cr, "%.3f+/-%.3f", cr_m, cr_s);
      std::snprintf(atp, sizeof atp, "%.3f+/-%.3f", atp_m, atp_s);
      std::printf("%-10s %-8g %-7g %-15s %-15s %-15s\n", method.c_str(), tau,
                  alpha, ev, cr, atp);
      char line[256];
      std::snprintf(line, sizeof line, "%s,%g,%g,%f,%f,%f,%f,%f,%f\n",
                    method.c_str(), tau, alpha, ev_m, ev_s, cr_m, cr_s, atp_m,
                    atp_s);
      csv += line;
    }
    if (!opts.csv.empty()) {
      write_text(opts.csv, csv);
      std::printf("csv written to %s\n", opts.csv.c_str());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report file: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal confidence masks for binary segmentation"};
  app.require_subcommand(1);

  CalibrateOpts cal;
  CLI::App* c = app.add_subcommand(
      "calibrate", "Calibrate a shrink level on a labeled manifest");
  c->add_option("manifest", cal.manifest, "Path to manifest.jsonl")
      ->required();
  c->add_option("--alpha", cal.alpha, "Miscoverage level in (0,1)")
      ->required();
  c->add_option("--tau", cal.tau, "Accepted-FP tolerance in [0,1]")
      ->required();
  c->add_option("--family", cal.family, "Inner-set family")
      ->check(CLI::IsMember({"threshold", "erosion"}))
      ->required();
  c->add_option("--se", cal.se,
                "Structuring element: cross4, square8, or file:<path>");
  c->add_option("--out", cal.out, "Output model JSON path");
  c->add_option("--workers", cal.workers, "Worker threads (0 = auto)");
  c->callback([&cal] { run_calibrate(cal); });

  ApplyOpts ap;
  CLI::App* a = app.add_subcommand(
      "apply", "Split predictions into confidence/uncertain masks");
  a->add_option("model", ap.model, "Calibrated model JSON")->required();
  a->add_option("manifest", ap.manifest, "Path to manifest.jsonl")
      ->required();
  a->add_option("--out", ap.out, "Output directory");
  a->add_flag("--overlay", ap.overlay,
              "Also write color overlay PNGs (needs ground truth)");
  a->add_option("--workers", ap.workers, "Worker threads (0 = auto)");
  a->callback([&ap] { run_apply(ap); });

  EvalOpts ev;
  CLI::App* e = app.add_subcommand(
      "eval", "Multi-seed split protocol with EV/CR/ATP summaries");
  e->add_option("manifest", ev.manifest, "Path to manifest.jsonl")
      ->required();
  e->add_option("--alpha", ev.alpha, "Miscoverage level in (0,1)")
      ->required();
  e->add_option("--tau", ev.taus, "Accepted-FP tolerance (repeatable)")
      ->required()
      ->delimiter(',');
  e->add_option("--family", ev.family,
                "Restrict to one family (default: all applicable)")
      ->check(CLI::IsMember({"threshold", "erosion"}));
  e->add_option("--se", ev.se,
                "Structuring element: cross4, square8, or file:<path>");
  e->add_option("--seeds", ev.seeds, "Comma-separated split seeds")
      ->required()
      ->delimiter(',');
  e->add_option("--out", ev.out, "Output directory for report.csv/json");
  e->add_option("--workers", ev.workers, "Worker threads (0 = auto)");
  e->callback([&ev] { run_eval(ev); });

  SynthOpts sy;
  CLI::App* s = app.add_subcommand(
      "synth", "Materialize a synthetic labeled dataset");
  s->add_option("--n", sy.n, "Number of items")->required();
  s->add_option("--out", sy.out, "Output dataset directory")->required();
  s->add_option("--grid", sy.grid, "Grid size WxH");
  s->add_option("--seed", sy.seed, "Dataset seed");
  s->add_option("--fp-rate", sy.fp_rate, "Probability of a FP halo");
  s->add_option("--halo", sy.halo, "Widest FP halo ring, pixels");
  s->add_option("--sharpness", sy.sharpness, "Score sigmoid sharpness");
  s->add_option("--radius", sy.radius, "Blob radius range MIN:MAX");
  s->add_option("--emit", sy.emit, "Outputs per item")
      ->check(CLI::IsMember({"scores", "masks", "both"}));
  s->add_option("--workers", sy.workers, "Worker threads (0 = auto)");
  s->callback([&sy] { run_synth(sy); });

  ReportOpts rp;
  CLI::App* r = app.add_subcommand(
      "report", "Render an eval JSON report as a table");
  r->add_option("json", rp.json, "Path to report.json")->required();
  r->add_option("--csv", rp.csv, "Also write the summary CSV here");
  r->callback([&rp] { run_report(rp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const DataError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "internal error: %s\n", err.what());
    return 4;
  }
  return 0;
}
