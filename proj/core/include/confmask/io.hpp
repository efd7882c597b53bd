#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "confmask/mask.hpp"

namespace confmask {

/// One manifest line. Paths are stored as written (relative to the manifest
/// directory); resolve against DatasetManifest::root before opening.
struct ManifestEntry {
  std::string id;
  std::string score_map_path;  // empty when absent
  std::string mask_path;       // empty when absent
  std::string truth_path;      // empty when absent (eval requires it)
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

/// Decoded entry: score map and/or prediction mask, plus truth when listed.
struct DatasetItem {
  std::string id;
  std::optional<ScoreMap> scores;
  std::optional<BinaryMask> mask;
  std::optional<BinaryMask> truth;
};

/// 8-bit grayscale PGM (P5) or PNG, sniffed by magic bytes; pixels with
/// value >= 128 are foreground.
BinaryMask load_mask(const std::filesystem::path& path);

/// PGM P5, values 0/255.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// NPY v1.0, little-endian f4/f8, C order, 2-D (or 3-D with a singleton
/// leading/trailing axis, squeezed with a log record). Values outside
/// [0, 1] are an error.
ScoreMap load_scoremap(const std::filesystem::path& path);

/// NPY v1.0, little-endian f4, C order.
void save_scoremap(const ScoreMap& scores, const std::filesystem::path& path);

/// Parses `<root>/manifest.jsonl` (one JSON object per line) and eagerly
/// verifies id uniqueness and that every referenced file exists.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes `<root>/manifest.jsonl` for the given entries.
void save_manifest(const DatasetManifest& manifest);

/// Decodes every entry and checks per-entry dimension consistency. Loading
/// is read-only and order-independent; `workers` only affects wall time.
std::vector<DatasetItem> load_dataset(const DatasetManifest& manifest,
                                      unsigned workers = 0);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// 8-bit RGB PNG; pixels row-major, size width*height.
void save_rgb_png(std::size_t height, std::size_t width,
                  const std::vector<Rgb>& pixels,
                  const std::filesystem::path& path);

}  // namespace confmask
