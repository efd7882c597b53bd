#include "confmask/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>
#include <png.h>

#include "confmask/errors.hpp"
#include "confmask/log.hpp"
#include "confmask/parallel.hpp"

namespace confmask {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof())
    throw DataError("cannot read file: " + path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out.good()) throw DataError("write failed: " + path.string());
}

// ---- PGM ----

/// Reads one whitespace-delimited token, skipping '#' comments.
std::string pgm_token(const std::string& data, std::size_t& pos,
                      const std::filesystem::path& path) {
  while (pos < data.size()) {
    char c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < data.size() &&
         !std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  if (start == pos)
    throw DataError("malformed PGM header: " + path.string());
  return data.substr(start, pos - start);
}

std::size_t parse_dim(const std::string& token,
                      const std::filesystem::path& path) {
  std::size_t value = 0;
  for (char c : token) {
    if (c < '0' || c > '9')
      throw DataError("malformed PGM header: " + path.string());
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

BinaryMask load_pgm(const std::string& data,
                    const std::filesystem::path& path) {
  std::size_t pos = 2;  // past "P5"
  const std::size_t w = parse_dim(pgm_token(data, pos, path), path);
  const std::size_t h = parse_dim(pgm_token(data, pos, path), path);
  const std::size_t maxval = parse_dim(pgm_token(data, pos, path), path);
  if (w == 0 || h == 0)
    throw DataError("zero dimensions: " + path.string());
  if (maxval == 0 || maxval > 255)
    throw DataError("unsupported bit depth: maxval " + std::to_string(maxval) +
                    " in " + path.string());
  ++pos;  // single whitespace byte after maxval
  if (data.size() - pos < w * h)
    throw DataError("truncated PGM data: " + path.string());
  BinaryMask mask(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (static_cast<unsigned char>(data[pos + i * w + j]) >= 128)
        mask.set(i, j, true);
  return mask;
}

// ---- PNG ----

struct PngReadCursor {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + count > cur->size)
    png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data + cur->pos, count);
  cur->pos += count;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), count);
}

void png_flush_noop(png_structp) {}

BinaryMask load_png(const std::string& data,
                    const std::filesystem::path& path) {
  PngReadCursor cursor{reinterpret_cast<const unsigned char*>(data.data()),
                       data.size(), 0};
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("PNG decoder initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("PNG decoder initialization failed");
  }

  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("PNG decode failed: " + path.string());
  }

  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (w == 0 || h == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("zero dimensions: " + path.string());
  }
  if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported bit depth: expected 8-bit grayscale PNG, " +
                    path.string());
  }

  pixels.resize(static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (png_uint_32 i = 0; i < h; ++i) rows[i] = pixels.data() + i * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  BinaryMask mask(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (pixels[i * w + j] >= 128) mask.set(i, j, true);
  return mask;
}

// ---- NPY ----

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

std::size_t expect(const std::string& text, std::size_t pos,
                   const std::string& what,
                   const std::filesystem::path& path) {
  pos = text.find(what, pos);
  if (pos == std::string::npos)
    throw DataError("bad NPY header (missing " + what + "): " + path.string());
  return pos + what.size();
}

NpyHeader parse_npy_header(const std::string& text,
                           const std::filesystem::path& path) {
  NpyHeader hdr;

  std::size_t pos = expect(text, 0, "'descr'", path);
  pos = text.find('\'', pos);
  if (pos == std::string::npos)
    throw DataError("bad NPY header: " + path.string());
  std::size_t end = text.find('\'', pos + 1);
  if (end == std::string::npos)
    throw DataError("bad NPY header: " + path.string());
  hdr.descr = text.substr(pos + 1, end - pos - 1);

  pos = expect(text, 0, "'fortran_order'", path);
  pos = text.find_first_of("TF", pos);
  if (pos == std::string::npos)
    throw DataError("bad NPY header: " + path.string());
  hdr.fortran_order = text[pos] == 'T';

  pos = expect(text, 0, "'shape'", path);
  pos = text.find('(', pos);
  end = text.find(')', pos);
  if (pos == std::string::npos || end == std::string::npos)
    throw DataError("bad NPY header: " + path.string());
  std::string dims = text.substr(pos + 1, end - pos - 1);
  std::size_t value = 0;
  bool in_number = false;
  for (char c : dims) {
    if (c >= '0' && c <= '9') {
      value = value * 10 + static_cast<std::size_t>(c - '0');
      in_number = true;
    } else if (c == ',' || c == ' ') {
      if (in_number) hdr.shape.push_back(value);
      value = 0;
      in_number = false;
    } else {
      throw DataError("bad NPY header shape: " + path.string());
    }
  }
  if (in_number) hdr.shape.push_back(value);
  return hdr;
}

}  // namespace

BinaryMask load_mask(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() >= 2 && data[0] == 'P' && data[1] == '5')
    return load_pgm(data, path);
  static const unsigned char png_magic[] = {0x89, 'P', 'N', 'G'};
  if (data.size() >= 4 && std::memcmp(data.data(), png_magic, 4) == 0)
    return load_png(data, path);
  throw DataError("unrecognized mask format (want PGM P5 or PNG): " +
                  path.string());
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " +
                    std::to_string(mask.height()) + "\n255\n";
  out.reserve(out.size() + mask.pixel_count());
  for (std::size_t i = 0; i < mask.height(); ++i)
    for (std::size_t j = 0; j < mask.width(); ++j)
      out.push_back(mask.get(i, j) ? '\xff' : '\0');
  write_file(path, out);
}

ScoreMap load_scoremap(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  static const char magic[] = "\x93NUMPY";
  if (data.size() < 10 || std::memcmp(data.data(), magic, 6) != 0)
    throw DataError("bad NPY magic: " + path.string());
  const unsigned char major = static_cast<unsigned char>(data[6]);
  if (major != 1)
    throw DataError("unsupported NPY version " + std::to_string(major) +
                    ": " + path.string());
  const std::size_t header_len = static_cast<unsigned char>(data[8]) |
                                 (static_cast<unsigned char>(data[9]) << 8);
  if (data.size() < 10 + header_len)
    throw DataError("truncated NPY header: " + path.string());
  NpyHeader hdr = parse_npy_header(data.substr(10, header_len), path);

  if (hdr.fortran_order)
    throw DataError("unsupported layout: Fortran order in " + path.string());
  std::size_t item = 0;
  if (hdr.descr == "<f4")
    item = 4;
  else if (hdr.descr == "<f8")
    item = 8;
  else
    throw DataError("unsupported dtype '" + hdr.descr + "': " + path.string());

  std::vector<std::size_t> shape = hdr.shape;
  if (shape.size() == 3) {
    if (shape.front() == 1) {
      shape.erase(shape.begin());
      log::info("squeezed singleton leading axis in " + path.string());
    } else if (shape.back() == 1) {
      shape.pop_back();
      log::info("squeezed singleton trailing axis in " + path.string());
    }
  }
  if (shape.size() != 2)
    throw DataError("unsupported shape (want 2-D scores): " + path.string());
  const std::size_t h = shape[0];
  const std::size_t w = shape[1];
  if (h == 0 || w == 0)
    throw DataError("zero dimensions: " + path.string());

  const std::size_t payload = data.size() - 10 - header_len;
  if (payload < h * w * item)
    throw DataError("truncated NPY data: " + path.string());
  const char* raw = data.data() + 10 + header_len;

  std::vector<float> values(h * w);
  if (item == 4) {
    std::memcpy(values.data(), raw, h * w * 4);
  } else {
    for (std::size_t k = 0; k < h * w; ++k) {
      double v;
      std::memcpy(&v, raw + k * 8, 8);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DataError("score out of range: " + std::to_string(v) + " in " +
                        path.string());
      values[k] = static_cast<float>(v);
    }
  }
  try {
    return ScoreMap(h, w, std::move(values));
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + " in " + path.string());
  }
}

void save_scoremap(const ScoreMap& scores,
                   const std::filesystem::path& path) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                     std::to_string(scores.height()) + ", " +
                     std::to_string(scores.width()) + "), }";
  std::size_t total = 10 + dict.size() + 1;  // +1 for the closing newline
  std::size_t padded = (total + 63) / 64 * 64;
  dict.append(padded - total, ' ');
  dict.push_back('\n');

  std::string out;
  out.reserve(padded + scores.values().size() * 4);
  out.append("\x93NUMPY", 6);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out += dict;
  out.append(reinterpret_cast<const char*>(scores.values().data()),
             scores.values().size() * 4);
  write_file(path, out);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());

  DatasetManifest manifest;
  manifest.root = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      " is not valid JSON: " + e.what());
    }
    ManifestEntry entry;
    try {
      entry.id = doc.at("id").get<std::string>();
      if (doc.contains("score_map_path"))
        entry.score_map_path = doc["score_map_path"].get<std::string>();
      if (doc.contains("mask_path"))
        entry.mask_path = doc["mask_path"].get<std::string>();
      if (doc.contains("truth_path"))
        entry.truth_path = doc["truth_path"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    if (entry.id.empty())
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": empty id");
    if (entry.score_map_path.empty() && entry.mask_path.empty())
      throw DataError("manifest line " + std::to_string(line_no) + " (id " +
                      entry.id + "): needs score_map_path or mask_path");
    if (!seen.insert(entry.id).second)
      throw DataError("duplicate id: " + entry.id);
    for (const std::string& rel :
         {entry.score_map_path, entry.mask_path, entry.truth_path}) {
      if (rel.empty()) continue;
      std::filesystem::path full = manifest.root / rel;
      if (!std::filesystem::exists(full))
        throw DataError("missing file: " + full.string() + " (entry " +
                        entry.id + ")");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const ManifestEntry& entry : manifest.entries) {
    nlohmann::ordered_json doc;
    doc["id"] = entry.id;
    if (!entry.score_map_path.empty())
      doc["score_map_path"] = entry.score_map_path;
    if (!entry.mask_path.empty()) doc["mask_path"] = entry.mask_path;
    if (!entry.truth_path.empty()) doc["truth_path"] = entry.truth_path;
    out += doc.dump() + "\n";
  }
  write_file(manifest.root / "manifest.jsonl", out);
}

std::vector<DatasetItem> load_dataset(const DatasetManifest& manifest,
                                      unsigned workers) {
  std::vector<DatasetItem> items(manifest.entries.size());
  parallel_for(manifest.entries.size(), workers, [&](std::size_t k) {
    const ManifestEntry& entry = manifest.entries[k];
    DatasetItem item;
    item.id = entry.id;
    if (!entry.score_map_path.empty())
      item.scores = load_scoremap(manifest.root / entry.score_map_path);
    if (!entry.mask_path.empty())
      item.mask = load_mask(manifest.root / entry.mask_path);
    if (!entry.truth_path.empty())
      item.truth = load_mask(manifest.root / entry.truth_path);

    std::optional<std::pair<std::size_t, std::size_t>> dims;
    auto check = [&](std::size_t h, std::size_t w) {
      if (!dims) {
        dims = {h, w};
      } else if (dims->first != h || dims->second != w) {
        throw DataError("entry " + entry.id + ": dimension mismatch (" +
                        std::to_string(dims->first) + "x" +
                        std::to_string(dims->second) + " vs " +
                        std::to_string(h) + "x" + std::to_string(w) + ")");
      }
    };
    if (item.scores) check(item.scores->height(), item.scores->width());
    if (item.mask) check(item.mask->height(), item.mask->width());
    if (item.truth) check(item.truth->height(), item.truth->width());
    items[k] = std::move(item);
  });
  return items;
}

void save_rgb_png(std::size_t height, std::size_t width,
                  const std::vector<Rgb>& pixels,
                  const std::filesystem::path& path) {
  if (pixels.size() != height * width)
    throw InvariantError("overlay pixel buffer size mismatch");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw DataError("PNG encoder initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("PNG encoder initialization failed");
  }

  std::string out;
  std::vector<png_bytep> rows(height);
  std::vector<unsigned char> raw(height * width * 3);
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const Rgb& px = pixels[i * width + j];
      raw[(i * width + j) * 3 + 0] = px.r;
      raw[(i * width + j) * 3 + 1] = px.g;
      raw[(i * width + j) * 3 + 2] = px.b;
    }
    rows[i] = raw.data() + i * width * 3;
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encode failed: " + path.string());
  }
  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);

  write_file(path, out);
}

}  // namespace confmask
