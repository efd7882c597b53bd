#include <doctest.h>

#include <confmask/errors.hpp>
#include <confmask/io.hpp>
#include <confmask/rng.hpp>

#include <json.hpp>

#include <cstring>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace confmask;
using testsupport::TempDir;
using testsupport::random_mask;
using testsupport::random_scores;
using testsupport::read_bytes;
using testsupport::write_bytes;

namespace {

// 3x2 grayscale PNG, pixel values {0, 127, 128} / {255, 10, 200}.
const unsigned char kGrayPng[] = {
    137, 80, 78, 71, 13, 10, 26, 10, 0, 0, 0, 13, 73, 72, 68, 82, 0, 0, 0,
    3, 0, 0, 0, 2, 8, 0, 0, 0, 0, 184, 31, 57, 198, 0, 0, 0, 16, 73, 68,
    65, 84, 120, 156, 99, 96, 168, 111, 96, 248, 207, 117, 2, 0, 9, 91, 2,
    209, 216, 25, 112, 101, 0, 0, 0, 0, 73, 69, 78, 68, 174, 66, 96, 130};

// Same shape but RGB: not a mask encoding this loader accepts.
const unsigned char kRgbPng[] = {
    137, 80, 78, 71, 13, 10, 26, 10, 0, 0, 0, 13, 73, 72, 68, 82, 0, 0, 0,
    3, 0, 0, 0, 2, 8, 2, 0, 0, 0, 18, 22, 241, 77, 0, 0, 0, 27, 73, 68, 65,
    84, 120, 156, 99, 96, 96, 96, 168, 103, 96, 104, 0, 82, 255, 25, 24,
    184, 24, 24, 78, 48, 48, 0, 0, 26, 15, 2, 209, 11, 153, 146, 252, 0, 0,
    0, 0, 73, 69, 78, 68, 174, 66, 96, 130};

std::string bytes_of(const unsigned char* data, std::size_t n) {
  return std::string(reinterpret_cast<const char*>(data), n);
}

// Hand-assembled NPY v1.0 container.
std::string make_npy(const std::string& descr, bool fortran, const std::string& shape,
                     const std::string& payload) {
  std::string header = "{'descr': '" + descr + "', 'fortran_order': " +
                       (fortran ? "True" : "False") + ", 'shape': " + shape + ", }";
  while ((10 + header.size() + 1) % 16 != 0) header.push_back(' ');
  header.push_back('\n');
  std::string out = "\x93NUMPY";
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<unsigned>(header.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out += header;
  out += payload;
  return out;
}

std::string f4_payload(const std::vector<float>& values) {
  std::string out(values.size() * 4, '\0');
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::string f8_payload(const std::vector<double>& values) {
  std::string out(values.size() * 8, '\0');
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

}  // namespace

TEST_CASE("pgm round-trip preserves the mask") {
  TempDir tmp;
  SplitMix64 rng(51);
  BinaryMask m = random_mask(13, 37, 0.5, rng);
  save_mask(m, tmp.file("m.pgm"));
  CHECK(load_mask(tmp.file("m.pgm")) == m);

  const std::string head = read_bytes(tmp.file("m.pgm")).substr(0, 2);
  CHECK(head == "P5");
}

TEST_CASE("pgm splits foreground at 128") {
  TempDir tmp;
  std::string pgm = "P5\n2 2\n255\n";
  pgm += '\x7f';  // 127: background
  pgm += '\x80';  // 128: foreground
  pgm += '\x00';
  pgm += '\xff';
  write_bytes(tmp.file("m.pgm"), pgm);
  BinaryMask m = load_mask(tmp.file("m.pgm"));
  CHECK_FALSE(m.get(0, 0));
  CHECK(m.get(0, 1));
  CHECK_FALSE(m.get(1, 0));
  CHECK(m.get(1, 1));
}

TEST_CASE("pgm comments and odd whitespace parse") {
  TempDir tmp;
  std::string pgm = "P5 # format\n# a comment line\n 2\t1 # dims\n255\n";
  pgm += '\xff';
  pgm += '\x00';
  write_bytes(tmp.file("m.pgm"), pgm);
  BinaryMask m = load_mask(tmp.file("m.pgm"));
  CHECK(m.height() == 1);
  CHECK(m.width() == 2);
  CHECK(m.get(0, 0));
  CHECK_FALSE(m.get(0, 1));
}

TEST_CASE("pgm rejects wide or broken input") {
  TempDir tmp;
  write_bytes(tmp.file("deep.pgm"), std::string("P5\n1 1\n65535\n\x01\x01"));
  CHECK_THROWS_WITH_AS(load_mask(tmp.file("deep.pgm")),
                       doctest::Contains("unsupported bit depth"), DataError);

  write_bytes(tmp.file("short.pgm"), std::string("P5\n2 2\n255\n\xff"));
  CHECK_THROWS_AS(load_mask(tmp.file("short.pgm")), DataError);

  write_bytes(tmp.file("zero.pgm"), std::string("P5\n0 2\n255\n"));
  CHECK_THROWS_AS(load_mask(tmp.file("zero.pgm")), DataError);

  write_bytes(tmp.file("junk.bin"), "MZ\x90\x00");
  CHECK_THROWS_AS(load_mask(tmp.file("junk.bin")), DataError);

  CHECK_THROWS_AS(load_mask(tmp.file("absent.pgm")), DataError);
}

TEST_CASE("grayscale png decodes with the 128 cut") {
  TempDir tmp;
  write_bytes(tmp.file("m.png"), bytes_of(kGrayPng, sizeof kGrayPng));
  BinaryMask m = load_mask(tmp.file("m.png"));
  REQUIRE(m.height() == 2);
  REQUIRE(m.width() == 3);
  CHECK_FALSE(m.get(0, 0));
  CHECK_FALSE(m.get(0, 1));  // 127
  CHECK(m.get(0, 2));        // 128
  CHECK(m.get(1, 0));        // 255
  CHECK_FALSE(m.get(1, 1));  // 10
  CHECK(m.get(1, 2));        // 200
}

TEST_CASE("non-grayscale png is refused") {
  TempDir tmp;
  write_bytes(tmp.file("rgb.png"), bytes_of(kRgbPng, sizeof kRgbPng));
  CHECK_THROWS_WITH_AS(load_mask(tmp.file("rgb.png")),
                       doctest::Contains("unsupported bit depth"), DataError);

  write_bytes(tmp.file("trunc.png"), bytes_of(kGrayPng, sizeof kGrayPng / 2));
  CHECK_THROWS_AS(load_mask(tmp.file("trunc.png")), DataError);
}

TEST_CASE("npy round-trip preserves scores") {
  TempDir tmp;
  SplitMix64 rng(52);
  ScoreMap s = random_scores(9, 21, rng);
  save_scoremap(s, tmp.file("s.npy"));
  ScoreMap back = load_scoremap(tmp.file("s.npy"));
  CHECK(back.height() == 9);
  CHECK(back.width() == 21);
  CHECK(back.values() == s.values());
}

TEST_CASE("npy f8 input converts") {
  TempDir tmp;
  write_bytes(tmp.file("s.npy"),
              make_npy("<f8", false, "(2, 2)", f8_payload({0.0, 0.25, 0.5, 1.0})));
  ScoreMap s = load_scoremap(tmp.file("s.npy"));
  CHECK(s.at(0, 1) == 0.25f);
  CHECK(s.at(1, 1) == 1.0f);
}

TEST_CASE("npy singleton axes squeeze") {
  TempDir tmp;
  const std::vector<float> v = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f};
  write_bytes(tmp.file("lead.npy"), make_npy("<f4", false, "(1, 2, 3)", f4_payload(v)));
  ScoreMap lead = load_scoremap(tmp.file("lead.npy"));
  CHECK(lead.height() == 2);
  CHECK(lead.width() == 3);

  write_bytes(tmp.file("trail.npy"), make_npy("<f4", false, "(2, 3, 1)", f4_payload(v)));
  ScoreMap trail = load_scoremap(tmp.file("trail.npy"));
  CHECK(trail.height() == 2);
  CHECK(trail.width() == 3);
  CHECK(trail.values() == v);
}

TEST_CASE("npy rejections carry the reason") {
  TempDir tmp;
  const std::vector<float> v = {0.1f, 0.2f};

  write_bytes(tmp.file("fortran.npy"), make_npy("<f4", true, "(1, 2)", f4_payload(v)));
  CHECK_THROWS_WITH_AS(load_scoremap(tmp.file("fortran.npy")),
                       doctest::Contains("unsupported layout"), DataError);

  write_bytes(tmp.file("dtype.npy"), make_npy("<i4", false, "(1, 2)", std::string(8, '\0')));
  CHECK_THROWS_WITH_AS(load_scoremap(tmp.file("dtype.npy")),
                       doctest::Contains("unsupported dtype"), DataError);

  write_bytes(tmp.file("range.npy"), make_npy("<f4", false, "(1, 2)", f4_payload({0.5f, 1.5f})));
  CHECK_THROWS_WITH_AS(load_scoremap(tmp.file("range.npy")),
                       doctest::Contains("score out of range"), DataError);

  write_bytes(tmp.file("rank1.npy"), make_npy("<f4", false, "(2,)", f4_payload(v)));
  CHECK_THROWS_WITH_AS(load_scoremap(tmp.file("rank1.npy")),
                       doctest::Contains("unsupported shape"), DataError);

  write_bytes(tmp.file("trunc.npy"), make_npy("<f4", false, "(2, 2)", f4_payload(v)));
  CHECK_THROWS_AS(load_scoremap(tmp.file("trunc.npy")), DataError);

  write_bytes(tmp.file("magic.npy"), "NOTNPY__" + f4_payload(v));
  CHECK_THROWS_AS(load_scoremap(tmp.file("magic.npy")), DataError);
}

TEST_CASE("manifest round-trip and dataset loading") {
  TempDir tmp;
  SplitMix64 rng(53);

  DatasetManifest manifest;
  manifest.root = tmp.path();
  for (int k = 0; k < 3; ++k) {
    const std::string id = "item" + std::to_string(k);
    ScoreMap s = random_scores(6, 7, rng);
    BinaryMask truth = random_mask(6, 7, 0.4, rng);
    save_scoremap(s, tmp.file(id + ".npy"));
    save_mask(truth, tmp.file(id + "_truth.pgm"));
    save_mask(threshold(s, 0.5), tmp.file(id + "_mask.pgm"));
    ManifestEntry e;
    e.id = id;
    e.score_map_path = id + ".npy";
    e.mask_path = id + "_mask.pgm";
    e.truth_path = id + "_truth.pgm";
    manifest.entries.push_back(e);
  }
  save_manifest(manifest);

  DatasetManifest loaded = load_manifest(tmp.path() / "manifest.jsonl");
  REQUIRE(loaded.entries.size() == 3);
  CHECK(loaded.entries[1].id == "item1");
  CHECK(loaded.entries[1].score_map_path == "item1.npy");

  auto items = load_dataset(loaded);
  REQUIRE(items.size() == 3);
  for (const auto& item : items) {
    REQUIRE(item.scores.has_value());
    REQUIRE(item.mask.has_value());
    REQUIRE(item.truth.has_value());
    CHECK(*item.mask == threshold(*item.scores, 0.5));
  }

  auto parallel = load_dataset(loaded, 3);
  CHECK(parallel.size() == 3);
  CHECK(*parallel[2].truth == *items[2].truth);
}

TEST_CASE("manifest validation points at the offending line") {
  TempDir tmp;
  SplitMix64 rng(54);
  save_mask(random_mask(3, 3, 0.5, rng), tmp.file("a.pgm"));

  write_bytes(tmp.file("manifest.jsonl"),
              R"({"id":"a","mask_path":"a.pgm"})" "\n" "{oops\n");
  CHECK_THROWS_WITH_AS(load_manifest(tmp.file("manifest.jsonl")),
                       doctest::Contains("line 2"), DataError);

  write_bytes(tmp.file("manifest.jsonl"),
              R"({"id":"a","mask_path":"a.pgm"})" "\n"
              R"({"id":"a","mask_path":"a.pgm"})" "\n");
  CHECK_THROWS_WITH_AS(load_manifest(tmp.file("manifest.jsonl")),
                       doctest::Contains("duplicate id"), DataError);

  write_bytes(tmp.file("manifest.jsonl"), R"({"id":"b","mask_path":"nope.pgm"})" "\n");
  CHECK_THROWS_WITH_AS(load_manifest(tmp.file("manifest.jsonl")),
                       doctest::Contains("missing file"), DataError);

  write_bytes(tmp.file("manifest.jsonl"), R"({"id":"c"})" "\n");
  CHECK_THROWS_AS(load_manifest(tmp.file("manifest.jsonl")), DataError);

  write_bytes(tmp.file("manifest.jsonl"), R"({"mask_path":"a.pgm"})" "\n");
  CHECK_THROWS_AS(load_manifest(tmp.file("manifest.jsonl")), DataError);
}

TEST_CASE("blank manifest lines are skipped") {
  TempDir tmp;
  SplitMix64 rng(55);
  save_mask(random_mask(3, 3, 0.5, rng), tmp.file("a.pgm"));
  write_bytes(tmp.file("manifest.jsonl"),
              "\n" R"({"id":"a","mask_path":"a.pgm"})" "\n\n");
  CHECK(load_manifest(tmp.file("manifest.jsonl")).entries.size() == 1);
}

TEST_CASE("dimension mismatches are caught per entry") {
  TempDir tmp;
  SplitMix64 rng(56);
  save_scoremap(random_scores(4, 4, rng), tmp.file("s.npy"));
  save_mask(random_mask(5, 4, 0.5, rng), tmp.file("t.pgm"));
  write_bytes(tmp.file("manifest.jsonl"),
              R"({"id":"x","score_map_path":"s.npy","truth_path":"t.pgm"})" "\n");
  DatasetManifest m = load_manifest(tmp.file("manifest.jsonl"));
  CHECK_THROWS_WITH_AS(load_dataset(m), doctest::Contains("dimension mismatch"), DataError);
}

TEST_CASE("rgb png writes a decodable file") {
  TempDir tmp;
  std::vector<Rgb> px(6);
  px[2] = Rgb{255, 191, 0};
  save_rgb_png(2, 3, px, tmp.file("o.png"));
  const std::string bytes = read_bytes(tmp.file("o.png"));
  REQUIRE(bytes.size() > 8);
  CHECK(static_cast<unsigned char>(bytes[0]) == 137);
  CHECK(bytes.substr(1, 3) == "PNG");
}
