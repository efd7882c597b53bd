#pragma once

// Shared fixtures for the test suites: a self-cleaning temp directory,
// slow-but-obvious reference implementations, and small random generators.

#include <confmask/mask.hpp>
#include <confmask/rng.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

class TempDir {
public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "confmask_test_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (::mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read failed: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Erosion spelled out pixel by pixel, the definition the fast path must match.
inline confmask::BinaryMask naive_erode(const confmask::BinaryMask& m,
                                        const confmask::StructuringElement& se) {
  confmask::BinaryMask out(m.height(), m.width());
  for (std::size_t i = 0; i < m.height(); ++i) {
    for (std::size_t j = 0; j < m.width(); ++j) {
      bool keep = true;
      for (const auto& [di, dj] : se.offsets()) {
        const long long ni = static_cast<long long>(i) + di;
        const long long nj = static_cast<long long>(j) + dj;
        if (ni < 0 || nj < 0 || ni >= static_cast<long long>(m.height()) ||
            nj >= static_cast<long long>(m.width()) ||
            !m.get(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj))) {
          keep = false;
          break;
        }
      }
      if (keep) out.set(i, j, true);
    }
  }
  return out;
}

inline confmask::BinaryMask random_mask(std::size_t h, std::size_t w, double density,
                                        confmask::SplitMix64& rng) {
  confmask::BinaryMask m(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (rng.next_unit() < density) m.set(i, j, true);
  return m;
}

inline confmask::ScoreMap random_scores(std::size_t h, std::size_t w, confmask::SplitMix64& rng,
                                        bool quantized = false) {
  std::vector<float> v(h * w);
  for (auto& s : v) {
    double u = rng.next_unit();
    if (quantized) u = std::floor(u * 16.0) / 16.0;
    s = static_cast<float>(u);
  }
  return confmask::ScoreMap(h, w, std::move(v));
}

}  // namespace testsupport
