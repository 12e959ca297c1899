#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "bage/common.hpp"
#include "bage/imaging.hpp"

namespace bage::testing {

template <typename Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline ImageBuffer random_image(std::mt19937_64& rng, int w, int h) {
  ImageBuffer img(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("bage_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace bage::testing
