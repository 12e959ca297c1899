#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bage/common.hpp"

namespace bage {

// Interleaved 8-bit RGB image.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool empty() const { return width <= 0 || height <= 0; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

// Single-channel float image, values nominally in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Single-channel 8-bit label image (e.g. per-pixel relevance classes).
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LabelImage() = default;
  LabelImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const LabelImage&, const LabelImage&) = default;
};

// Decodes PNG or JPEG (sniffed from the file signature). Grayscale sources are
// expanded to three equal channels, alpha is dropped, 16-bit PNGs are reduced to 8 bits.
// Throws Io when the file cannot be read and Decode when it is not a valid image.
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

void save_png(const ImageBuffer& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

void save_label_png(const LabelImage& labels, const std::filesystem::path& path);
LabelImage load_label_png(const std::filesystem::path& path);

// BT.601 luma scaled to [0, 1].
GrayImage to_grayscale(const ImageBuffer& image);

// Corner-aligned bilinear resampling: output corners map onto input corners.
ImageBuffer resize_bilinear(const ImageBuffer& image, int width, int height);
inline ImageBuffer resize_bilinear(const ImageBuffer& image, int side) {
  return resize_bilinear(image, side, side);
}

ImageBuffer flip_horizontal(const ImageBuffer& image);

struct AugmentRanges {
  double crop_min = 0.8, crop_max = 1.0;
  double scale_min = 0.9, scale_max = 1.1;
  double brightness_max = 32.0;
  double contrast_min = 0.75, contrast_max = 1.25;
  double saturation_min = 0.75, saturation_max = 1.25;
  double flip_probability = 0.5;
};

struct AugmentParams {
  bool flip_horizontal = false;
  double crop_fraction = 1.0;
  double scale_factor = 1.0;
  double brightness_shift = 0.0;
  double contrast_gain = 1.0;
  double saturation_gain = 1.0;

  void validate(const AugmentRanges& ranges = {}) const;
};

// flip -> central crop (resized back) -> zoom about the centre -> brightness ->
// contrast about 128 -> saturation about per-pixel luma. Each photometric stage
// clamps to [0, 255]; rounding happens once at the end.
ImageBuffer augment(const ImageBuffer& patch, const AugmentParams& params);

AugmentParams sample_augment_params(Rng& rng, const AugmentRanges& ranges = {});

}  // namespace bage
