#pragma once

#include <string>
#include <vector>

#include "bage/imaging.hpp"

namespace bage {

inline const std::vector<int> kDefaultPatchSides{16, 24, 32, 40};
inline constexpr double kDefaultOverlap = 0.5;

struct PatchGeometry {
  int x = 0;
  int y = 0;
  int side = 0;
  int scale_index = 0;

  friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;
};

// Canonical geometry order: scale, then row, then column.
bool geometry_less(const PatchGeometry& a, const PatchGeometry& b);

struct Patch {
  PatchGeometry geometry;
  ImageBuffer pixels;
  std::string source_image_id;
};

// Stride of a scale for a given overlap; never less than one pixel.
int grid_stride(int side, double overlap);

// Grid positions per scale, scale-major, row-major within a scale. Positions
// run 0, stride, 2*stride, ... while the patch fits; border remainders are not padded.
std::vector<PatchGeometry> sample_grid(int width, int height, std::span<const int> sides, double overlap);

Patch extract(const ImageBuffer& image, const PatchGeometry& geometry, std::string source_image_id = {});

}  // namespace bage
