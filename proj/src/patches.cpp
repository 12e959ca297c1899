#include "bage/patches.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace bage {

bool geometry_less(const PatchGeometry& a, const PatchGeometry& b) {
  return std::tie(a.scale_index, a.side, a.y, a.x) < std::tie(b.scale_index, b.side, b.y, b.x);
}

int grid_stride(int side, double overlap) {
  return std::max(1, static_cast<int>(std::lround(side * (1.0 - overlap))));
}

std::vector<PatchGeometry> sample_grid(int width, int height, std::span<const int> sides, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) fail(ErrorKind::OutOfRange, "overlap must lie in [0, 1)");
  if (sides.empty()) fail(ErrorKind::EmptyInput, "no patch sides given");
  std::vector<PatchGeometry> out;
  for (std::size_t s = 0; s < sides.size(); ++s) {
    const int side = sides[s];
    if (side < 1) fail(ErrorKind::OutOfRange, "patch side must be positive");
    if (side > width || side > height) continue;
    const int stride = grid_stride(side, overlap);
    for (int y = 0; y + side <= height; y += stride)
      for (int x = 0; x + side <= width; x += stride)
        out.push_back({x, y, side, static_cast<int>(s)});
  }
  return out;
}

Patch extract(const ImageBuffer& image, const PatchGeometry& g, std::string source_image_id) {
  if (g.side < 1 || g.x < 0 || g.y < 0 || g.x + g.side > image.width || g.y + g.side > image.height)
    fail(ErrorKind::OutOfBounds, "patch at (" + std::to_string(g.x) + "," + std::to_string(g.y) + ") side " +
                                     std::to_string(g.side) + " exceeds " + std::to_string(image.width) + "x" +
                                     std::to_string(image.height) + " image");
  Patch p{g, ImageBuffer(g.side, g.side), std::move(source_image_id)};
  const std::size_t row_bytes = static_cast<std::size_t>(g.side) * 3;
  for (int r = 0; r < g.side; ++r) {
    auto src = image.data.begin() + (static_cast<std::size_t>(g.y + r) * image.width + g.x) * 3;
    std::copy_n(src, row_bytes, p.pixels.data.begin() + r * row_bytes);
  }
  return p;
}

}  // namespace bage
