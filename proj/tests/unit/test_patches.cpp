#include <doctest.h>

#include <map>

#include "bage/patches.hpp"
#include "../support/helpers.hpp"
#include "../support/oracles.hpp"

using namespace bage;
using bage::testing::error_kind;
using bage::testing::random_image;

TEST_CASE("sample_grid closed-form counts") {
  const std::vector<int> one{16};
  CHECK(sample_grid(64, 64, one, 0.5).size() == 49);
  CHECK(sample_grid(15, 15, one, 0.5).empty());
  CHECK(sample_grid(16, 16, one, 0.5).size() == 1);
  const std::vector<int> four{16, 24, 32, 40};
  const auto grid = sample_grid(64, 64, four, 0.5);
  CHECK(grid.size() == 78);
  std::map<int, int> per_side;
  for (const auto& g : grid) ++per_side[g.side];
  CHECK(per_side[16] == 49);
  CHECK(per_side[24] == 16);
  CHECK(per_side[32] == 9);
  CHECK(per_side[40] == 4);
}

TEST_CASE("sample_grid strides and ordering") {
  CHECK(grid_stride(16, 0.5) == 8);
  CHECK(grid_stride(24, 0.5) == 12);
  CHECK(grid_stride(40, 0.5) == 20);
  CHECK(grid_stride(16, 0.0) == 16);
  CHECK(grid_stride(3, 0.9) == 1);

  const std::vector<int> sides{24, 16};
  const auto grid = sample_grid(48, 40, sides, 0.5);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& a = grid[i - 1];
    const auto& b = grid[i];
    // scale-major, then row-major
    CHECK((a.scale_index < b.scale_index || (a.scale_index == b.scale_index && (a.y < b.y || (a.y == b.y && a.x < b.x)))));
  }
  CHECK(grid.front().side == 24);
  CHECK(grid.front().scale_index == 0);
  CHECK(grid.back().side == 16);
  CHECK(grid.back().scale_index == 1);
}

TEST_CASE("sample_grid property: bounds, counts and overlap over random inputs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 150), h = 1 + static_cast<int>(rng() % 150);
    const int side = 1 + static_cast<int>(rng() % 48);
    const double overlap = static_cast<double>(rng() % 10) / 10.0;
    const std::vector<int> sides{side};
    const auto grid = sample_grid(w, h, sides, overlap);
    const int stride = std::max(1, static_cast<int>(std::lround(side * (1.0 - overlap))));
    CHECK(static_cast<long>(grid.size()) ==
          oracle::grid_axis_count(w, side, stride) * oracle::grid_axis_count(h, side, stride));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& g = grid[i];
      CHECK(g.x >= 0);
      CHECK(g.y >= 0);
      CHECK(g.x + g.side <= w);
      CHECK(g.y + g.side <= h);
      if (i > 0 && grid[i - 1].y == g.y) CHECK(grid[i - 1].x + side - g.x == side - stride);
    }
  }
}

TEST_CASE("sample_grid argument errors") {
  const std::vector<int> sides{16};
  CHECK(error_kind([&] { sample_grid(64, 64, sides, 1.0); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([&] { sample_grid(64, 64, sides, -0.1); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([] { sample_grid(64, 64, std::vector<int>{}, 0.5); }) == ErrorKind::EmptyInput);
}

TEST_CASE("extract copies pixels exactly") {
  std::mt19937_64 rng(12);
  const auto img = random_image(rng, 20, 12);
  const auto full = extract(img, {0, 0, 12, 0}, "img");
  CHECK(full.source_image_id == "img");
  CHECK(full.pixels.width == 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) CHECK(full.pixels.at(x, y, c) == img.at(x, y, c));

  const auto part = extract(img, {5, 2, 7, 0});
  CHECK(part.pixels.at(0, 0, 1) == img.at(5, 2, 1));
  CHECK(part.pixels.at(6, 6, 2) == img.at(11, 8, 2));

  const ImageBuffer flat(32, 32, 77);
  CHECK(extract(flat, {0, 0, 16, 0}).pixels == ImageBuffer(16, 16, 77));
  CHECK(error_kind([&] { extract(img, {10, 0, 12, 0}); }) == ErrorKind::OutOfBounds);
  CHECK(error_kind([&] { extract(img, {-1, 0, 4, 0}); }) == ErrorKind::OutOfBounds);
}
