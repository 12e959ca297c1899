#pragma once

#include <vector>

#include "bage/imaging.hpp"

namespace bage {

// Descriptor layout constants. The defaults are the conventional SIFT recipe:
// 4x4 spatial cells x 8 orientations, trilinear binning, Gaussian window with
// sigma = half the patch side, clipping at 0.2 between two L2 normalisations.
struct SiftParams {
  int spatial_bins = 4;
  int orientation_bins = 8;
  bool gaussian_window = true;
  double sigma_fraction = 0.5;
  double clip = 0.2;

  int dim() const { return spatial_bins * spatial_bins * orientation_bins; }
  void validate() const;
};

inline constexpr int kSiftDim = 128;

struct SiftDescriptor {
  // index = (cell_row * spatial_bins + cell_col) * orientation_bins + orientation
  std::vector<double> values;
  bool normalized = false;
  // set by normalize_descriptor when the input histogram was all zero
  bool low_contrast = false;
};

// One upright descriptor covering the whole patch. Gradients are central
// differences with replicated borders; orientation bin k is centred at
// k * 360/orientation_bins degrees. Cell coordinates are clamped at the outer
// cell centres so every pixel's (weighted) magnitude lands in the histogram.
SiftDescriptor sift_descriptor(const GrayImage& patch, const SiftParams& params = {});

// L2 norm of the raw histogram. Throws NormalizedInput for normalized descriptors.
double contrast_score(const SiftDescriptor& descriptor);

// L2-normalise, clip at `clip`, re-normalise. Descriptors already flagged as
// normalized are returned unchanged. An all-zero histogram stays zero and is
// flagged low_contrast.
SiftDescriptor normalize_descriptor(const SiftDescriptor& descriptor, double clip = 0.2);

}  // namespace bage
