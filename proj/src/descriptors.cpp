#include "bage/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bage {

void SiftParams::validate() const {
  if (spatial_bins < 1 || orientation_bins < 1) fail(ErrorKind::Config, "sift bins must be positive");
  if (gaussian_window && !(sigma_fraction > 0.0)) fail(ErrorKind::Config, "sift sigma_fraction must be positive");
  if (!(clip > 0.0)) fail(ErrorKind::Config, "sift clip must be positive");
}

namespace {

struct AxisBin {
  int lo;
  int hi;
  double w_hi;
};

// Linear split of a pixel centre between the two nearest cell centres.
AxisBin axis_bin(int pixel, int extent, int bins) {
  const double cell = static_cast<double>(extent) / bins;
  const double u = std::clamp((pixel + 0.5) / cell - 0.5, 0.0, static_cast<double>(bins - 1));
  const int lo = std::min(static_cast<int>(u), bins - 1);
  const int hi = std::min(lo + 1, bins - 1);
  return {lo, hi, u - lo};
}

}  // namespace

SiftDescriptor sift_descriptor(const GrayImage& patch, const SiftParams& params) {
  params.validate();
  const int w = patch.width, h = patch.height;
  if (w < 4 || h < 4) fail(ErrorKind::PatchTooSmall, "sift needs a patch of at least 4x4 pixels");

  const int nb = params.spatial_bins, no = params.orientation_bins;
  SiftDescriptor d;
  d.values.assign(static_cast<std::size_t>(params.dim()), 0.0);

  std::vector<AxisBin> xbins(w), ybins(h);
  for (int x = 0; x < w; ++x) xbins[x] = axis_bin(x, w, nb);
  for (int y = 0; y < h; ++y) ybins[y] = axis_bin(y, h, nb);

  std::vector<double> wx(w, 1.0), wy(h, 1.0);
  if (params.gaussian_window) {
    const double sx = params.sigma_fraction * w, sy = params.sigma_fraction * h;
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - w / 2.0;
      wx[x] = std::exp(-dx * dx / (2.0 * sx * sx));
    }
    for (int y = 0; y < h; ++y) {
      const double dy = y + 0.5 - h / 2.0;
      wy[y] = std::exp(-dy * dy / (2.0 * sy * sy));
    }
  }

  const double bins_per_radian = no / (2.0 * std::numbers::pi);
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    const AxisBin& by = ybins[y];
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const double gx = 0.5 * (patch.at(xp, y) - patch.at(xm, y));
      const double gy = 0.5 * (patch.at(x, yp) - patch.at(x, ym));
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      const double m = mag * wx[x] * wy[y];

      double o = std::atan2(gy, gx) * bins_per_radian;
      if (o < 0.0) o += no;
      int o0 = static_cast<int>(o);
      const double fo = o - o0;
      o0 %= no;
      const int o1 = (o0 + 1) % no;

      const AxisBin& bx = xbins[x];
      const int rows[2] = {by.lo, by.hi};
      const double rw[2] = {1.0 - by.w_hi, by.w_hi};
      const int cols[2] = {bx.lo, bx.hi};
      const double cw[2] = {1.0 - bx.w_hi, bx.w_hi};
      for (int i = 0; i < 2; ++i) {
        if (rw[i] == 0.0) continue;
        for (int j = 0; j < 2; ++j) {
          if (cw[j] == 0.0) continue;
          const double s = m * rw[i] * cw[j];
          double* cell = d.values.data() + (static_cast<std::size_t>(rows[i]) * nb + cols[j]) * no;
          cell[o0] += s * (1.0 - fo);
          cell[o1] += s * fo;
        }
      }
    }
  }
  return d;
}

double contrast_score(const SiftDescriptor& descriptor) {
  if (descriptor.normalized)
    fail(ErrorKind::NormalizedInput, "contrast must be computed on the unnormalized histogram");
  return l2_norm(descriptor.values);
}

SiftDescriptor normalize_descriptor(const SiftDescriptor& descriptor, double clip) {
  // a second clip pass would re-clip entries the first renormalisation pushed above the clip level
  if (descriptor.normalized) return descriptor;
  SiftDescriptor out = descriptor;
  out.normalized = true;
  double norm = l2_norm(out.values);
  if (norm == 0.0) {
    out.low_contrast = true;
    return out;
  }
  for (double& v : out.values) v = std::min(v / norm, clip);
  norm = l2_norm(out.values);
  for (double& v : out.values) v /= norm;
  return out;
}

}  // namespace bage
