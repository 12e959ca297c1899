#include "bage/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <png.h>

#include "bage/io.hpp"

namespace bage {

ImageBuffer::ImageBuffer(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read failed for " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes, png_uint_32 format, int channels) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorKind::Decode, "png: " + msg);
  }
  img.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  const png_color background{0, 0, 0};
  if (!png_image_finish_read(&img, &background, pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorKind::Decode, "png: " + msg);
  }
  ImageBuffer out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  if (channels == 3) {
    out.data = std::move(pixels);
  } else {
    out.data.resize(pixels.size() * 3);
    for (std::size_t i = 0; i < pixels.size(); ++i)
      out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = pixels[i];
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Any libjpeg warning (e.g. premature end of data) is treated as corruption.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  ImageBuffer out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorKind::Decode, std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* pixels, int width, int height, png_uint_32 format) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels, 0, nullptr))
    fail(ErrorKind::Io, std::string("png encode: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels, 0, nullptr))
    fail(ErrorKind::Io, std::string("png encode: ") + img.message);
  out.resize(size);
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

double sample_channel(const ImageBuffer& img, double sx, double sy, int c) {
  sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1.0 - fy) * top + fy * bottom;
}

double corner_aligned(int i, int src_n, int dst_n) {
  if (dst_n == 1) return (src_n - 1) / 2.0;
  if (src_n == dst_n) return i;
  return i * static_cast<double>(src_n - 1) / (dst_n - 1);
}

ImageBuffer crop(const ImageBuffer& img, int x, int y, int w, int h) {
  ImageBuffer out(w, h);
  for (int r = 0; r < h; ++r)
    std::copy_n(img.data.begin() + (static_cast<std::size_t>(y + r) * img.width + x) * 3, w * 3,
                out.data.begin() + static_cast<std::size_t>(r) * w * 3);
  return out;
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes, PNG_FORMAT_RGB, 3);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  fail(ErrorKind::Decode, "unrecognised image signature");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Decode) fail(ErrorKind::Decode, path.string() + ": " + e.what());
    throw;
  }
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  return encode_png_raw(image.data.data(), image.width, image.height, PNG_FORMAT_RGB);
}

void save_png(const ImageBuffer& image, const std::filesystem::path& path) {
  write_file(path, encode_png(image));
}

void save_label_png(const LabelImage& labels, const std::filesystem::path& path) {
  write_file(path, encode_png_raw(labels.data.data(), labels.width, labels.height, PNG_FORMAT_GRAY));
}

LabelImage load_label_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (!is_png(bytes)) fail(ErrorKind::Decode, path.string() + ": label maps must be PNG");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    fail(ErrorKind::Decode, path.string() + ": " + img.message);
  img.format = PNG_FORMAT_GRAY;
  LabelImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorKind::Decode, path.string() + ": " + msg);
  }
  return out;
}

GrayImage to_grayscale(const ImageBuffer& image) {
  GrayImage out(image.width, image.height);
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = image.data[3 * i], g = image.data[3 * i + 1], b = image.data[3 * i + 2];
    out.data[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
  }
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int width, int height) {
  if (width < 1 || height < 1) fail(ErrorKind::OutOfRange, "resize target must be at least 1x1");
  if (image.empty()) fail(ErrorKind::OutOfRange, "cannot resize an empty image");
  if (width == image.width && height == image.height) return image;
  ImageBuffer out(width, height);
  for (int y = 0; y < height; ++y) {
    const double sy = corner_aligned(y, image.height, height);
    for (int x = 0; x < width; ++x) {
      const double sx = corner_aligned(x, image.width, width);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_byte(sample_channel(image, sx, sy, c));
    }
  }
  return out;
}

ImageBuffer flip_horizontal(const ImageBuffer& image) {
  ImageBuffer out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(image.width - 1 - x, y, c) = image.at(x, y, c);
  return out;
}

void AugmentParams::validate(const AugmentRanges& r) const {
  auto check = [](double v, double lo, double hi, const char* name) {
    if (!(v >= lo && v <= hi))
      fail(ErrorKind::OutOfRange, std::string(name) + " outside [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
  };
  check(crop_fraction, r.crop_min, r.crop_max, "crop_fraction");
  check(scale_factor, r.scale_min, r.scale_max, "scale_factor");
  check(brightness_shift, -r.brightness_max, r.brightness_max, "brightness_shift");
  check(contrast_gain, r.contrast_min, r.contrast_max, "contrast_gain");
  check(saturation_gain, r.saturation_min, r.saturation_max, "saturation_gain");
}

ImageBuffer augment(const ImageBuffer& patch, const AugmentParams& p) {
  ImageBuffer img = p.flip_horizontal ? flip_horizontal(patch) : patch;
  const int w = img.width, h = img.height;

  if (p.crop_fraction < 1.0) {
    const int cw = std::clamp(static_cast<int>(std::lround(w * p.crop_fraction)), 1, w);
    const int ch = std::clamp(static_cast<int>(std::lround(h * p.crop_fraction)), 1, h);
    if (cw != w || ch != h) img = resize_bilinear(crop(img, (w - cw) / 2, (h - ch) / 2, cw, ch), w, h);
  }

  // zoom about the centre; samples outside the patch replicate the border
  if (p.scale_factor != 1.0) {
    ImageBuffer zoomed(w, h);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    for (int y = 0; y < h; ++y) {
      const double sy = cy + (y - cy) / p.scale_factor;
      for (int x = 0; x < w; ++x) {
        const double sx = cx + (x - cx) / p.scale_factor;
        for (int c = 0; c < 3; ++c) zoomed.at(x, y, c) = to_byte(sample_channel(img, sx, sy, c));
      }
    }
    img = std::move(zoomed);
  }

  if (p.brightness_shift == 0.0 && p.contrast_gain == 1.0 && p.saturation_gain == 1.0) return img;

  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (std::size_t i = 0; i < n; ++i) {
    double rgb[3];
    for (int c = 0; c < 3; ++c) {
      double v = std::clamp(img.data[3 * i + c] + p.brightness_shift, 0.0, 255.0);
      rgb[c] = std::clamp(128.0 + p.contrast_gain * (v - 128.0), 0.0, 255.0);
    }
    const double gray = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
    for (int c = 0; c < 3; ++c)
      img.data[3 * i + c] = to_byte(gray + p.saturation_gain * (rgb[c] - gray));
  }
  return img;
}

AugmentParams sample_augment_params(Rng& rng, const AugmentRanges& r) {
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  AugmentParams p;
  p.flip_horizontal = std::bernoulli_distribution(r.flip_probability)(rng);
  p.crop_fraction = uniform(r.crop_min, r.crop_max);
  p.scale_factor = uniform(r.scale_min, r.scale_max);
  p.brightness_shift = uniform(-r.brightness_max, r.brightness_max);
  p.contrast_gain = uniform(r.contrast_min, r.contrast_max);
  p.saturation_gain = uniform(r.saturation_min, r.saturation_max);
  return p;
}

}  // namespace bage
