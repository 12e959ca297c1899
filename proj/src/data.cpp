#include "bage/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "bage/io.hpp"

namespace bage {

EpochLabel epoch_of_year(int yoc) {
  if (yoc < kFirstEpochYear)
    fail(ErrorKind::OutOfRange, "year " + std::to_string(yoc) + " precedes the first epoch (1960)");
  return {std::min((yoc - kFirstEpochYear) / 10, kNumEpochs - 1)};
}

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation" || text == "val") return Split::Validation;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

void SplitRatios::validate() const {
  if (!(train > 0 && validation > 0 && test > 0)) fail(ErrorKind::Config, "split fractions must be positive");
  if (std::abs(train + validation + test - 1.0) > 1e-9) fail(ErrorKind::Config, "split fractions must sum to 1");
}

std::vector<ManifestRecord> filter_renovated(std::span<const ManifestRecord> records) {
  std::vector<ManifestRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const ManifestRecord& r) { return r.fyoc == r.yoc; });
  return out;
}

std::vector<ManifestRecord> split_by_house(std::span<const ManifestRecord> records, const SplitRatios& ratios,
                                           std::uint64_t seed) {
  ratios.validate();
  if (records.empty()) fail(ErrorKind::EmptyInput, "no records to split");

  // houses in first-appearance order, so the shuffle only depends on the seed
  std::vector<std::string> houses;
  std::unordered_map<std::string, std::size_t> images_per_house;
  for (const auto& r : records)
    if (images_per_house[r.house_id]++ == 0) houses.push_back(r.house_id);

  Rng rng(seed);
  std::shuffle(houses.begin(), houses.end(), rng);

  const double total = static_cast<double>(records.size());
  const std::array<double, 3> target{ratios.train * total, ratios.validation * total, ratios.test * total};
  std::array<double, 3> assigned{0, 0, 0};
  std::unordered_map<std::string, Split> house_split;
  for (const auto& h : houses) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s)
      if (target[s] - assigned[s] > target[best] - assigned[best]) best = s;
    assigned[best] += static_cast<double>(images_per_house[h]);
    house_split[h] = static_cast<Split>(best);
  }

  std::vector<ManifestRecord> out(records.begin(), records.end());
  for (auto& r : out) r.split = house_split.at(r.house_id);
  return out;
}

std::vector<ManifestRecord> parse_manifest(std::istream& in) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::MissingColumn, "manifest has no header row");

  auto column = [&](std::string_view name, bool required) -> long {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) fail(ErrorKind::MissingColumn, "manifest lacks column '" + std::string(name) + "'");
      return -1;
    }
    return it - header.begin();
  };
  const long c_path = column("image_path", true);
  const long c_house = column("house_id", true);
  const long c_yoc = column("yoc", true);
  const long c_fyoc = column("fyoc", true);
  const long c_split = column("split", false);
  const long c_mask = column("mask_path", false);

  std::vector<ManifestRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      fail(ErrorKind::Parse,
           "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()), line_no);
    ManifestRecord r;
    r.image_path = f[c_path];
    r.house_id = f[c_house];
    if (r.image_path.empty()) fail(ErrorKind::Parse, "empty image_path", line_no);
    if (r.house_id.empty()) fail(ErrorKind::Parse, "empty house_id", line_no);
    r.yoc = static_cast<int>(parse_long(f[c_yoc], "yoc", line_no));
    r.fyoc = static_cast<int>(parse_long(f[c_fyoc], "fyoc", line_no));
    if (r.fyoc < r.yoc) fail(ErrorKind::Parse, "fyoc precedes yoc", line_no);
    if (c_split >= 0 && !f[c_split].empty()) {
      r.split = parse_split(f[c_split]);
      if (!r.split) fail(ErrorKind::Parse, "unknown split '" + f[c_split] + "'", line_no);
    }
    if (c_mask >= 0) r.mask_path = f[c_mask];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_manifest(in);
}

std::string format_manifest(std::span<const ManifestRecord> records) {
  const bool with_mask = std::any_of(records.begin(), records.end(),
                                     [](const ManifestRecord& r) { return !r.mask_path.empty(); });
  std::string out = "image_path,house_id,yoc,fyoc,split";
  if (with_mask) out += ",mask_path";
  out += '\n';
  for (const auto& r : records) {
    out += r.image_path + ',' + r.house_id + ',' + std::to_string(r.yoc) + ',' + std::to_string(r.fyoc) + ',';
    if (r.split) out += to_string(*r.split);
    if (with_mask) out += ',' + r.mask_path;
    out += '\n';
  }
  return out;
}

const char* relevance_class_name(int index) {
  static constexpr const char* names[kNumRelevanceClasses] = {
      "building", "cars",      "people",   "trees", "grass", "asphalt",      "poles",
      "sunblind", "furniture", "fence",    "firewood", "sign", "miscellaneous"};
  if (index < 0 || index >= kNumRelevanceClasses) return "?";
  return names[index];
}

void SynthParams::validate() const {
  if (n_per_class < 1) fail(ErrorKind::Config, "n_per_class must be at least 1");
  if (image_size < 16) fail(ErrorKind::Config, "image_size must be at least 16");
  if (!(clutter_fraction >= 0.0 && clutter_fraction < 1.0)) fail(ErrorKind::Config, "clutter_fraction must lie in [0, 1)");
  if (images_per_house < 1) fail(ErrorKind::Config, "images_per_house must be at least 1");
}

namespace {

struct Rgb {
  double r, g, b;
};

struct TextureFamily {
  double orientation_deg;
  double period;
  Rgb dark;
  Rgb light;
};

// One family per epoch; orientation, period and palette all differ between classes.
constexpr std::array<TextureFamily, kNumEpochs> kFamilies{{
    {0.0, 6.0, {150, 55, 45}, {225, 205, 175}},
    {30.0, 8.0, {110, 80, 55}, {205, 185, 140}},
    {60.0, 10.0, {85, 85, 100}, {205, 205, 205}},
    {90.0, 12.0, {160, 120, 80}, {240, 230, 200}},
    {120.0, 14.0, {55, 65, 90}, {215, 222, 230}},
    {150.0, 16.0, {40, 40, 40}, {245, 245, 245}},
}};

struct HouseLook {
  double theta;
  double period;
  Rgb dark;
  Rgb light;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

HouseLook house_look(int cls, Rng& rng) {
  const auto& f = kFamilies[cls];
  auto jitter = [&rng](Rgb c) {
    return Rgb{c.r + uniform(rng, -15, 15), c.g + uniform(rng, -15, 15), c.b + uniform(rng, -15, 15)};
  };
  HouseLook look;
  look.theta = (f.orientation_deg + uniform(rng, -6.0, 6.0)) * std::numbers::pi / 180.0;
  look.period = f.period * uniform(rng, 0.9, 1.1);
  look.dark = jitter(f.dark);
  look.light = jitter(f.light);
  return look;
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

void paint_facade(ImageBuffer& img, const HouseLook& look, Rng& rng) {
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double light_tilt = uniform(rng, -20.0, 20.0);
  const double c = std::cos(look.theta), s = std::sin(look.theta);
  const int n = img.width;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = (x * c + y * s) * 2.0 * std::numbers::pi / look.period + phase;
      const double t = 0.5 + 0.5 * std::tanh(3.0 * std::sin(u));
      const double shade = light_tilt * (static_cast<double>(y) / img.height - 0.5);
      const Rgb px{look.dark.r + t * (look.light.r - look.dark.r), look.dark.g + t * (look.light.g - look.dark.g),
                   look.dark.b + t * (look.light.b - look.dark.b)};
      img.at(x, y, 0) = clamp_byte(px.r + shade + uniform(rng, -10, 10));
      img.at(x, y, 1) = clamp_byte(px.g + shade + uniform(rng, -10, 10));
      img.at(x, y, 2) = clamp_byte(px.b + shade + uniform(rng, -10, 10));
    }
  }
}

void add_clutter(ImageBuffer& img, LabelImage& mask, double fraction, Rng& rng) {
  if (fraction <= 0.0) return;
  const int n = img.width;
  const long target = std::lround(fraction * img.width * img.height);
  long covered = 0;
  for (int attempt = 0; attempt < 64 && covered < target; ++attempt) {
    const bool car = std::bernoulli_distribution(0.5)(rng);
    if (car) {
      const int w = static_cast<int>(uniform(rng, n / 5.0, n / 2.5));
      const int h = static_cast<int>(uniform(rng, n / 8.0, n / 4.0));
      const int x0 = static_cast<int>(uniform(rng, 0, n - w));
      const int y0 = static_cast<int>(uniform(rng, n / 2.0, img.height - h));
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
          if (mask.at(x, y) == 0) ++covered;
          mask.at(x, y) = static_cast<std::uint8_t>(RelevanceClass::Cars);
          for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = clamp_byte(uniform(rng, 0, 256));
        }
    } else {
      const double r = uniform(rng, n / 12.0, n / 5.0);
      const double cx = uniform(rng, r, n - r), cy = uniform(rng, r, img.height - r);
      for (int y = std::max(0, static_cast<int>(cy - r)); y <= std::min(img.height - 1, static_cast<int>(cy + r)); ++y)
        for (int x = std::max(0, static_cast<int>(cx - r)); x <= std::min(n - 1, static_cast<int>(cx + r)); ++x) {
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
          if (mask.at(x, y) == 0) ++covered;
          mask.at(x, y) = static_cast<std::uint8_t>(RelevanceClass::Trees);
          img.at(x, y, 0) = clamp_byte(uniform(rng, 20, 90));
          img.at(x, y, 1) = clamp_byte(uniform(rng, 80, 200));
          img.at(x, y, 2) = clamp_byte(uniform(rng, 20, 90));
        }
    }
  }
}

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  return std::string(std::max(0, width - static_cast<int>(s.size())), '0') + s;
}

}  // namespace

SyntheticCorpus synth_corpus(const SynthParams& params) {
  params.validate();
  SyntheticCorpus corpus;
  const int total = params.n_per_class * kNumEpochs;
  corpus.images.reserve(total);
  corpus.masks.reserve(total);
  corpus.records.reserve(total);

  int image_index = 0;
  int house_index = 0;
  for (int cls = 0; cls < kNumEpochs; ++cls) {
    HouseLook look{};
    std::string house_id;
    for (int k = 0; k < params.n_per_class; ++k) {
      if (k % params.images_per_house == 0) {
        Rng house_rng(mix_seed(params.seed, 1'000'000 + house_index));
        look = house_look(cls, house_rng);
        house_id = "house_" + zero_pad(house_index, 4);
        ++house_index;
      }
      Rng rng(mix_seed(params.seed, image_index));
      ImageBuffer img(params.image_size, params.image_size);
      LabelImage mask(params.image_size, params.image_size, 0);
      paint_facade(img, look, rng);
      add_clutter(img, mask, params.clutter_fraction, rng);

      const std::string stem = "img_" + zero_pad(image_index, 4) + ".png";
      ManifestRecord rec;
      rec.image_path = "images/" + stem;
      rec.mask_path = "masks/" + stem;
      rec.house_id = house_id;
      rec.yoc = rec.fyoc = kFirstEpochYear + 10 * cls;
      corpus.images.push_back(std::move(img));
      corpus.masks.push_back(std::move(mask));
      corpus.records.push_back(std::move(rec));
      ++image_index;
    }
  }
  return corpus;
}

}  // namespace bage
