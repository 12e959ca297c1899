#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bage/imaging.hpp"

namespace bage {

inline constexpr int kNumEpochs = 6;
inline constexpr int kFirstEpochYear = 1960;

// Decade-long construction period; index 0 = 1960s ... 5 = 2010s.
struct EpochLabel {
  int index = 0;

  int decade_start() const { return kFirstEpochYear + 10 * index; }
  std::string name() const { return std::to_string(decade_start()) + "s"; }

  friend auto operator<=>(const EpochLabel&, const EpochLabel&) = default;
};

// Years past the last decade stay in the 2010s epoch. Throws OutOfRange before 1960.
EpochLabel epoch_of_year(int yoc);

enum class Split { Train, Validation, Test };

const char* to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct ManifestRecord {
  std::string image_path;
  std::string house_id;
  int yoc = 0;
  int fyoc = 0;  // fictitious year of construction, yoc + renovation extension
  std::optional<Split> split;
  // optional per-pixel relevance label map (PNG, values are RelevanceClass indices)
  std::string mask_path;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;
};

// Keeps records without renovation extension (fyoc == yoc), preserving order.
std::vector<ManifestRecord> filter_renovated(std::span<const ManifestRecord> records);

// House-disjoint split: houses are shuffled with the seed, then each house goes
// to the split whose image count is furthest below its target (ties -> train,
// validation, test). Records keep their input order.
std::vector<ManifestRecord> split_by_house(std::span<const ManifestRecord> records, const SplitRatios& ratios,
                                           std::uint64_t seed);

// Header `image_path,house_id,yoc,fyoc[,split][,mask_path]`, columns in any order;
// unknown columns are ignored, blank lines skipped.
std::vector<ManifestRecord> parse_manifest(std::istream& in);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
std::string format_manifest(std::span<const ManifestRecord> records);

// Patch relevance classes; index 0 is the positive class.
enum class RelevanceClass : std::uint8_t {
  Building = 0,
  Cars,
  People,
  Trees,
  Grass,
  Asphalt,
  Poles,
  Sunblind,
  Furniture,
  Fence,
  Firewood,
  Sign,
  Miscellaneous,
};

inline constexpr int kNumRelevanceClasses = 13;
const char* relevance_class_name(int index);

struct SynthParams {
  int n_per_class = 100;
  int image_size = 96;
  double clutter_fraction = 0.2;
  int images_per_house = 2;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<ImageBuffer> images;
  std::vector<LabelImage> masks;
  // image_path = images/img_NNNN.png, mask_path = masks/img_NNNN.png (relative)
  std::vector<ManifestRecord> records;
};

// Six stripe-texture families, one per epoch, each with its own orientation,
// period and two-colour palette; images of the same house share jittered
// texture parameters. Clutter blobs of uniform noise ("cars" rectangles,
// greenish "trees" discs) cover roughly clutter_fraction of each image and are
// recorded in the mask. Records are unsplit and class-major.
SyntheticCorpus synth_corpus(const SynthParams& params);

}  // namespace bage
