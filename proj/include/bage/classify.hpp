#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "bage/descriptors.hpp"
#include "bage/imaging.hpp"
#include "bage/patches.hpp"

namespace bage {

inline constexpr int kFeaturePatchSide = 64;
inline constexpr int kColorBins = 16;
inline constexpr int kFeatureDim = kSiftDim + 3 * kColorBins;  // 176

// Rescale to 64x64, then [normalized SIFT of the luma | 16-bin R, G, B histograms
// (each L1-normalised)].
std::vector<double> featurize(const ImageBuffer& patch, const SiftParams& sift = {});

// Max-subtracted exponential normalisation.
std::vector<double> softmax(std::span<const double> logits);

enum class Architecture : std::uint32_t { LinearSoftmax = 0, Mlp1Hidden = 1 };

const char* to_string(Architecture a);
Architecture parse_architecture(std::string_view text);

struct ModelSpec {
  Architecture architecture = Architecture::LinearSoftmax;
  int hidden_units = 64;  // mlp only
};

enum class LossReduction : std::uint8_t { Sum = 0, Mean = 1 };

struct TrainConfig {
  double learning_rate = 0.0001;
  double weight_decay = 0.0005;
  double momentum = 0.9;
  int batch_size = 256;
  int epochs = 20;
  bool augment = false;
  // Sum: the minibatch gradient is the sum of per-sample gradients
  LossReduction reduction = LossReduction::Sum;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Parameters live in one flat vector:
//   linear: W [classes x dim] | b [classes]
//   mlp:    W1 [hidden x dim] | b1 [hidden] | W2 [classes x hidden] | b2 [classes]
struct ClassifierModel {
  Architecture architecture = Architecture::LinearSoftmax;
  int feature_dim = 0;
  int n_classes = 0;
  int hidden_units = 0;
  std::uint64_t rng_seed = 0;
  TrainConfig train_config;
  std::vector<double> params;

  std::size_t expected_param_count() const;
  // true for parameters subject to weight decay (weights, not biases)
  std::vector<bool> decay_mask() const;
  std::vector<double> logits(std::span<const double> features) const;
  void validate() const;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases, rounded to
// float precision so the model survives a save/load cycle bit-exactly.
ClassifierModel init_model(const ModelSpec& spec, int feature_dim, int n_classes, std::uint64_t seed);

// Summed cross-entropy over the given rows and its gradient w.r.t. model.params.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossGradient loss_and_gradient(const ClassifierModel& model, const Matrix& features, std::span<const int> labels,
                               std::span<const std::size_t> rows = {});

struct TrainResult {
  ClassifierModel model;
  std::vector<double> epoch_loss;  // mean per-sample cross-entropy observed during each epoch
};

// Minibatch SGD with classical momentum:
//   v <- momentum * v - lr * (grad + decay * w)   (no decay on biases)
//   w <- w + v
// Samples are reshuffled every epoch with the config seed. Final parameters are
// rounded to float precision.
TrainResult train(const Matrix& features, std::span<const int> labels, int n_classes, const ModelSpec& spec,
                  const TrainConfig& config);

// As above but on raw patches: with config.augment every presentation of a
// patch draws fresh augmentation parameters before featurisation. Featurisation
// may run on `threads` workers without affecting the result.
TrainResult train_on_patches(std::span<const ImageBuffer> patches, std::span<const int> labels, int n_classes,
                             const ModelSpec& spec, const TrainConfig& config, int threads = 1,
                             const SiftParams& sift = {}, const AugmentRanges& ranges = {});

std::vector<double> predict(const ClassifierModel& model, std::span<const double> features);

// Arithmetic mean of member distributions. Throws Mismatch on differing class counts.
std::vector<double> ensemble_predict(std::span<const ClassifierModel> models, std::span<const double> features);

// Indices (in input order) whose arg-max class is building (index 0).
// Throws WrongClassCount unless the model has 13 classes.
std::vector<std::size_t> relevance_filter(const ClassifierModel& model, const Matrix& features);

// Model container: "EPSC" | u32 version | u32 architecture | u32 feature_dim |
// u32 n_classes | u32 hidden_units | u64 rng_seed | f64 lr | f64 decay |
// f64 momentum | u32 batch | u32 epochs | u8 augment | u8 reduction | u64 seed |
// u64 n_params | n_params x f32, all little-endian.
inline constexpr std::uint32_t kModelFormatVersion = 1;
std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::string_view bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

// Source of per-patch class distributions for the prediction pipeline.
class PatchClassifier {
 public:
  virtual ~PatchClassifier() = default;
  virtual int n_classes() const = 0;
  virtual std::vector<double> classify(std::string_view image_id, const PatchGeometry& geometry,
                                       const ImageBuffer& pixels) const = 0;
};

class EnsembleClassifier final : public PatchClassifier {
 public:
  explicit EnsembleClassifier(std::vector<ClassifierModel> models, SiftParams sift = {});
  int n_classes() const override;
  std::vector<double> classify(std::string_view image_id, const PatchGeometry& geometry,
                               const ImageBuffer& pixels) const override;
  std::vector<double> classify_features(std::span<const double> features) const;
  const std::vector<ClassifierModel>& models() const { return models_; }
  const SiftParams& sift() const { return sift_; }

 private:
  std::vector<ClassifierModel> models_;
  SiftParams sift_;
};

// Distributions computed elsewhere (e.g. by a CNN), read from CSV rows
// `image_id,x,y,side,p_0,...,p_{n-1}` with a header line.
class ExternalLikelihoods final : public PatchClassifier {
 public:
  static ExternalLikelihoods parse(std::istream& in);
  static ExternalLikelihoods load(const std::filesystem::path& path);

  int n_classes() const override { return n_classes_; }
  std::vector<double> classify(std::string_view image_id, const PatchGeometry& geometry,
                               const ImageBuffer& pixels) const override;
  bool contains(std::string_view image_id, const PatchGeometry& geometry) const;
  std::size_t size() const { return table_.size(); }

 private:
  using Key = std::tuple<std::string, int, int, int>;
  int n_classes_ = 0;
  std::map<Key, std::vector<double>, std::less<>> table_;
};

}  // namespace bage
