#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bage/classify.hpp"
#include "bage/config.hpp"
#include "bage/fusion.hpp"

namespace bage {

// Dense candidates of one image with their SIFT statistics.
struct CandidateSet {
  std::vector<PatchGeometry> geometries;
  Matrix normalized;              // rows x 128
  std::vector<double> contrast;   // raw-histogram norm per candidate
};

CandidateSet compute_candidates(const ImageBuffer& image, const PatchingConfig& patches, const SiftParams& sift);

struct SelectedPatch {
  PatchGeometry geometry;
  double contrast = 0.0;
  int cluster = -1;
};

// Per-image selection; the k-means seed mixes the selection seed with the image id.
std::vector<SelectedPatch> select_image_patches(const ImageBuffer& image, std::string_view image_id,
                                                const PipelineConfig& config);

// Selection for a list of images. Honours selection.corpus_global for the
// high_contrast strategy (one ranking over all candidates of all images).
std::vector<std::vector<SelectedPatch>> select_corpus_patches(std::span<const ImageBuffer> images,
                                                              std::span<const std::string> image_ids,
                                                              const PipelineConfig& config);

// Most frequent mask class inside the patch (ties -> lower class index).
int relevance_label(const LabelImage& mask, const PatchGeometry& geometry);

// Patch pixels with one class label each (relevance class or epoch index).
struct TrainingPatches {
  std::vector<ImageBuffer> pixels;
  std::vector<int> labels;
};

// 13-class relevance model with config.relevance_model / relevance_training.
TrainResult train_relevance_model(const TrainingPatches& data, const PipelineConfig& config);

// Keeps the patches the relevance model assigns to the building class.
TrainingPatches keep_building_patches(const TrainingPatches& data, const ClassifierModel& relevance,
                                      const PipelineConfig& config);

// One model per config.epoch_models entry, each with its own derived seed.
std::vector<TrainResult> train_epoch_models(const TrainingPatches& data, const PipelineConfig& config);

struct PatchPrediction {
  PatchGeometry geometry;
  std::vector<double> distribution;
};

struct ImagePrediction {
  std::string image_id;
  BuildingPrediction building;
  std::vector<PatchPrediction> patches;  // classified patches, canonical geometry order
  bool relevance_fallback = false;
};

// Grid sampling -> selection -> relevance filter -> per-patch distributions ->
// ambiguity filtering and aggregation. When the relevance filter rejects every
// patch, the unfiltered selection is used and the prediction is low_confidence.
// Throws NoPatches when the image is smaller than every patch side.
ImagePrediction predict_building(const ImageBuffer& image, std::string_view image_id,
                                 const ClassifierModel* relevance_model, const PatchClassifier& classifier,
                                 const PipelineConfig& config);

// Same, starting from an existing selection.
ImagePrediction predict_selected(const ImageBuffer& image, std::string_view image_id,
                                 std::span<const SelectedPatch> selection, const ClassifierModel* relevance_model,
                                 const PatchClassifier& classifier, const PipelineConfig& config);

// {image_id, epoch, epoch_label, distribution, n_patches_total, n_patches_used, low_confidence}
std::string prediction_json_line(const ImagePrediction& prediction);

struct PredictionLine {
  std::string image_id;
  int epoch = 0;
  std::vector<double> distribution;
  std::size_t n_patches_total = 0;
  std::size_t n_patches_used = 0;
  bool low_confidence = false;
};
std::vector<PredictionLine> parse_prediction_lines(std::istream& in);

// Header `image_id,x,y,side,p_0..p_{n-1}`; readable back through ExternalLikelihoods.
std::string patch_predictions_header(int n_classes);
std::string patch_prediction_rows(const ImagePrediction& prediction);

std::string selected_patches_header();
// image_id,x,y,side,contrast_score,cluster_id
std::string selected_patch_row(std::string_view image_id, const SelectedPatch& patch);

}  // namespace bage
