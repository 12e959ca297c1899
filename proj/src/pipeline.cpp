#include "bage/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "bage/io.hpp"

namespace bage {

CandidateSet compute_candidates(const ImageBuffer& image, const PatchingConfig& patches, const SiftParams& sift) {
  CandidateSet set;
  set.geometries = sample_grid(image.width, image.height, patches.sides, patches.overlap);
  set.normalized = Matrix(0, static_cast<std::size_t>(sift.dim()));
  set.normalized.data.reserve(set.geometries.size() * set.normalized.cols);
  set.contrast.reserve(set.geometries.size());
  const GrayImage gray = to_grayscale(image);
  for (const auto& g : set.geometries) {
    GrayImage sub(g.side, g.side);
    for (int y = 0; y < g.side; ++y)
      for (int x = 0; x < g.side; ++x) sub.at(x, y) = gray.at(g.x + x, g.y + y);
    const auto raw = sift_descriptor(sub, sift);
    set.contrast.push_back(contrast_score(raw));
    set.normalized.push_row(normalize_descriptor(raw, sift.clip).values);
  }
  return set;
}

namespace {

SelectionConfig image_selection(const PipelineConfig& config, std::string_view image_id) {
  SelectionConfig s = config.selection;
  s.seed = mix_seed(config.selection.seed, fnv1a(image_id));
  return s;
}

std::vector<SelectedPatch> to_selected(const CandidateSet& c, const std::vector<SelectedCandidate>& picks) {
  std::vector<SelectedPatch> out;
  out.reserve(picks.size());
  for (const auto& p : picks) out.push_back({c.geometries[p.index], c.contrast[p.index], p.cluster});
  return out;
}

}  // namespace

std::vector<SelectedPatch> select_image_patches(const ImageBuffer& image, std::string_view image_id,
                                                const PipelineConfig& config) {
  const auto c = compute_candidates(image, config.patches, config.sift);
  if (c.geometries.empty()) fail(ErrorKind::NoPatches, "image " + std::string(image_id) + " is smaller than every patch side");
  return to_selected(c, select_patches(c.normalized, c.contrast, image_selection(config, image_id)));
}

std::vector<std::vector<SelectedPatch>> select_corpus_patches(std::span<const ImageBuffer> images,
                                                              std::span<const std::string> image_ids,
                                                              const PipelineConfig& config) {
  if (images.size() != image_ids.size()) fail(ErrorKind::LengthMismatch, "one id per image required");
  std::vector<std::vector<SelectedPatch>> out(images.size());
  const bool global =
      config.selection.corpus_global && config.selection.strategy == SelectionStrategy::HighContrast;
  if (!global) {
    parallel_for(images.size(), config.threads,
                 [&](std::size_t i) { out[i] = select_image_patches(images[i], image_ids[i], config); });
    return out;
  }

  std::vector<CandidateSet> sets(images.size());
  parallel_for(images.size(), config.threads,
               [&](std::size_t i) { sets[i] = compute_candidates(images[i], config.patches, config.sift); });
  std::vector<double> scores;
  std::vector<std::pair<std::size_t, std::size_t>> origin;
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = 0; j < sets[i].contrast.size(); ++j) {
      scores.push_back(sets[i].contrast[j]);
      origin.emplace_back(i, j);
    }
  for (std::size_t k : select_top_contrast(scores, config.selection.t_percent)) {
    const auto [i, j] = origin[k];
    out[i].push_back({sets[i].geometries[j], sets[i].contrast[j], -1});
  }
  return out;
}

int relevance_label(const LabelImage& mask, const PatchGeometry& g) {
  if (g.x < 0 || g.y < 0 || g.x + g.side > mask.width || g.y + g.side > mask.height)
    fail(ErrorKind::OutOfBounds, "patch outside label map");
  std::array<long, 256> counts{};
  for (int y = g.y; y < g.y + g.side; ++y)
    for (int x = g.x; x < g.x + g.side; ++x) ++counts[mask.at(x, y)];
  int best = 0;
  for (int k = 1; k < 256; ++k)
    if (counts[k] > counts[best]) best = k;
  if (best >= kNumRelevanceClasses) fail(ErrorKind::OutOfRange, "label map value outside the relevance classes");
  return best;
}

TrainResult train_relevance_model(const TrainingPatches& data, const PipelineConfig& config) {
  return train_on_patches(data.pixels, data.labels, kNumRelevanceClasses, config.relevance_model,
                          config.relevance_training, config.threads, config.sift, config.augment);
}

TrainingPatches keep_building_patches(const TrainingPatches& data, const ClassifierModel& relevance,
                                      const PipelineConfig& config) {
  Matrix features(data.pixels.size(), kFeatureDim);
  parallel_for(data.pixels.size(), config.threads, [&](std::size_t i) {
    const auto f = featurize(data.pixels[i], config.sift);
    std::copy(f.begin(), f.end(), features.row(i).begin());
  });
  TrainingPatches kept;
  for (std::size_t i : relevance_filter(relevance, features)) {
    kept.pixels.push_back(data.pixels[i]);
    kept.labels.push_back(data.labels[i]);
  }
  return kept;
}

std::vector<TrainResult> train_epoch_models(const TrainingPatches& data, const PipelineConfig& config) {
  std::vector<TrainResult> out;
  for (std::size_t i = 0; i < config.epoch_models.size(); ++i) {
    TrainConfig tc = config.epoch_training;
    tc.seed = config.epoch_model_seed(i);
    out.push_back(train_on_patches(data.pixels, data.labels, kNumEpochs, config.epoch_models[i], tc, config.threads,
                                   config.sift, config.augment));
  }
  return out;
}

ImagePrediction predict_selected(const ImageBuffer& image, std::string_view image_id,
                                 std::span<const SelectedPatch> selection, const ClassifierModel* relevance_model,
                                 const PatchClassifier& classifier, const PipelineConfig& config) {
  if (selection.empty()) fail(ErrorKind::NoPatches, "no patches selected for " + std::string(image_id));
  ImagePrediction result;
  result.image_id = image_id;

  std::vector<Patch> patches;
  patches.reserve(selection.size());
  for (const auto& s : selection) patches.push_back(extract(image, s.geometry, std::string(image_id)));

  const auto* ensemble = dynamic_cast<const EnsembleClassifier*>(&classifier);
  const bool filter = relevance_model != nullptr && config.use_relevance_filter;
  Matrix features;
  if (filter || ensemble) {
    features = Matrix(0, kFeatureDim);
    for (const auto& p : patches) features.push_row(featurize(p.pixels, config.sift));
  }

  std::vector<std::size_t> keep(patches.size());
  std::iota(keep.begin(), keep.end(), 0);
  if (filter) {
    auto building = relevance_filter(*relevance_model, features);
    if (building.empty())
      result.relevance_fallback = true;
    else
      keep = std::move(building);
  }

  for (std::size_t i : keep) {
    PatchPrediction pp{patches[i].geometry, ensemble ? ensemble->classify_features(features.row(i))
                                                     : classifier.classify(image_id, patches[i].geometry,
                                                                           patches[i].pixels)};
    result.patches.push_back(std::move(pp));
  }
  std::sort(result.patches.begin(), result.patches.end(),
            [](const PatchPrediction& a, const PatchPrediction& b) { return geometry_less(a.geometry, b.geometry); });

  std::vector<std::vector<double>> dists;
  dists.reserve(result.patches.size());
  for (const auto& p : result.patches) dists.push_back(p.distribution);
  result.building = aggregate(dists, config.fusion);
  result.building.low_confidence = result.building.low_confidence || result.relevance_fallback;
  return result;
}

ImagePrediction predict_building(const ImageBuffer& image, std::string_view image_id,
                                 const ClassifierModel* relevance_model, const PatchClassifier& classifier,
                                 const PipelineConfig& config) {
  const auto selection = select_image_patches(image, image_id, config);
  return predict_selected(image, image_id, selection, relevance_model, classifier, config);
}

std::string prediction_json_line(const ImagePrediction& p) {
  const auto& b = p.building;
  std::string label = b.epoch >= 0 && b.epoch < kNumEpochs ? EpochLabel{b.epoch}.name() : std::to_string(b.epoch);
  nlohmann::json j{{"image_id", p.image_id},
                   {"epoch", b.epoch},
                   {"epoch_label", label},
                   {"distribution", b.distribution},
                   {"n_patches_total", b.n_patches_total},
                   {"n_patches_used", b.n_patches_used},
                   {"low_confidence", b.low_confidence}};
  return j.dump();
}

std::vector<PredictionLine> parse_prediction_lines(std::istream& in) {
  std::vector<PredictionLine> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PredictionLine p;
      p.image_id = j.at("image_id").get<std::string>();
      p.epoch = j.at("epoch").get<int>();
      if (j.contains("distribution")) p.distribution = j["distribution"].get<std::vector<double>>();
      if (j.contains("n_patches_total")) p.n_patches_total = j["n_patches_total"].get<std::size_t>();
      if (j.contains("n_patches_used")) p.n_patches_used = j["n_patches_used"].get<std::size_t>();
      if (j.contains("low_confidence")) p.low_confidence = j["low_confidence"].get<bool>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, e.what(), line_no);
    }
  }
  return out;
}

std::string patch_predictions_header(int n_classes) {
  std::string h = "image_id,x,y,side";
  for (int k = 0; k < n_classes; ++k) h += ",p_" + std::to_string(k);
  return h + '\n';
}

std::string patch_prediction_rows(const ImagePrediction& p) {
  std::string out;
  for (const auto& pp : p.patches) {
    out += p.image_id + ',' + std::to_string(pp.geometry.x) + ',' + std::to_string(pp.geometry.y) + ',' +
           std::to_string(pp.geometry.side);
    for (double v : pp.distribution) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

std::string selected_patches_header() { return "image_id,x,y,side,contrast_score,cluster_id\n"; }

std::string selected_patch_row(std::string_view image_id, const SelectedPatch& s) {
  return std::string(image_id) + ',' + std::to_string(s.geometry.x) + ',' + std::to_string(s.geometry.y) + ',' +
         std::to_string(s.geometry.side) + ',' + format_double(s.contrast) + ',' + std::to_string(s.cluster) + '\n';
}

}  // namespace bage
