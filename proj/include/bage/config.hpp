#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "bage/classify.hpp"
#include "bage/data.hpp"
#include "bage/fusion.hpp"
#include "bage/imaging.hpp"
#include "bage/selection.hpp"

namespace bage {

struct PatchingConfig {
  std::vector<int> sides = kDefaultPatchSides;
  double overlap = kDefaultOverlap;

  void validate() const;
};

// Every stage's settings in one document. Sub-seeds are derived from `seed`
// by resolve_seeds(), so overriding the master seed re-seeds the whole run.
struct PipelineConfig {
  std::uint64_t seed = 42;
  int threads = 1;
  SynthParams synth;
  SplitRatios split;
  PatchingConfig patches;
  SiftParams sift;
  SelectionConfig selection;
  bool use_relevance_filter = true;
  ModelSpec relevance_model{Architecture::LinearSoftmax, 64};
  TrainConfig relevance_training;
  std::vector<ModelSpec> epoch_models{{Architecture::LinearSoftmax, 64}, {Architecture::Mlp1Hidden, 64}};
  TrainConfig epoch_training;
  AugmentRanges augment;
  FusionConfig fusion;

  PipelineConfig();

  void resolve_seeds();
  // seed for the i-th epoch model
  std::uint64_t epoch_model_seed(std::size_t i) const;
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected. Throws Config.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace bage
