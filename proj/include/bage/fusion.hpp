#pragma once

#include <vector>

#include "bage/common.hpp"

namespace bage {

enum class Aggregation { MajorityVote, MeanLikelihood };

const char* to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view text);

struct FusionConfig {
  Aggregation aggregation = Aggregation::MajorityVote;
  double t_u = 0.25;
  bool drop_ambiguous = true;

  void validate() const;
};

struct BuildingPrediction {
  int epoch = 0;
  // mean over the patches used; over all patches on the fallback path, where
  // n_patches_used is 0
  std::vector<double> distribution;
  std::size_t n_patches_total = 0;
  std::size_t n_patches_used = 0;
  // set when every patch was ambiguous (or, in the pipeline, none passed the
  // relevance filter) and the fallback path was taken
  bool low_confidence = false;
};

// Margin between the two most likely classes is below t_u.
bool is_ambiguous(std::span<const double> distribution, double t_u);

// Per-patch arg-max votes; ties between classes go to the larger summed
// likelihood, then to the lower class index. With drop_ambiguous, ambiguous
// patches are removed first; if none survive, the mean likelihood over all
// patches decides and the result is flagged low_confidence.
BuildingPrediction majority_vote(const std::vector<std::vector<double>>& distributions, const FusionConfig& config);

// Arg-max of the mean distribution (ties -> lower class index).
BuildingPrediction mean_likelihood(const std::vector<std::vector<double>>& distributions, const FusionConfig& config);

BuildingPrediction aggregate(const std::vector<std::vector<double>>& distributions, const FusionConfig& config);

}  // namespace bage
