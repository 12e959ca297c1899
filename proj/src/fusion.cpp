#include "bage/fusion.hpp"

#include <algorithm>

namespace bage {

const char* to_string(Aggregation a) {
  return a == Aggregation::MajorityVote ? "majority_vote" : "mean_likelihood";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "majority_vote") return Aggregation::MajorityVote;
  if (text == "mean_likelihood") return Aggregation::MeanLikelihood;
  fail(ErrorKind::Config, "unknown aggregation '" + std::string(text) + "'");
}

void FusionConfig::validate() const {
  if (!(t_u >= 0.0 && t_u <= 1.0)) fail(ErrorKind::Config, "t_u must lie in [0, 1]");
}

bool is_ambiguous(std::span<const double> d, double t_u) {
  if (d.size() < 2) return false;
  double first = d[0], second = d[1];
  if (second > first) std::swap(first, second);
  for (std::size_t i = 2; i < d.size(); ++i) {
    if (d[i] > first) {
      second = first;
      first = d[i];
    } else if (d[i] > second) {
      second = d[i];
    }
  }
  return first - second < t_u;
}

namespace {

using Distributions = std::vector<std::vector<double>>;

std::size_t check_input(const Distributions& dists) {
  if (dists.empty()) fail(ErrorKind::EmptyInput, "no patch distributions to aggregate");
  const std::size_t n = dists.front().size();
  if (n == 0) fail(ErrorKind::EmptyInput, "empty distribution");
  for (const auto& d : dists)
    if (d.size() != n) fail(ErrorKind::LengthMismatch, "distributions differ in class count");
  return n;
}

std::vector<const std::vector<double>*> survivors(const Distributions& dists, const FusionConfig& config) {
  std::vector<const std::vector<double>*> kept;
  for (const auto& d : dists)
    if (!config.drop_ambiguous || !is_ambiguous(d, config.t_u)) kept.push_back(&d);
  return kept;
}

std::vector<double> mean_of(const std::vector<const std::vector<double>*>& used, std::size_t n_classes) {
  std::vector<double> mean(n_classes, 0.0);
  for (const auto* d : used)
    for (std::size_t k = 0; k < n_classes; ++k) mean[k] += (*d)[k];
  for (double& v : mean) v /= static_cast<double>(used.size());
  return mean;
}

BuildingPrediction mean_prediction(const std::vector<const std::vector<double>*>& used, std::size_t n_classes,
                                   std::size_t total, bool low_confidence) {
  BuildingPrediction p;
  p.distribution = mean_of(used, n_classes);
  p.epoch = static_cast<int>(argmax(p.distribution));
  p.n_patches_total = total;
  p.n_patches_used = used.size();
  p.low_confidence = low_confidence;
  return p;
}

std::vector<const std::vector<double>*> all_of(const Distributions& dists) {
  std::vector<const std::vector<double>*> v;
  for (const auto& d : dists) v.push_back(&d);
  return v;
}

// No patch survived the ambiguity filter: average everything, report zero used.
BuildingPrediction fallback(const Distributions& dists, std::size_t n_classes) {
  BuildingPrediction p = mean_prediction(all_of(dists), n_classes, dists.size(), true);
  p.n_patches_used = 0;
  return p;
}

}  // namespace

BuildingPrediction mean_likelihood(const Distributions& dists, const FusionConfig& config) {
  config.validate();
  const std::size_t n_classes = check_input(dists);
  const auto used = survivors(dists, config);
  if (used.empty()) return fallback(dists, n_classes);
  return mean_prediction(used, n_classes, dists.size(), false);
}

BuildingPrediction majority_vote(const Distributions& dists, const FusionConfig& config) {
  config.validate();
  const std::size_t n_classes = check_input(dists);
  const auto used = survivors(dists, config);
  if (used.empty()) return fallback(dists, n_classes);

  std::vector<std::size_t> votes(n_classes, 0);
  std::vector<double> mass(n_classes, 0.0);
  for (const auto* d : used) {
    ++votes[argmax(*d)];
    for (std::size_t k = 0; k < n_classes; ++k) mass[k] += (*d)[k];
  }
  std::size_t winner = 0;
  for (std::size_t k = 1; k < n_classes; ++k) {
    if (votes[k] > votes[winner] || (votes[k] == votes[winner] && mass[k] > mass[winner])) winner = k;
  }

  BuildingPrediction p = mean_prediction(used, n_classes, dists.size(), false);
  p.epoch = static_cast<int>(winner);
  return p;
}

BuildingPrediction aggregate(const Distributions& dists, const FusionConfig& config) {
  return config.aggregation == Aggregation::MajorityVote ? majority_vote(dists, config)
                                                         : mean_likelihood(dists, config);
}

}  // namespace bage
