#pragma once

#include <string>
#include <vector>

#include "bage/common.hpp"

namespace bage {

double accuracy(std::span<const int> predictions, std::span<const int> truths);
inline double top1_error(std::span<const int> predictions, std::span<const int> truths) {
  return 1.0 - accuracy(predictions, truths);
}

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<long> counts;

  explicit ConfusionMatrix(int classes = 6)
      : n_classes(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

  long& at(int truth, int predicted) { return counts[static_cast<std::size_t>(truth) * n_classes + predicted]; }
  long at(int truth, int predicted) const { return counts[static_cast<std::size_t>(truth) * n_classes + predicted]; }
  long total() const;
  long trace() const;
  std::vector<long> row_sums() const;
  // Fraction of samples predicted in a later class than their truth, i.e. the
  // building judged younger than it is (for epochs: age underestimated).
  double above_diagonal_fraction() const;

  std::string to_csv(const std::vector<std::string>& labels = {}) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths, int n_classes = 6);

// Accuracy of always answering the most frequent class.
double zero_rule_baseline(std::span<const int> truths);

struct PatchRecord {
  std::string patch_id;
  int true_label = 0;
  std::vector<double> distribution;
};

struct RankedPatch {
  std::string patch_id;
  int true_label = 0;
  int predicted = 0;
  double true_probability = 0.0;
  double margin = 0.0;  // top-1 minus top-2 likelihood
};

// Correctly classified patches, highest likelihood of the true class first (at most top_n).
std::vector<RankedPatch> rank_confident_patches(std::span<const PatchRecord> records, std::size_t top_n);

// All patches, smallest top-1/top-2 margin first (at most top_n).
std::vector<RankedPatch> rank_uncertain_patches(std::span<const PatchRecord> records, std::size_t top_n);

double prediction_margin(std::span<const double> distribution);

}  // namespace bage
