#include "bage/eval.hpp"

#include <algorithm>
#include <numeric>

namespace bage {

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) fail(ErrorKind::LengthMismatch, "predictions and truths differ in length");
  if (truths.empty()) fail(ErrorKind::EmptyInput, "nothing to evaluate");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) correct += predictions[i] == truths[i];
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

long ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

long ConfusionMatrix::trace() const {
  long t = 0;
  for (int i = 0; i < n_classes; ++i) t += at(i, i);
  return t;
}

std::vector<long> ConfusionMatrix::row_sums() const {
  std::vector<long> rows(static_cast<std::size_t>(n_classes), 0);
  for (int i = 0; i < n_classes; ++i)
    for (int j = 0; j < n_classes; ++j) rows[i] += at(i, j);
  return rows;
}

double ConfusionMatrix::above_diagonal_fraction() const {
  const long n = total();
  if (n == 0) return 0.0;
  long above = 0;
  for (int i = 0; i < n_classes; ++i)
    for (int j = i + 1; j < n_classes; ++j) above += at(i, j);
  return static_cast<double>(above) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_csv(const std::vector<std::string>& labels) const {
  auto name = [&](int i) { return i < static_cast<int>(labels.size()) ? labels[i] : std::to_string(i); };
  std::string out = "true\\predicted";
  for (int j = 0; j < n_classes; ++j) out += ',' + name(j);
  out += '\n';
  for (int i = 0; i < n_classes; ++i) {
    out += name(i);
    for (int j = 0; j < n_classes; ++j) out += ',' + std::to_string(at(i, j));
    out += '\n';
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths, int n_classes) {
  if (predictions.size() != truths.size()) fail(ErrorKind::LengthMismatch, "predictions and truths differ in length");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= n_classes || predictions[i] < 0 || predictions[i] >= n_classes)
      fail(ErrorKind::OutOfRange, "label outside [0, " + std::to_string(n_classes) + ")");
    ++cm.at(truths[i], predictions[i]);
  }
  return cm;
}

double zero_rule_baseline(std::span<const int> truths) {
  if (truths.empty()) fail(ErrorKind::EmptyInput, "nothing to evaluate");
  std::vector<int> sorted(truths.begin(), truths.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t best = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    best = std::max(best, j - i);
    i = j;
  }
  return static_cast<double>(best) / static_cast<double>(truths.size());
}

double prediction_margin(std::span<const double> d) {
  if (d.size() < 2) return d.empty() ? 0.0 : d[0];
  std::vector<double> sorted(d.begin(), d.end());
  std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end(), std::greater<>());
  return sorted[0] - sorted[1];
}

namespace {

RankedPatch rank_entry(const PatchRecord& r) {
  RankedPatch p;
  p.patch_id = r.patch_id;
  p.true_label = r.true_label;
  p.predicted = static_cast<int>(argmax(r.distribution));
  p.true_probability = r.true_label >= 0 && r.true_label < static_cast<int>(r.distribution.size())
                           ? r.distribution[static_cast<std::size_t>(r.true_label)]
                           : 0.0;
  p.margin = prediction_margin(r.distribution);
  return p;
}

}  // namespace

std::vector<RankedPatch> rank_confident_patches(std::span<const PatchRecord> records, std::size_t top_n) {
  std::vector<RankedPatch> out;
  for (const auto& r : records) {
    auto e = rank_entry(r);
    if (e.predicted == e.true_label) out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedPatch& a, const RankedPatch& b) { return a.true_probability > b.true_probability; });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

std::vector<RankedPatch> rank_uncertain_patches(std::span<const PatchRecord> records, std::size_t top_n) {
  std::vector<RankedPatch> out;
  for (const auto& r : records) out.push_back(rank_entry(r));
  std::stable_sort(out.begin(), out.end(), [](const RankedPatch& a, const RankedPatch& b) { return a.margin < b.margin; });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

}  // namespace bage
