#include "bage/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bage {

const char* to_string(SelectionStrategy s) {
  return s == SelectionStrategy::HighContrast ? "high_contrast" : "high_contrast_clusters";
}

SelectionStrategy parse_selection_strategy(std::string_view text) {
  if (text == "high_contrast") return SelectionStrategy::HighContrast;
  if (text == "high_contrast_clusters") return SelectionStrategy::HighContrastClusters;
  fail(ErrorKind::Config, "unknown selection strategy '" + std::string(text) + "'");
}

void SelectionConfig::validate() const {
  if (!(t_percent > 0.0 && t_percent <= 100.0)) fail(ErrorKind::Config, "t_percent must lie in (0, 100]");
  if (k < 1) fail(ErrorKind::Config, "k must be at least 1");
  if (max_iter < 1) fail(ErrorKind::Config, "max_iter must be at least 1");
}

std::size_t top_count(std::size_t n, double t_percent) {
  if (n == 0) return 0;
  // the epsilon absorbs representation error in products such as 50 * 14 / 100
  const double exact = static_cast<double>(n) * t_percent / 100.0;
  const auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::size_t>(count, 1, n);
}

std::vector<std::size_t> select_top_contrast(std::span<const double> scores, double t_percent) {
  if (scores.empty()) fail(ErrorKind::EmptyInput, "no candidate patches");
  if (!(t_percent > 0.0 && t_percent <= 100.0)) fail(ErrorKind::OutOfRange, "t_percent must lie in (0, 100]");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(top_count(scores.size(), t_percent));
  return order;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Returns the assignment cost and fills nearest-centroid indices and distances.
double assign(const Matrix& points, const Matrix& centroids, std::vector<int>& labels, std::vector<double>& dist) {
  double cost = 0.0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows; ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    dist[i] = best_d;
    cost += best_d;
  }
  return cost;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows;
  Matrix centroids(k, points.cols);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0;; ++c) {
    std::copy_n(points.row(chosen).begin(), points.cols, centroids.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (total <= 0.0) {
      chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      continue;
    }
    const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    // acc accumulates in the same order as total, so some index always exceeds r
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (r < acc) {
        chosen = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace

ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
  if (points.rows == 0) fail(ErrorKind::EmptyInput, "kmeans needs at least one point");
  if (k < 1) fail(ErrorKind::OutOfRange, "kmeans needs k >= 1");
  const std::size_t n = points.rows, dim = points.cols;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  Rng rng(seed);
  ClusteringResult result;
  result.centroids = seed_plus_plus(points, kk, rng);
  result.assignments.assign(n, 0);
  std::vector<int> previous;
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(kk);

  for (int iter = 0; iter < std::max(1, max_iter); ++iter) {
    result.cost = assign(points, result.centroids, result.assignments, dist);
    result.cost_per_iteration.push_back(result.cost);
    result.iterations = iter + 1;
    if (result.assignments == previous) break;
    previous = result.assignments;
    if (iter + 1 == max_iter) break;

    // update
    Matrix sums(kk, dim);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(result.assignments[i]);
      ++counts[c];
      auto acc = sums.row(c);
      auto p = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += p[j];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) continue;
      auto dst = result.centroids.row(c);
      auto acc = sums.row(c);
      for (std::size_t j = 0; j < dim; ++j) dst[j] = acc[j] / static_cast<double>(counts[c]);
    }

    // repair empty clusters with the points farthest from their (updated) centroids
    std::vector<bool> used(n, false);
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double d =
            squared_distance(points.row(i), result.centroids.row(static_cast<std::size_t>(result.assignments[i])));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;
      used[far] = true;
      std::copy_n(points.row(far).begin(), dim, result.centroids.row(c).begin());
    }
  }
  return result;
}

std::vector<Representative> cluster_representatives(const Matrix& points, const ClusteringResult& clustering) {
  const std::size_t k = clustering.centroids.rows;
  std::vector<std::size_t> best(k, points.rows);
  std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.rows; ++i) {
    const auto c = static_cast<std::size_t>(clustering.assignments[i]);
    const double d = squared_distance(points.row(i), clustering.centroids.row(c));
    if (d < best_d[c]) {
      best_d[c] = d;
      best[c] = i;
    }
  }
  std::vector<Representative> reps;
  for (std::size_t c = 0; c < k; ++c)
    if (best[c] < points.rows) reps.push_back({best[c], static_cast<int>(c)});
  return reps;
}

std::vector<SelectedCandidate> select_cluster_representatives(const Matrix& normalized_descriptors,
                                                              std::span<const double> contrast,
                                                              const SelectionConfig& config) {
  config.validate();
  if (normalized_descriptors.rows == 0) fail(ErrorKind::EmptyInput, "no candidate patches");
  if (contrast.size() != normalized_descriptors.rows)
    fail(ErrorKind::LengthMismatch, "one contrast score per descriptor required");
  const auto clustering = kmeans(normalized_descriptors, config.k, config.seed, config.max_iter);
  const auto reps = cluster_representatives(normalized_descriptors, clustering);
  std::vector<double> rep_scores;
  rep_scores.reserve(reps.size());
  for (const auto& r : reps) rep_scores.push_back(contrast[r.index]);
  std::vector<SelectedCandidate> out;
  for (std::size_t i : select_top_contrast(rep_scores, config.t_percent))
    out.push_back({reps[i].index, reps[i].cluster});
  return out;
}

std::vector<SelectedCandidate> select_patches(const Matrix& normalized_descriptors, std::span<const double> contrast,
                                              const SelectionConfig& config) {
  config.validate();
  if (config.strategy == SelectionStrategy::HighContrastClusters)
    return select_cluster_representatives(normalized_descriptors, contrast, config);
  std::vector<SelectedCandidate> out;
  for (std::size_t i : select_top_contrast(contrast, config.t_percent)) out.push_back({i, -1});
  return out;
}

}  // namespace bage
