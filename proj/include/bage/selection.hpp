#pragma once

#include <vector>

#include "bage/descriptors.hpp"

namespace bage {

enum class SelectionStrategy { HighContrast, HighContrastClusters };

const char* to_string(SelectionStrategy s);
SelectionStrategy parse_selection_strategy(std::string_view text);

struct SelectionConfig {
  SelectionStrategy strategy = SelectionStrategy::HighContrastClusters;
  double t_percent = 21.0;
  int k = 50;
  std::uint64_t seed = 0;
  int max_iter = 100;
  // high_contrast only: rank all candidates of a corpus together instead of per image
  bool corpus_global = false;

  void validate() const;
};

struct ClusteringResult {
  Matrix centroids;                       // k x dim
  std::vector<int> assignments;           // per point, in [0, k)
  double cost = 0.0;                      // sum of squared distances to assigned centroids
  std::vector<double> cost_per_iteration; // cost after each assignment step
  int iterations = 0;
};

// Number of items kept from a pool of n at t percent: ceil(n * t / 100).
std::size_t top_count(std::size_t n, double t_percent);

// Indices of the top ceil(n*t/100) scores, highest first; equal scores keep input order.
std::vector<std::size_t> select_top_contrast(std::span<const double> scores, double t_percent);

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iter is reached. k is lowered to n when n < k. A cluster that
// loses all its points is re-seeded at the point farthest from its centroid.
// Nearest-centroid ties go to the lower centroid index.
ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 100);

struct Representative {
  std::size_t index;  // into the input pool
  int cluster;
};

// Per non-empty cluster the member closest to its centroid (ties -> lowest index).
std::vector<Representative> cluster_representatives(const Matrix& points, const ClusteringResult& clustering);

struct SelectedCandidate {
  std::size_t index;
  int cluster = -1;  // -1 for high_contrast selection
};

// Clusters the normalized descriptors of one image with config.k clusters, takes
// one representative per cluster and keeps the top t percent of those by contrast.
std::vector<SelectedCandidate> select_cluster_representatives(const Matrix& normalized_descriptors,
                                                              std::span<const double> contrast,
                                                              const SelectionConfig& config);

// Dispatches on config.strategy for a single image's candidate pool.
std::vector<SelectedCandidate> select_patches(const Matrix& normalized_descriptors, std::span<const double> contrast,
                                              const SelectionConfig& config);

}  // namespace bage
