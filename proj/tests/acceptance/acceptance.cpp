// End-to-end and property checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bage/classify.hpp"
#include "bage/config.hpp"
#include "bage/data.hpp"
#include "bage/descriptors.hpp"
#include "bage/eval.hpp"
#include "bage/fusion.hpp"
#include "bage/patches.hpp"
#include "bage/pipeline.hpp"
#include "bage/selection.hpp"
#include "../support/oracles.hpp"

using namespace bage;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] AC%d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct BenchmarkRun {
  double image_accuracy = 0.0;
  double patch_accuracy = 0.0;
  std::vector<double> member_accuracy;
  std::vector<std::string> model_bytes;
  std::string predictions;
  std::size_t train_patches = 0;
  std::size_t building_patches = 0;
  std::size_t test_images = 0;
  double seconds = 0.0;
};

BenchmarkRun run_benchmark(int threads) {
  const auto start = std::chrono::steady_clock::now();
  PipelineConfig config;
  config.seed = 42;
  config.threads = threads;
  config.synth.n_per_class = 100;
  config.synth.image_size = 96;
  config.synth.clutter_fraction = 0.2;
  config.split = {0.7, 0.1, 0.2};
  config.selection.strategy = SelectionStrategy::HighContrastClusters;
  config.selection.k = 50;
  config.selection.t_percent = 21;
  config.fusion = {Aggregation::MajorityVote, 0.25, true};
  config.resolve_seeds();
  config.validate();

  const auto corpus = synth_corpus(config.synth);
  const auto records = split_by_house(corpus.records, config.split, config.seed);
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.image_path);
  const auto selections = select_corpus_patches(corpus.images, ids, config);

  TrainingPatches relevance_data, epoch_data;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split != Split::Train) continue;
    for (const auto& s : selections[i]) {
      auto pixels = extract(corpus.images[i], s.geometry).pixels;
      relevance_data.pixels.push_back(pixels);
      relevance_data.labels.push_back(relevance_label(corpus.masks[i], s.geometry));
      epoch_data.pixels.push_back(std::move(pixels));
      epoch_data.labels.push_back(epoch_of_year(records[i].yoc).index);
    }
  }

  BenchmarkRun run;
  run.train_patches = epoch_data.pixels.size();
  const auto relevance = train_relevance_model(relevance_data, config).model;
  const auto building = keep_building_patches(epoch_data, relevance, config);
  run.building_patches = building.pixels.size();
  const auto members = train_epoch_models(building, config);

  std::vector<ClassifierModel> models;
  run.model_bytes.push_back(serialize_model(relevance));
  for (const auto& m : members) {
    models.push_back(m.model);
    run.model_bytes.push_back(serialize_model(m.model));
  }
  const EnsembleClassifier ensemble(models, config.sift);
  std::vector<EnsembleClassifier> singles;
  for (const auto& m : models) singles.emplace_back(std::vector<ClassifierModel>{m}, config.sift);

  std::vector<int> truths, predicted;
  std::vector<std::vector<int>> member_predicted(models.size());
  long patch_hits = 0, patch_total = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split != Split::Test) continue;
    const int truth = epoch_of_year(records[i].yoc).index;
    const auto p = predict_selected(corpus.images[i], ids[i], selections[i], &relevance, ensemble, config);
    truths.push_back(truth);
    predicted.push_back(p.building.epoch);
    run.predictions += prediction_json_line(p) + '\n';
    for (const auto& pp : p.patches) {
      patch_hits += static_cast<long>(argmax(pp.distribution)) == truth;
      ++patch_total;
    }
    for (std::size_t m = 0; m < singles.size(); ++m)
      member_predicted[m].push_back(
          predict_selected(corpus.images[i], ids[i], selections[i], &relevance, singles[m], config).building.epoch);
  }
  run.test_images = truths.size();
  run.image_accuracy = accuracy(predicted, truths);
  run.patch_accuracy = patch_total ? static_cast<double>(patch_hits) / static_cast<double>(patch_total) : 0.0;
  for (const auto& mp : member_predicted) run.member_accuracy.push_back(accuracy(mp, truths));
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

void check_gradients() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Architecture arch : {Architecture::LinearSoftmax, Architecture::Mlp1Hidden}) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int dim = std::uniform_int_distribution<int>(1, 8)(rng);
      const int hidden = std::uniform_int_distribution<int>(1, 5)(rng);
      const int classes = std::uniform_int_distribution<int>(2, 5)(rng);
      const int rows = std::uniform_int_distribution<int>(1, 6)(rng);
      auto model = init_model({arch, hidden}, dim, classes, rng());
      // Glorot-scale weights with jittered biases; unit-variance weights saturate
      // the softmax and leave components below the finite-difference noise floor
      for (double& w : model.params) w += 0.1 * normal(rng);
      Matrix x(static_cast<std::size_t>(rows), static_cast<std::size_t>(dim));
      for (double& v : x.data) v = normal(rng);
      std::vector<int> y(static_cast<std::size_t>(rows));
      for (int& v : y) v = std::uniform_int_distribution<int>(0, classes - 1)(rng);
      const auto analytic = loss_and_gradient(model, x, y).gradient;
      const auto numeric = oracle::finite_difference_gradient(model, x, y, 1e-5);
      worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
    }
    report(4, worst < 1e-4, std::string("gradient check ") + to_string(arch),
           "max relative error " + sci(worst) + " over 100 instances");
  }
}

void check_kmeans() {
  std::mt19937_64 rng(5);
  bool optimal = true, monotone = true;
  int instances = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const int dim = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(dim)));
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < dim; ++j) centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = 100.0 * c + (j == 0 ? 0 : 37.0 * c);
    const int n = std::uniform_int_distribution<int>(k, 8)(rng);
    Matrix pts(0, static_cast<std::size_t>(dim));
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      // every cluster gets at least one point
      const int c = i < k ? i : std::uniform_int_distribution<int>(0, k - 1)(rng);
      std::vector<double> p(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) p[static_cast<std::size_t>(j)] = centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] + jitter(rng);
      pts.push_row(p);
    }
    const auto result = kmeans(pts, k, rng());
    const double best = oracle::kmeans_optimum(pts, k);
    if (std::abs(result.cost - best) > 1e-9 * std::max(1.0, best)) optimal = false;
    for (std::size_t i = 1; i < result.cost_per_iteration.size(); ++i)
      if (result.cost_per_iteration[i] > result.cost_per_iteration[i - 1]) monotone = false;
    ++instances;
  }
  // degenerate inputs: duplicates, identical points, k equal to n
  const std::vector<Matrix> degenerate = [] {
    std::vector<Matrix> v;
    Matrix same(0, 2);
    for (int i = 0; i < 6; ++i) same.push_row(std::vector<double>{3.0, 3.0});
    v.push_back(same);
    Matrix dup(0, 1);
    for (double x : {0.0, 0.0, 0.0, 5.0, 5.0, 9.0}) dup.push_row(std::vector<double>{x});
    v.push_back(dup);
    Matrix pair(0, 2);
    pair.push_row(std::vector<double>{0.0, 0.0});
    pair.push_row(std::vector<double>{1.0, 1.0});
    v.push_back(pair);
    return v;
  }();
  for (const auto& m : degenerate)
    for (int k = 1; k <= 3; ++k) {
      const auto result = kmeans(m, k, 99);
      for (std::size_t i = 1; i < result.cost_per_iteration.size(); ++i)
        if (result.cost_per_iteration[i] > result.cost_per_iteration[i - 1]) monotone = false;
    }
  report(5, optimal && monotone, "k-means exact on small instances",
         std::to_string(instances) + " instances, optimal=" + (optimal ? "yes" : "no") +
             ", monotone cost=" + (monotone ? "yes" : "no"));
}

std::vector<std::vector<double>> eighths_set(std::mt19937_64& rng, int n, int classes) {
  std::vector<std::vector<double>> dists;
  for (int i = 0; i < n; ++i) {
    std::vector<int> units(static_cast<std::size_t>(classes), 0);
    for (int u = 0; u < 8; ++u) ++units[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, classes - 1)(rng))];
    std::vector<double> d;
    for (int u : units) d.push_back(u / 8.0);
    dists.push_back(d);
  }
  return dists;
}

std::vector<std::vector<double>> forced_tie_set(std::mt19937_64& rng, int classes) {
  // equal votes for two classes; with probability 1/2 also equal mass
  const int a = std::uniform_int_distribution<int>(0, classes - 1)(rng);
  int b = std::uniform_int_distribution<int>(0, classes - 2)(rng);
  if (b >= a) ++b;
  int other = 0;
  while (other == a || other == b) ++other;
  const int votes = std::uniform_int_distribution<int>(1, 3)(rng);
  const bool equal_mass = rng() % 2 == 0;
  std::vector<std::vector<double>> dists;
  for (int v = 0; v < votes; ++v)
    for (int cls : {a, b}) {
      std::vector<double> d(static_cast<std::size_t>(classes), 0.0);
      const double top = equal_mass || cls == a ? 0.75 : 0.625;
      d[static_cast<std::size_t>(cls)] = top;
      d[static_cast<std::size_t>(other)] = 1.0 - top;
      dists.push_back(d);
    }
  std::shuffle(dists.begin(), dists.end(), rng);
  return dists;
}

void check_votes() {
  std::mt19937_64 rng(6);
  int mismatches = 0, ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = std::uniform_int_distribution<int>(3, 6)(rng);
    const auto dists = trial % 4 == 0 ? forced_tie_set(rng, classes)
                                      : eighths_set(rng, std::uniform_int_distribution<int>(1, 12)(rng), classes);
    FusionConfig cfg{Aggregation::MajorityVote, 0.25, true};
    const auto got = majority_vote(dists, cfg);
    const auto want = oracle::reference_fusion(dists, 0.25);
    if (got.epoch != want.epoch || got.n_patches_used != want.used) ++mismatches;
    if (trial % 4 == 0) ++ties;
  }
  report(6, mismatches == 0, "majority vote matches recount",
         "1000 sets (" + std::to_string(ties) + " with forced ties), " + std::to_string(mismatches) + " mismatches");
}

void check_grid() {
  std::mt19937_64 rng(7);
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int w = std::uniform_int_distribution<int>(1, 200)(rng);
    const int h = std::uniform_int_distribution<int>(1, 200)(rng);
    const int side = std::uniform_int_distribution<int>(1, 64)(rng);
    const double overlap = std::uniform_int_distribution<int>(0, 19)(rng) / 20.0;
    const std::vector<int> sides{side};
    const auto grid = sample_grid(w, h, sides, overlap);
    const int stride = std::max(1, static_cast<int>(std::lround(side * (1.0 - overlap))));
    const long want = oracle::grid_axis_count(w, side, stride) * oracle::grid_axis_count(h, side, stride);
    bool inside = true;
    for (const auto& g : grid) inside = inside && g.x >= 0 && g.y >= 0 && g.x + g.side <= w && g.y + g.side <= h;
    if (static_cast<long>(grid.size()) != want || !inside) ++bad;
  }
  const std::vector<int> sides{16, 24, 32, 40};
  const auto grid = sample_grid(64, 64, sides, 0.5);
  report(7, bad == 0 && grid.size() == 78, "grid sampling counts",
         std::to_string(500 - bad) + "/500 random triples match; 64x64 gives " + std::to_string(grid.size()));
}

void check_ambiguity_monotone() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0, dropped_at_zero = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    std::vector<std::vector<double>> dists;
    for (int i = 0; i < n; ++i) {
      std::vector<double> d(6);
      const double sharp = std::uniform_real_distribution<double>(0.5, 8.0)(rng);
      double sum = 0.0;
      for (double& v : d) sum += v = std::pow(u(rng), sharp);
      for (double& v : d) v /= sum;
      dists.push_back(d);
    }
    std::size_t previous = n + 1;
    for (int step = 0; step <= 20; ++step) {
      FusionConfig cfg{Aggregation::MajorityVote, step * 0.05, true};
      const auto p = aggregate(dists, cfg);
      if (step == 0 && p.n_patches_used != static_cast<std::size_t>(n)) ++dropped_at_zero;
      if (p.n_patches_used > previous) ++violations;
      previous = p.n_patches_used;
    }
  }
  report(9, violations == 0 && dropped_at_zero == 0, "ambiguity filter monotone in t_u",
         "200 sets, " + std::to_string(violations) + " increases, " + std::to_string(dropped_at_zero) +
             " sets losing patches at t_u=0");
}

void check_contrast() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_linear = 0.0, worst_norm = 0.0, worst_constant = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int side = std::uniform_int_distribution<int>(4, 40)(rng);
    GrayImage patch(side, side);
    for (double& v : patch.data) v = u(rng);
    const double base = contrast_score(sift_descriptor(patch));
    for (double alpha : {0.5, 2.0}) {
      GrayImage scaled = patch;
      for (double& v : scaled.data) v *= alpha;
      const double got = contrast_score(sift_descriptor(scaled));
      worst_linear = std::max(worst_linear, std::abs(got - alpha * base) / (alpha * base));
    }
    const auto normalized = normalize_descriptor(sift_descriptor(patch));
    worst_norm = std::max(worst_norm, std::abs(l2_norm(normalized.values) - 1.0));
    GrayImage flat(side, side);
    std::fill(flat.data.begin(), flat.data.end(), u(rng));
    worst_constant = std::max(worst_constant, contrast_score(sift_descriptor(flat)));
  }
  report(10, worst_linear < 1e-5 && worst_norm < 1e-6 && worst_constant == 0.0, "contrast score properties",
         "linearity rel err " + sci(worst_linear) + ", unit norm err " + sci(worst_norm) +
             ", constant-patch score " + sci(worst_constant));
}

}  // namespace

int main() {
  try {
    check_gradients();
    check_kmeans();
    check_votes();
    check_grid();
    check_ambiguity_monotone();
    check_contrast();

    const auto first = run_benchmark(1);
    std::printf("benchmark: %zu test images, %zu train patches (%zu kept as building), %.1f s\n", first.test_images,
                first.train_patches, first.building_patches, first.seconds);
    report(1, first.image_accuracy >= 0.90 && first.seconds < 600.0, "synthetic benchmark accuracy",
           "image accuracy " + fmt(first.image_accuracy) + " (>= 0.90), runtime " + fmt(first.seconds, 1) + " s");
    const bool strict = first.patch_accuracy < 0.95;
    report(2,
           strict ? first.image_accuracy > first.patch_accuracy : first.image_accuracy >= first.patch_accuracy,
           "aggregation beats single patches",
           "image " + fmt(first.image_accuracy) + " vs patch " + fmt(first.patch_accuracy) +
               (strict ? " (strict)" : ""));
    const double best_member = *std::max_element(first.member_accuracy.begin(), first.member_accuracy.end());
    std::string members;
    for (double a : first.member_accuracy) members += (members.empty() ? "" : ", ") + fmt(a);
    report(3, first.image_accuracy >= best_member - 0.02, "ensemble not worse than members",
           "ensemble " + fmt(first.image_accuracy) + ", members [" + members + "]");

    const auto second = run_benchmark(2);
    const bool same = first.model_bytes == second.model_bytes && first.predictions == second.predictions;
    report(8, same, "pipeline determinism",
           std::string("second run (2 threads) ") + (same ? "bit-identical" : "differs") + " in models and predictions");
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
