// bage: command-line driver for the building-age pipeline.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 I/O error, 3 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bage/classify.hpp"
#include "bage/config.hpp"
#include "bage/data.hpp"
#include "bage/detail/parallel.hpp"
#include "bage/eval.hpp"
#include "bage/io.hpp"
#include "bage/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bage;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string manifest;
  std::vector<std::string> models;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Pipeline config (JSON)");
  cmd->add_option("--seed", c.seed, "Master seed; re-derives every stage seed");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

PipelineConfig resolve_config(const Common& c) {
  PipelineConfig cfg = c.config_path.empty() ? PipelineConfig{} : load_config(c.config_path);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.resolve_seeds();
  }
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

void echo_config(const std::string& command, const PipelineConfig& cfg) {
  std::cerr << "bage " << command << " resolved config:\n" << to_json(cfg).dump(2) << '\n';
}

fs::path manifest_dir(const std::string& manifest) {
  const auto parent = fs::path(manifest).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

fs::path resolve(const std::string& manifest, const std::string& relative) {
  const fs::path p(relative);
  return p.is_absolute() ? p : manifest_dir(manifest) / p;
}

// ---------------------------------------------------------------------------
// selected-patch CSV written by `extract`

struct PatchRow {
  std::string image_id;
  SelectedPatch patch;
  std::optional<Split> split;
  int epoch = -1;
  int relevance = -1;
};

std::vector<PatchRow> read_patch_rows(const std::string& path, const PatchingConfig& patches) {
  std::istringstream in(read_text_file(path));
  std::string line;
  long line_no = 0;
  std::map<std::string, std::size_t> col;
  std::vector<PatchRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < f.size(); ++i) col[f[i]] = i;
      for (const char* need : {"image_id", "x", "y", "side"})
        if (!col.count(need)) fail(ErrorKind::MissingColumn, path + ": missing column " + need);
      continue;
    }
    if (f.size() != col.size()) fail(ErrorKind::Parse, path + ": wrong field count", line_no);
    auto field = [&](const char* name) -> std::string_view {
      auto it = col.find(name);
      return it == col.end() ? std::string_view{} : std::string_view(f[it->second]);
    };
    PatchRow r;
    r.image_id = field("image_id");
    auto& g = r.patch.geometry;
    g.x = static_cast<int>(parse_long(field("x"), "x", line_no));
    g.y = static_cast<int>(parse_long(field("y"), "y", line_no));
    g.side = static_cast<int>(parse_long(field("side"), "side", line_no));
    const auto s = std::find(patches.sides.begin(), patches.sides.end(), g.side);
    g.scale_index = s == patches.sides.end() ? 0 : static_cast<int>(s - patches.sides.begin());
    if (!field("contrast_score").empty()) r.patch.contrast = parse_double(field("contrast_score"), "contrast_score", line_no);
    if (!field("cluster_id").empty()) r.patch.cluster = static_cast<int>(parse_long(field("cluster_id"), "cluster_id", line_no));
    if (!field("split").empty()) {
      r.split = parse_split(field("split"));
      if (!r.split) fail(ErrorKind::Parse, path + ": unknown split", line_no);
    }
    if (!field("epoch").empty()) r.epoch = static_cast<int>(parse_long(field("epoch"), "epoch", line_no));
    if (!field("relevance_label").empty())
      r.relevance = static_cast<int>(parse_long(field("relevance_label"), "relevance_label", line_no));
    rows.push_back(std::move(r));
  }
  if (col.empty()) fail(ErrorKind::MissingColumn, path + ": no header");
  return rows;
}

std::map<std::string, ManifestRecord> index_manifest(const std::vector<ManifestRecord>& records) {
  std::map<std::string, ManifestRecord> out;
  for (const auto& r : records) out.emplace(r.image_path, r);
  return out;
}

std::vector<ManifestRecord> load_manifest_or_fail(const std::string& manifest) {
  if (manifest.empty()) fail(ErrorKind::Config, "--manifest is required");
  return read_manifest(manifest);
}

// Pixels and labels of the train-split rows, labelled by relevance class or by epoch.
TrainingPatches training_patches(const std::vector<PatchRow>& rows, const std::string& manifest, bool relevance,
                                 int threads) {
  const auto records = index_manifest(load_manifest_or_fail(manifest));
  std::vector<const PatchRow*> chosen;
  for (const auto& r : rows) {
    if (r.split != Split::Train) continue;
    if ((relevance ? r.relevance : r.epoch) < 0) continue;
    if (!records.count(r.image_id)) fail(ErrorKind::Mismatch, "patch image " + r.image_id + " not in manifest");
    chosen.push_back(&r);
  }
  if (chosen.empty())
    fail(ErrorKind::EmptyInput, relevance ? "no labelled training patches (manifest needs mask_path)"
                                          : "no training patches with epoch labels");

  std::vector<std::string> ids;
  for (const auto* r : chosen)
    if (std::find(ids.begin(), ids.end(), r->image_id) == ids.end()) ids.push_back(r->image_id);
  std::vector<ImageBuffer> images(ids.size());
  parallel_for(ids.size(), threads,
               [&](std::size_t i) { images[i] = load_image(resolve(manifest, records.at(ids[i]).image_path)); });
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < ids.size(); ++i) slot[ids[i]] = i;

  TrainingPatches data;
  for (const auto* r : chosen) {
    data.pixels.push_back(extract(images[slot[r->image_id]], r->patch.geometry, r->image_id).pixels);
    data.labels.push_back(relevance ? r->relevance : r->epoch);
  }
  return data;
}

std::string loss_trace_csv(const std::vector<double>& losses) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out += std::to_string(i + 1) + ',' + format_double(losses[i]) + '\n';
  return out;
}

fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return p.parent_path() / (p.stem().string() + suffix);
}

// ---------------------------------------------------------------------------
// commands

struct SynthArgs {
  std::optional<int> n_per_class, image_size;
  std::optional<double> clutter;
};

int cmd_synth(const Common& c, const SynthArgs& a) {
  auto cfg = resolve_config(c);
  if (a.n_per_class) cfg.synth.n_per_class = *a.n_per_class;
  if (a.image_size) cfg.synth.image_size = *a.image_size;
  if (a.clutter) cfg.synth.clutter_fraction = *a.clutter;
  cfg.validate();
  echo_config("synth", cfg);
  if (c.out.empty()) fail(ErrorKind::Config, "--out directory is required");

  const auto corpus = synth_corpus(cfg.synth);
  const auto records = split_by_house(corpus.records, cfg.split, cfg.seed);
  const fs::path dir(c.out);
  parallel_for(corpus.images.size(), cfg.threads, [&](std::size_t i) {
    save_png(corpus.images[i], dir / records[i].image_path);
    save_label_png(corpus.masks[i], dir / records[i].mask_path);
  });
  write_file_atomic(dir / "manifest.csv", format_manifest(records));
  std::cout << "wrote " << records.size() << " images and " << (dir / "manifest.csv").string() << '\n';
  return 0;
}

int cmd_extract(const Common& c) {
  const auto cfg = resolve_config(c);
  echo_config("extract", cfg);
  if (c.out.empty()) fail(ErrorKind::Config, "--out directory is required");
  const auto records = load_manifest_or_fail(c.manifest);

  std::vector<ImageBuffer> images(records.size());
  std::vector<std::string> ids(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    images[i] = load_image(resolve(c.manifest, records[i].image_path));
    ids[i] = records[i].image_path;
  });
  const auto selections = select_corpus_patches(images, ids, cfg);

  std::vector<std::vector<int>> relevance(records.size());
  std::vector<Matrix> features(records.size()), descriptors(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    std::optional<LabelImage> mask;
    if (!records[i].mask_path.empty()) mask = load_label_png(resolve(c.manifest, records[i].mask_path));
    features[i] = Matrix(0, kFeatureDim);
    descriptors[i] = Matrix(0, static_cast<std::size_t>(cfg.sift.dim()));
    for (const auto& s : selections[i]) {
      const auto pixels = extract(images[i], s.geometry).pixels;
      features[i].push_row(featurize(pixels, cfg.sift));
      descriptors[i].push_row(normalize_descriptor(sift_descriptor(to_grayscale(pixels), cfg.sift), cfg.sift.clip).values);
      relevance[i].push_back(mask ? relevance_label(*mask, s.geometry) : -1);
    }
  });

  std::string csv = selected_patches_header();
  csv.pop_back();
  csv += ",split,epoch,relevance_label\n";
  std::ostringstream fbin, dbin;
  std::size_t total = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string split = records[i].split ? to_string(*records[i].split) : "";
    const int epoch = records[i].yoc >= kFirstEpochYear ? epoch_of_year(records[i].yoc).index : -1;
    for (std::size_t j = 0; j < selections[i].size(); ++j) {
      auto row = selected_patch_row(ids[i], selections[i][j]);
      row.pop_back();
      csv += row + ',' + split + ',' + (epoch >= 0 ? std::to_string(epoch) : "") + ',' +
             (relevance[i][j] >= 0 ? std::to_string(relevance[i][j]) : "") + '\n';
    }
    write_f32_rows(fbin, features[i]);
    write_f32_rows(dbin, descriptors[i]);
    total += selections[i].size();
  }
  const fs::path dir(c.out);
  write_file_atomic(dir / "patches.csv", csv);
  write_file_atomic(dir / "features.f32", fbin.str());
  write_file_atomic(dir / "descriptors.f32", dbin.str());
  std::cout << "selected " << total << " patches from " << records.size() << " images into " << dir.string() << '\n';
  return 0;
}

int cmd_train_relevance(const Common& c, const std::string& patches) {
  const auto cfg = resolve_config(c);
  echo_config("train-relevance", cfg);
  if (c.out.empty()) fail(ErrorKind::Config, "--out model path is required");
  const auto rows = read_patch_rows(patches, cfg.patches);
  const auto data = training_patches(rows, c.manifest, true, cfg.threads);
  const auto result = train_relevance_model(data, cfg);
  save_model(result.model, c.out);
  write_file_atomic(sibling(c.out, ".loss.csv"), loss_trace_csv(result.epoch_loss));
  std::cout << "trained relevance model on " << data.pixels.size() << " patches -> " << c.out << '\n';
  return 0;
}

struct EpochArgs {
  std::string patches;
  std::string relevance_model;
  std::string arch;
  std::optional<int> hidden;
  std::optional<std::size_t> member;
};

int cmd_train_epoch(const Common& c, const EpochArgs& a) {
  auto cfg = resolve_config(c);
  if (c.out.empty()) fail(ErrorKind::Config, "--out model path is required");
  std::size_t member = a.member.value_or(0);
  if (!a.member && !a.arch.empty()) {
    const auto arch = parse_architecture(a.arch);
    for (std::size_t i = 0; i < cfg.epoch_models.size(); ++i)
      if (cfg.epoch_models[i].architecture == arch) {
        member = i;
        break;
      }
  }
  if (member >= cfg.epoch_models.size()) {
    if (a.member) fail(ErrorKind::Config, "--member exceeds the configured epoch models");
    member = 0;
  }
  ModelSpec spec = cfg.epoch_models[member];
  if (!a.arch.empty()) spec.architecture = parse_architecture(a.arch);
  if (a.hidden) spec.hidden_units = *a.hidden;
  cfg.epoch_models[member] = spec;
  cfg.validate();
  echo_config("train-epoch", cfg);

  const auto rows = read_patch_rows(a.patches, cfg.patches);
  auto data = training_patches(rows, c.manifest, false, cfg.threads);
  const std::size_t before = data.pixels.size();
  if (!a.relevance_model.empty() && cfg.use_relevance_filter) {
    data = keep_building_patches(data, load_model(a.relevance_model), cfg);
    if (data.pixels.empty()) fail(ErrorKind::EmptyInput, "the relevance filter rejected every training patch");
  }
  TrainConfig tc = cfg.epoch_training;
  tc.seed = cfg.epoch_model_seed(member);
  const auto result = train_on_patches(data.pixels, data.labels, kNumEpochs, spec, tc, cfg.threads, cfg.sift, cfg.augment);
  save_model(result.model, c.out);
  write_file_atomic(sibling(c.out, ".loss.csv"), loss_trace_csv(result.epoch_loss));
  std::cout << "trained " << to_string(spec.architecture) << " epoch model on " << data.pixels.size() << " of "
            << before << " patches -> " << c.out << '\n';
  return 0;
}

struct PredictArgs {
  std::string relevance_model;
  std::string likelihoods;
  std::string patches;
  std::string split = "test";
  std::string patches_out;
};

int cmd_predict(const Common& c, const PredictArgs& a) {
  const auto cfg = resolve_config(c);
  echo_config("predict", cfg);
  if (c.out.empty()) fail(ErrorKind::Config, "--out predictions path is required");
  if (c.models.empty() == a.likelihoods.empty())
    fail(ErrorKind::Config, "give either --model (one or more) or --likelihoods");
  std::optional<Split> only;
  if (a.split != "all") {
    only = parse_split(a.split);
    if (!only) fail(ErrorKind::Config, "--split must be train, validation, test or all");
  }

  std::unique_ptr<PatchClassifier> classifier;
  if (!a.likelihoods.empty()) {
    classifier = std::make_unique<ExternalLikelihoods>(ExternalLikelihoods::load(a.likelihoods));
  } else {
    std::vector<ClassifierModel> models;
    for (const auto& m : c.models) models.push_back(load_model(m));
    classifier = std::make_unique<EnsembleClassifier>(std::move(models), cfg.sift);
  }
  if (classifier->n_classes() != kNumEpochs)
    fail(ErrorKind::WrongClassCount, "epoch classifier must produce " + std::to_string(kNumEpochs) + " classes");
  std::optional<ClassifierModel> relevance;
  if (!a.relevance_model.empty()) relevance = load_model(a.relevance_model);

  std::map<std::string, std::vector<SelectedPatch>> given;
  if (!a.patches.empty())
    for (auto& r : read_patch_rows(a.patches, cfg.patches)) given[r.image_id].push_back(r.patch);

  std::vector<ManifestRecord> records;
  for (const auto& r : load_manifest_or_fail(c.manifest))
    if (!only || r.split == only) records.push_back(r);
  if (records.empty()) fail(ErrorKind::EmptyInput, "no manifest records in split " + a.split);

  std::vector<ImagePrediction> preds(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    const auto img = load_image(resolve(c.manifest, records[i].image_path));
    const auto& id = records[i].image_path;
    const ClassifierModel* rel = relevance ? &*relevance : nullptr;
    if (given.empty()) {
      preds[i] = predict_building(img, id, rel, *classifier, cfg);
    } else {
      const auto it = given.find(id);
      if (it == given.end()) fail(ErrorKind::Mismatch, "no selected patches listed for " + id);
      preds[i] = predict_selected(img, id, it->second, rel, *classifier, cfg);
    }
  });

  std::string lines, rows = patch_predictions_header(kNumEpochs);
  std::size_t low = 0;
  for (const auto& p : preds) {
    lines += prediction_json_line(p) + '\n';
    rows += patch_prediction_rows(p);
    low += p.building.low_confidence;
  }
  write_file_atomic(c.out, lines);
  if (!a.patches_out.empty()) write_file_atomic(a.patches_out, rows);
  std::cout << "predicted " << preds.size() << " images (" << low << " low confidence) -> " << c.out << '\n';
  return 0;
}

json ranked_json(const std::vector<RankedPatch>& ranked) {
  json arr = json::array();
  for (const auto& r : ranked)
    arr.push_back({{"patch_id", r.patch_id},
                   {"true_label", r.true_label},
                   {"predicted", r.predicted},
                   {"true_probability", r.true_probability},
                   {"margin", r.margin}});
  return arr;
}

// Per-patch likelihood rows joined with the manifest's image labels.
std::vector<PatchRecord> patch_records(const std::string& likelihoods, const std::map<std::string, ManifestRecord>& truth) {
  std::istringstream in(read_text_file(likelihoods));
  std::string line;
  long line_no = 0;
  bool header = true;
  std::vector<PatchRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (header) {
      if (f.size() < 5 || f[0] != "image_id") fail(ErrorKind::MissingColumn, likelihoods + ": bad header");
      header = false;
      continue;
    }
    const auto it = truth.find(f[0]);
    if (it == truth.end()) fail(ErrorKind::Mismatch, "patch image " + f[0] + " not in manifest");
    PatchRecord r;
    r.patch_id = f[0] + '@' + f[1] + ',' + f[2] + ',' + f[3];
    r.true_label = epoch_of_year(it->second.yoc).index;
    for (std::size_t i = 4; i < f.size(); ++i) r.distribution.push_back(parse_double(f[i], "likelihood", line_no));
    out.push_back(std::move(r));
  }
  return out;
}

int cmd_evaluate(const Common& c, const std::string& predictions, const std::string& patch_likelihoods) {
  const auto cfg = resolve_config(c);
  echo_config("evaluate", cfg);
  if (c.out.empty()) fail(ErrorKind::Config, "--out metrics path is required");
  const auto truth = index_manifest(load_manifest_or_fail(c.manifest));
  std::istringstream in(read_text_file(predictions));
  const auto lines = parse_prediction_lines(in);
  if (lines.empty()) fail(ErrorKind::EmptyInput, predictions + " holds no predictions");

  std::vector<int> pred, gold;
  std::size_t low = 0;
  for (const auto& l : lines) {
    const auto it = truth.find(l.image_id);
    if (it == truth.end()) fail(ErrorKind::Mismatch, "prediction for unknown image " + l.image_id);
    pred.push_back(l.epoch);
    gold.push_back(epoch_of_year(it->second.yoc).index);
    low += l.low_confidence;
  }
  const auto cm = confusion_matrix(pred, gold, kNumEpochs);
  std::vector<std::string> labels;
  for (int k = 0; k < kNumEpochs; ++k) labels.push_back(EpochLabel{k}.name());
  json counts = json::array();
  for (int i = 0; i < kNumEpochs; ++i) {
    json row = json::array();
    for (int j = 0; j < kNumEpochs; ++j) row.push_back(cm.at(i, j));
    counts.push_back(row);
  }
  json metrics{{"n_images", lines.size()},
               {"accuracy", accuracy(pred, gold)},
               {"top1_error", top1_error(pred, gold)},
               {"zero_rule_baseline", zero_rule_baseline(gold)},
               {"low_confidence", low},
               {"above_diagonal_fraction", cm.above_diagonal_fraction()},
               {"confusion", {{"labels", labels}, {"rows", "true"}, {"columns", "predicted"}, {"counts", counts}}}};
  if (!patch_likelihoods.empty()) {
    const auto records = patch_records(patch_likelihoods, truth);
    if (records.empty()) fail(ErrorKind::EmptyInput, patch_likelihoods + " holds no patches");
    std::vector<int> pp, pg;
    for (const auto& r : records) {
      pp.push_back(static_cast<int>(argmax(r.distribution)));
      pg.push_back(r.true_label);
    }
    metrics["patch_accuracy"] = accuracy(pp, pg);
    metrics["n_patches"] = records.size();
  }
  write_file_atomic(c.out, metrics.dump(2) + '\n');
  write_file_atomic(sibling(c.out, ".confusion.csv"), cm.to_csv(labels));
  std::cout << "accuracy " << metrics["accuracy"].get<double>() << " on " << lines.size() << " images -> " << c.out
            << '\n';
  return 0;
}

int cmd_inspect(const Common& c, const std::string& patch_likelihoods, std::size_t top) {
  const auto cfg = resolve_config(c);
  echo_config("inspect", cfg);
  const auto truth = index_manifest(load_manifest_or_fail(c.manifest));
  if (patch_likelihoods.empty()) fail(ErrorKind::Config, "--patch-likelihoods is required");
  const auto records = patch_records(patch_likelihoods, truth);
  const json listing{{"confident", ranked_json(rank_confident_patches(records, top))},
                     {"uncertain", ranked_json(rank_uncertain_patches(records, top))}};
  if (c.out.empty())
    std::cout << listing.dump(2) << '\n';
  else
    write_file_atomic(c.out, listing.dump(2) + '\n');
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Io:
    case ErrorKind::Decode:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building age estimation from facade patches"};
  app.require_subcommand(1);

  Common common;
  SynthArgs synth_args;
  EpochArgs epoch_args;
  PredictArgs predict_args;
  std::string patches, predictions, patch_likelihoods;
  std::size_t top = 100;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus, masks and a split manifest");
  add_common(synth, common);
  synth->add_option("--out", common.out, "Output directory")->required();
  synth->add_option("--n-per-class", synth_args.n_per_class, "Images per epoch class");
  synth->add_option("--image-size", synth_args.image_size, "Image side in pixels");
  synth->add_option("--clutter", synth_args.clutter, "Target clutter fraction");

  auto* extract_cmd = app.add_subcommand("extract", "Select patches and write patch CSV, features and descriptors");
  add_common(extract_cmd, common);
  extract_cmd->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  extract_cmd->add_option("--out", common.out, "Output directory")->required();

  auto* relevance = app.add_subcommand("train-relevance", "Train the 13-class relevance filter");
  add_common(relevance, common);
  relevance->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  relevance->add_option("--patches", patches, "patches.csv written by extract")->required();
  relevance->add_option("--out", common.out, "Model file")->required();

  auto* epoch = app.add_subcommand("train-epoch", "Train one epoch classifier of the ensemble");
  add_common(epoch, common);
  epoch->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  epoch->add_option("--patches", epoch_args.patches, "patches.csv written by extract")->required();
  epoch->add_option("--relevance-model", epoch_args.relevance_model, "Relevance model used to filter training patches");
  epoch->add_option("--arch", epoch_args.arch, "linear_softmax or mlp_1hidden");
  epoch->add_option("--hidden", epoch_args.hidden, "Hidden units for mlp_1hidden")->check(CLI::PositiveNumber);
  epoch->add_option("--member", epoch_args.member, "Index into the configured epoch models (selects the seed)");
  epoch->add_option("--out", common.out, "Model file")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict building epochs as JSON lines");
  add_common(predict_cmd, common);
  predict_cmd->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  predict_cmd->add_option("--model", common.models, "Epoch model file (repeat for an ensemble)");
  predict_cmd->add_option("--likelihoods", predict_args.likelihoods, "External per-patch likelihood CSV");
  predict_cmd->add_option("--relevance-model", predict_args.relevance_model, "Relevance filter model");
  predict_cmd->add_option("--patches", predict_args.patches, "Use the selection from this patches.csv");
  predict_cmd->add_option("--split", predict_args.split, "train, validation, test or all");
  predict_cmd->add_option("--patches-out", predict_args.patches_out, "Also write per-patch likelihoods here");
  predict_cmd->add_option("--out", common.out, "Predictions file (JSON lines)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy, baselines and confusion matrix");
  add_common(evaluate, common);
  evaluate->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  evaluate->add_option("--predictions", predictions, "Predictions file")->required();
  evaluate->add_option("--patch-likelihoods", patch_likelihoods, "Per-patch likelihoods for patch-level accuracy");
  evaluate->add_option("--out", common.out, "Metrics JSON")->required();

  auto* inspect = app.add_subcommand("inspect", "Most confident and most uncertain patches");
  add_common(inspect, common);
  inspect->add_option("--manifest", common.manifest, "Manifest CSV")->required();
  inspect->add_option("--patch-likelihoods", patch_likelihoods, "Per-patch likelihoods from predict")->required();
  inspect->add_option("--top", top, "Entries per list")->check(CLI::PositiveNumber);
  inspect->add_option("--out", common.out, "Listing JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(common, synth_args);
    if (*extract_cmd) return cmd_extract(common);
    if (*relevance) return cmd_train_relevance(common, patches);
    if (*epoch) return cmd_train_epoch(common, epoch_args);
    if (*predict_cmd) return cmd_predict(common, predict_args);
    if (*evaluate) return cmd_evaluate(common, predictions, patch_likelihoods);
    if (*inspect) return cmd_inspect(common, patch_likelihoods, top);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
