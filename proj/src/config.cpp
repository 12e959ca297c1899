#include "bage/config.hpp"

#include <set>

#include "bage/io.hpp"

namespace bage {

using nlohmann::json;

void PatchingConfig::validate() const {
  if (sides.empty()) fail(ErrorKind::Config, "patches.sides must not be empty");
  for (int s : sides)
    if (s < 4) fail(ErrorKind::Config, "patch sides must be at least 4 pixels");
  if (!(overlap >= 0.0 && overlap < 1.0)) fail(ErrorKind::Config, "patches.overlap must lie in [0, 1)");
}

PipelineConfig::PipelineConfig() {
  relevance_training.augment = true;
  epoch_training.augment = true;
  resolve_seeds();
}

void PipelineConfig::resolve_seeds() {
  synth.seed = seed;
  selection.seed = mix_seed(seed, 11);
  relevance_training.seed = mix_seed(seed, 21);
  epoch_training.seed = mix_seed(seed, 41);
}

std::uint64_t PipelineConfig::epoch_model_seed(std::size_t i) const { return mix_seed(epoch_training.seed, i); }

void PipelineConfig::validate() const {
  if (threads < 1) fail(ErrorKind::Config, "threads must be at least 1");
  synth.validate();
  split.validate();
  patches.validate();
  sift.validate();
  selection.validate();
  relevance_training.validate();
  epoch_training.validate();
  fusion.validate();
  if (epoch_models.empty()) fail(ErrorKind::Config, "at least one epoch model is required");
  for (const auto& m : epoch_models)
    if (m.architecture == Architecture::Mlp1Hidden && m.hidden_units < 1)
      fail(ErrorKind::Config, "mlp hidden_units must be positive");
  if (relevance_model.architecture == Architecture::Mlp1Hidden && relevance_model.hidden_units < 1)
    fail(ErrorKind::Config, "mlp hidden_units must be positive");
  AugmentParams lo{false, augment.crop_min, augment.scale_min, -augment.brightness_max, augment.contrast_min,
                   augment.saturation_min};
  AugmentParams hi{true, augment.crop_max, augment.scale_max, augment.brightness_max, augment.contrast_max,
                   augment.saturation_max};
  AugmentRanges widest;
  widest.crop_min = 0.1;
  widest.scale_min = 0.25;
  widest.scale_max = 4.0;
  widest.brightness_max = 255.0;
  widest.contrast_min = widest.saturation_min = 0.0;
  widest.contrast_max = widest.saturation_max = 4.0;
  try {
    lo.validate(widest);
    hi.validate(widest);
  } catch (const Error& e) {
    fail(ErrorKind::Config, std::string("augment ranges: ") + e.what());
  }
  if (augment.crop_min > augment.crop_max || augment.scale_min > augment.scale_max ||
      augment.contrast_min > augment.contrast_max || augment.saturation_min > augment.saturation_max)
    fail(ErrorKind::Config, "augment range minimum exceeds maximum");
  if (!(augment.flip_probability >= 0.0 && augment.flip_probability <= 1.0))
    fail(ErrorKind::Config, "augment.flip_probability must lie in [0, 1]");
}

namespace {

json train_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
          {"momentum", c.momentum},           {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"augment", c.augment},
          {"loss_reduction", c.reduction == LossReduction::Sum ? "sum" : "mean"},
          {"seed", c.seed}};
}

json model_json(const ModelSpec& m) {
  json j{{"architecture", to_string(m.architecture)}};
  if (m.architecture == Architecture::Mlp1Hidden) j["hidden_units"] = m.hidden_units;
  return j;
}

void check_keys(const json& obj, std::string_view where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorKind::Config, std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(ErrorKind::Config, "unknown key '" + it.key() + "' in " + std::string(where));
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

TrainConfig train_from(const json& j, TrainConfig c, std::string_view where) {
  check_keys(j, where,
             {"learning_rate", "weight_decay", "momentum", "batch_size", "epochs", "augment", "loss_reduction", "seed"});
  read(j, "learning_rate", c.learning_rate);
  read(j, "weight_decay", c.weight_decay);
  read(j, "momentum", c.momentum);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "augment", c.augment);
  if (j.contains("loss_reduction")) {
    const auto r = j["loss_reduction"].get<std::string>();
    if (r == "sum") c.reduction = LossReduction::Sum;
    else if (r == "mean") c.reduction = LossReduction::Mean;
    else fail(ErrorKind::Config, "loss_reduction must be 'sum' or 'mean'");
  }
  return c;
}

ModelSpec model_from(const json& j, std::string_view where) {
  check_keys(j, where, {"architecture", "hidden_units"});
  ModelSpec m;
  m.architecture = parse_architecture(j.at("architecture").get<std::string>());
  read(j, "hidden_units", m.hidden_units);
  return m;
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json models = json::array();
  for (const auto& m : c.epoch_models) models.push_back(model_json(m));
  return {
      {"seed", c.seed},
      {"threads", c.threads},
      {"synth",
       {{"n_per_class", c.synth.n_per_class},
        {"image_size", c.synth.image_size},
        {"clutter_fraction", c.synth.clutter_fraction},
        {"images_per_house", c.synth.images_per_house},
        {"seed", c.synth.seed}}},
      {"split", {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
      {"patches", {{"sides", c.patches.sides}, {"overlap", c.patches.overlap}}},
      {"sift",
       {{"spatial_bins", c.sift.spatial_bins},
        {"orientation_bins", c.sift.orientation_bins},
        {"gaussian_window", c.sift.gaussian_window},
        {"sigma_fraction", c.sift.sigma_fraction},
        {"clip", c.sift.clip}}},
      {"selection",
       {{"strategy", to_string(c.selection.strategy)},
        {"t_percent", c.selection.t_percent},
        {"k", c.selection.k},
        {"max_iter", c.selection.max_iter},
        {"corpus_global", c.selection.corpus_global},
        {"seed", c.selection.seed}}},
      {"relevance",
       {{"enabled", c.use_relevance_filter}, {"model", model_json(c.relevance_model)},
        {"training", train_json(c.relevance_training)}}},
      {"epoch", {{"models", models}, {"training", train_json(c.epoch_training)}}},
      {"augment",
       {{"crop", {c.augment.crop_min, c.augment.crop_max}},
        {"scale", {c.augment.scale_min, c.augment.scale_max}},
        {"brightness", c.augment.brightness_max},
        {"contrast", {c.augment.contrast_min, c.augment.contrast_max}},
        {"saturation", {c.augment.saturation_min, c.augment.saturation_max}},
        {"flip_probability", c.augment.flip_probability}}},
      {"fusion",
       {{"aggregation", to_string(c.fusion.aggregation)},
        {"t_u", c.fusion.t_u},
        {"drop_ambiguous", c.fusion.drop_ambiguous}}},
  };
}

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig c;
  try {
    check_keys(doc, "config",
               {"seed", "threads", "synth", "split", "patches", "sift", "selection", "relevance", "epoch", "augment",
                "fusion"});
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);
    c.resolve_seeds();

    if (doc.contains("synth")) {
      const auto& j = doc["synth"];
      check_keys(j, "synth", {"n_per_class", "image_size", "clutter_fraction", "images_per_house", "seed"});
      read(j, "n_per_class", c.synth.n_per_class);
      read(j, "image_size", c.synth.image_size);
      read(j, "clutter_fraction", c.synth.clutter_fraction);
      read(j, "images_per_house", c.synth.images_per_house);
    }
    if (doc.contains("split")) {
      const auto& j = doc["split"];
      check_keys(j, "split", {"train", "validation", "test"});
      read(j, "train", c.split.train);
      read(j, "validation", c.split.validation);
      read(j, "test", c.split.test);
    }
    if (doc.contains("patches")) {
      const auto& j = doc["patches"];
      check_keys(j, "patches", {"sides", "overlap"});
      read(j, "sides", c.patches.sides);
      read(j, "overlap", c.patches.overlap);
    }
    if (doc.contains("sift")) {
      const auto& j = doc["sift"];
      check_keys(j, "sift", {"spatial_bins", "orientation_bins", "gaussian_window", "sigma_fraction", "clip"});
      read(j, "spatial_bins", c.sift.spatial_bins);
      read(j, "orientation_bins", c.sift.orientation_bins);
      read(j, "gaussian_window", c.sift.gaussian_window);
      read(j, "sigma_fraction", c.sift.sigma_fraction);
      read(j, "clip", c.sift.clip);
    }
    if (doc.contains("selection")) {
      const auto& j = doc["selection"];
      check_keys(j, "selection", {"strategy", "t_percent", "k", "max_iter", "corpus_global", "seed"});
      if (j.contains("strategy")) c.selection.strategy = parse_selection_strategy(j["strategy"].get<std::string>());
      read(j, "t_percent", c.selection.t_percent);
      read(j, "k", c.selection.k);
      read(j, "max_iter", c.selection.max_iter);
      read(j, "corpus_global", c.selection.corpus_global);
    }
    if (doc.contains("relevance")) {
      const auto& j = doc["relevance"];
      check_keys(j, "relevance", {"enabled", "model", "training"});
      read(j, "enabled", c.use_relevance_filter);
      if (j.contains("model")) c.relevance_model = model_from(j["model"], "relevance.model");
      if (j.contains("training")) c.relevance_training = train_from(j["training"], c.relevance_training, "relevance.training");
    }
    if (doc.contains("epoch")) {
      const auto& j = doc["epoch"];
      check_keys(j, "epoch", {"models", "training"});
      if (j.contains("models")) {
        c.epoch_models.clear();
        for (const auto& m : j["models"]) c.epoch_models.push_back(model_from(m, "epoch.models[]"));
      }
      if (j.contains("training")) c.epoch_training = train_from(j["training"], c.epoch_training, "epoch.training");
    }
    if (doc.contains("augment")) {
      const auto& j = doc["augment"];
      check_keys(j, "augment", {"crop", "scale", "brightness", "contrast", "saturation", "flip_probability"});
      auto pair = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto v = j[key].get<std::vector<double>>();
        if (v.size() != 2) fail(ErrorKind::Config, std::string("augment.") + key + " must be [min, max]");
        lo = v[0];
        hi = v[1];
      };
      pair("crop", c.augment.crop_min, c.augment.crop_max);
      pair("scale", c.augment.scale_min, c.augment.scale_max);
      pair("contrast", c.augment.contrast_min, c.augment.contrast_max);
      pair("saturation", c.augment.saturation_min, c.augment.saturation_max);
      read(j, "brightness", c.augment.brightness_max);
      read(j, "flip_probability", c.augment.flip_probability);
    }
    if (doc.contains("fusion")) {
      const auto& j = doc["fusion"];
      check_keys(j, "fusion", {"aggregation", "t_u", "drop_ambiguous"});
      if (j.contains("aggregation")) c.fusion.aggregation = parse_aggregation(j["aggregation"].get<std::string>());
      read(j, "t_u", c.fusion.t_u);
      read(j, "drop_ambiguous", c.fusion.drop_ambiguous);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, e.what());
  }
  c.resolve_seeds();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    fail(ErrorKind::Config, "cannot read config file " + path.string());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace bage
