#include "bage/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "bage/io.hpp"

namespace bage {

std::vector<double> featurize(const ImageBuffer& patch, const SiftParams& sift) {
  const ImageBuffer scaled = resize_bilinear(patch, kFeaturePatchSide);
  const auto desc = normalize_descriptor(sift_descriptor(to_grayscale(scaled), sift), sift.clip);

  std::vector<double> out;
  out.reserve(desc.values.size() + 3 * kColorBins);
  out.insert(out.end(), desc.values.begin(), desc.values.end());

  std::array<double, 3 * kColorBins> hist{};
  const std::size_t n = static_cast<std::size_t>(scaled.width) * scaled.height;
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) hist[c * kColorBins + scaled.data[3 * i + c] * kColorBins / 256] += 1.0;
  for (double& h : hist) h /= static_cast<double>(n);
  out.insert(out.end(), hist.begin(), hist.end());
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

const char* to_string(Architecture a) {
  return a == Architecture::LinearSoftmax ? "linear_softmax" : "mlp_1hidden";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "linear_softmax" || text == "linear") return Architecture::LinearSoftmax;
  if (text == "mlp_1hidden" || text == "mlp") return Architecture::Mlp1Hidden;
  fail(ErrorKind::Config, "unknown architecture '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) fail(ErrorKind::Config, "learning_rate must be non-negative");
  if (!(weight_decay >= 0.0)) fail(ErrorKind::Config, "weight_decay must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::Config, "momentum must lie in [0, 1)");
  if (batch_size < 1) fail(ErrorKind::Config, "batch_size must be at least 1");
  if (epochs < 1) fail(ErrorKind::Config, "epochs must be at least 1");
}

std::size_t ClassifierModel::expected_param_count() const {
  const auto d = static_cast<std::size_t>(feature_dim), c = static_cast<std::size_t>(n_classes);
  if (architecture == Architecture::LinearSoftmax) return c * d + c;
  const auto h = static_cast<std::size_t>(hidden_units);
  return h * d + h + c * h + c;
}

std::vector<bool> ClassifierModel::decay_mask() const {
  std::vector<bool> mask(params.size(), true);
  const auto d = static_cast<std::size_t>(feature_dim), c = static_cast<std::size_t>(n_classes);
  if (architecture == Architecture::LinearSoftmax) {
    std::fill(mask.begin() + c * d, mask.end(), false);
  } else {
    const auto h = static_cast<std::size_t>(hidden_units);
    std::fill(mask.begin() + h * d, mask.begin() + h * d + h, false);
    std::fill(mask.end() - c, mask.end(), false);
  }
  return mask;
}

void ClassifierModel::validate() const {
  if (feature_dim < 1 || n_classes < 2) fail(ErrorKind::ShapeMismatch, "model needs feature_dim >= 1 and >= 2 classes");
  if (architecture == Architecture::Mlp1Hidden && hidden_units < 1)
    fail(ErrorKind::ShapeMismatch, "mlp needs at least one hidden unit");
  if (params.size() != expected_param_count())
    fail(ErrorKind::ShapeMismatch, "parameter count " + std::to_string(params.size()) + " does not match architecture (" +
                                       std::to_string(expected_param_count()) + ")");
}

namespace {

void affine(const double* w, const double* b, std::span<const double> x, std::size_t out_dim, double* out) {
  const std::size_t in_dim = x.size();
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double* row = w + o * in_dim;
    double s = b[o];
    for (std::size_t i = 0; i < in_dim; ++i) s += row[i] * x[i];
    out[o] = s;
  }
}

void check_features(const ClassifierModel& model, std::size_t dim) {
  if (dim != static_cast<std::size_t>(model.feature_dim))
    fail(ErrorKind::ShapeMismatch, "feature length " + std::to_string(dim) + " != model feature_dim " +
                                       std::to_string(model.feature_dim));
}

void round_to_float(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace

std::vector<double> ClassifierModel::logits(std::span<const double> x) const {
  check_features(*this, x.size());
  const auto d = static_cast<std::size_t>(feature_dim), c = static_cast<std::size_t>(n_classes);
  std::vector<double> z(c);
  if (architecture == Architecture::LinearSoftmax) {
    affine(params.data(), params.data() + c * d, x, c, z.data());
    return z;
  }
  const auto h = static_cast<std::size_t>(hidden_units);
  std::vector<double> hidden(h);
  affine(params.data(), params.data() + h * d, x, h, hidden.data());
  for (double& v : hidden) v = std::max(v, 0.0);
  const double* w2 = params.data() + h * d + h;
  affine(w2, w2 + c * h, hidden, c, z.data());
  return z;
}

ClassifierModel init_model(const ModelSpec& spec, int feature_dim, int n_classes, std::uint64_t seed) {
  ClassifierModel m;
  m.architecture = spec.architecture;
  m.feature_dim = feature_dim;
  m.n_classes = n_classes;
  m.hidden_units = spec.architecture == Architecture::Mlp1Hidden ? spec.hidden_units : 0;
  m.rng_seed = seed;
  m.params.assign(m.expected_param_count(), 0.0);
  m.validate();

  Rng rng(seed);
  auto glorot = [&rng](double* w, std::size_t fan_out, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) w[i] = u(rng);
  };
  const auto d = static_cast<std::size_t>(feature_dim), c = static_cast<std::size_t>(n_classes);
  if (m.architecture == Architecture::LinearSoftmax) {
    glorot(m.params.data(), c, d);
  } else {
    const auto h = static_cast<std::size_t>(m.hidden_units);
    glorot(m.params.data(), h, d);
    glorot(m.params.data() + h * d + h, c, h);
  }
  round_to_float(m.params);
  return m;
}

LossGradient loss_and_gradient(const ClassifierModel& model, const Matrix& features, std::span<const int> labels,
                               std::span<const std::size_t> rows) {
  model.validate();
  check_features(model, features.cols);
  if (labels.size() != features.rows) fail(ErrorKind::ShapeMismatch, "one label per feature row required");

  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(features.rows);
    std::iota(all.begin(), all.end(), 0);
    rows = all;
  }

  const auto d = static_cast<std::size_t>(model.feature_dim), c = static_cast<std::size_t>(model.n_classes);
  const auto h = static_cast<std::size_t>(model.hidden_units);
  LossGradient out;
  out.gradient.assign(model.params.size(), 0.0);
  std::vector<double> z(c), hidden(h), dhidden(h);
  const double* p = model.params.data();
  double* g = out.gradient.data();

  for (std::size_t r : rows) {
    const auto x = features.row(r);
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c) fail(ErrorKind::ShapeMismatch, "label out of range");

    const double* w_out;
    std::span<const double> top_input;
    if (model.architecture == Architecture::LinearSoftmax) {
      w_out = p;
      top_input = x;
    } else {
      affine(p, p + h * d, x, h, hidden.data());
      for (double& v : hidden) v = std::max(v, 0.0);
      w_out = p + h * d + h;
      top_input = hidden;
    }
    const std::size_t in_dim = top_input.size();
    affine(w_out, w_out + c * in_dim, top_input, c, z.data());

    const double zmax = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - zmax);
    out.loss += std::log(total) + zmax - z[static_cast<std::size_t>(y)];

    // dL/dz = softmax - onehot
    const std::size_t w_off = static_cast<std::size_t>(w_out - p);
    double* gw = g + w_off;
    double* gb = gw + c * in_dim;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double dz = std::exp(z[k] - zmax) / total - (k == static_cast<std::size_t>(y) ? 1.0 : 0.0);
      double* gwk = gw + k * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) gwk[i] += dz * top_input[i];
      gb[k] += dz;
      if (model.architecture == Architecture::Mlp1Hidden) {
        const double* wk = w_out + k * in_dim;
        for (std::size_t i = 0; i < h; ++i) dhidden[i] += dz * wk[i];
      }
    }
    if (model.architecture == Architecture::Mlp1Hidden) {
      double* gb1 = g + h * d;
      for (std::size_t j = 0; j < h; ++j) {
        if (hidden[j] <= 0.0) continue;
        const double dh = dhidden[j];
        double* gw1 = g + j * d;
        for (std::size_t i = 0; i < d; ++i) gw1[i] += dh * x[i];
        gb1[j] += dh;
      }
    }
  }
  return out;
}

namespace {

using EpochFeatures = std::function<const Matrix&(int epoch, std::span<const std::size_t> order, Rng& rng)>;

void check_labels(std::span<const int> labels, int n_classes) {
  if (n_classes < 2) fail(ErrorKind::DegenerateDataset, "need at least two classes");
  std::set<int> present;
  for (int y : labels) {
    if (y < 0 || y >= n_classes) fail(ErrorKind::ShapeMismatch, "label " + std::to_string(y) + " out of range");
    present.insert(y);
  }
  if (present.size() < 2) fail(ErrorKind::DegenerateDataset, "training data contains fewer than two classes");
}

TrainResult sgd(std::size_t n, int feature_dim, std::span<const int> labels, int n_classes, const ModelSpec& spec,
                const TrainConfig& config, const EpochFeatures& epoch_features) {
  config.validate();
  check_labels(labels, n_classes);

  TrainResult result;
  result.model = init_model(spec, feature_dim, n_classes, config.seed);
  result.model.train_config = config;
  auto& w = result.model.params;
  const auto mask = result.model.decay_mask();
  std::vector<double> velocity(w.size(), 0.0);

  Rng rng(mix_seed(config.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const Matrix& features = epoch_features(epoch, order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      auto lg = loss_and_gradient(result.model, features, labels, batch);
      epoch_loss += lg.loss;
      const double scale = config.reduction == LossReduction::Mean ? 1.0 / static_cast<double>(batch.size()) : 1.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        double grad = lg.gradient[i] * scale;
        if (mask[i]) grad += config.weight_decay * w[i];
        velocity[i] = config.momentum * velocity[i] - config.learning_rate * grad;
        w[i] += velocity[i];
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  round_to_float(w);
  return result;
}

}  // namespace

TrainResult train(const Matrix& features, std::span<const int> labels, int n_classes, const ModelSpec& spec,
                  const TrainConfig& config) {
  if (features.rows != labels.size()) fail(ErrorKind::ShapeMismatch, "one label per feature row required");
  if (features.rows == 0) fail(ErrorKind::DegenerateDataset, "empty training set");
  return sgd(features.rows, static_cast<int>(features.cols), labels, n_classes, spec, config,
             [&features](int, std::span<const std::size_t>, Rng&) -> const Matrix& { return features; });
}

TrainResult train_on_patches(std::span<const ImageBuffer> patches, std::span<const int> labels, int n_classes,
                             const ModelSpec& spec, const TrainConfig& config, int threads, const SiftParams& sift,
                             const AugmentRanges& ranges) {
  if (patches.size() != labels.size()) fail(ErrorKind::ShapeMismatch, "one label per patch required");
  if (patches.empty()) fail(ErrorKind::DegenerateDataset, "empty training set");
  const std::size_t n = patches.size();
  Matrix features(n, kFeatureDim);
  auto fill = [&](std::size_t i, const ImageBuffer& px) {
    const auto f = featurize(px, sift);
    std::copy(f.begin(), f.end(), features.row(i).begin());
  };

  if (!config.augment) {
    parallel_for(n, threads, [&](std::size_t i) { fill(i, patches[i]); });
    return train(features, labels, n_classes, spec, config);
  }

  std::vector<AugmentParams> draws(n);
  return sgd(n, kFeatureDim, labels, n_classes, spec, config,
             [&](int, std::span<const std::size_t> order, Rng& rng) -> const Matrix& {
               // draws follow presentation order so the RNG stream is independent of threading
               for (std::size_t i : order) draws[i] = sample_augment_params(rng, ranges);
               parallel_for(n, threads, [&](std::size_t i) { fill(i, augment(patches[i], draws[i])); });
               return features;
             });
}

std::vector<double> predict(const ClassifierModel& model, std::span<const double> features) {
  return softmax(model.logits(features));
}

std::vector<double> ensemble_predict(std::span<const ClassifierModel> models, std::span<const double> features) {
  if (models.empty()) fail(ErrorKind::EmptyInput, "ensemble has no members");
  std::vector<double> mean(static_cast<std::size_t>(models.front().n_classes), 0.0);
  for (const auto& m : models) {
    if (m.n_classes != models.front().n_classes) fail(ErrorKind::Mismatch, "ensemble members disagree on class count");
    const auto p = predict(m, features);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
  }
  for (double& v : mean) v /= static_cast<double>(models.size());
  return mean;
}

std::vector<std::size_t> relevance_filter(const ClassifierModel& model, const Matrix& features) {
  if (model.n_classes != 13)
    fail(ErrorKind::WrongClassCount, "relevance filter needs a 13-class model, got " + std::to_string(model.n_classes));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < features.rows; ++i)
    if (argmax(model.logits(features.row(i))) == 0) keep.push_back(i);
  return keep;
}

namespace {
constexpr char kMagic[4] = {'E', 'P', 'S', 'C'};
}

std::string serialize_model(const ClassifierModel& m) {
  m.validate();
  std::string out(kMagic, 4);
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(m.architecture));
  put_u32(out, static_cast<std::uint32_t>(m.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(m.n_classes));
  put_u32(out, static_cast<std::uint32_t>(m.hidden_units));
  put_u64(out, m.rng_seed);
  const auto& c = m.train_config;
  put_f64(out, c.learning_rate);
  put_f64(out, c.weight_decay);
  put_f64(out, c.momentum);
  put_u32(out, static_cast<std::uint32_t>(c.batch_size));
  put_u32(out, static_cast<std::uint32_t>(c.epochs));
  out.push_back(static_cast<char>(c.augment ? 1 : 0));
  out.push_back(static_cast<char>(c.reduction));
  put_u64(out, c.seed);
  put_u64(out, m.params.size());
  for (double v : m.params) put_f32(out, static_cast<float>(v));
  return out;
}

ClassifierModel deserialize_model(std::string_view bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.take(4) != std::string_view(kMagic, 4)) fail(ErrorKind::Decode, "not an EPSC model file");
  const auto version = r.u32();
  if (version != kModelFormatVersion) fail(ErrorKind::Decode, "unsupported model format version " + std::to_string(version));
  ClassifierModel m;
  const auto arch = r.u32();
  if (arch > 1) fail(ErrorKind::Decode, "unknown architecture id " + std::to_string(arch));
  m.architecture = static_cast<Architecture>(arch);
  m.feature_dim = static_cast<int>(r.u32());
  m.n_classes = static_cast<int>(r.u32());
  m.hidden_units = static_cast<int>(r.u32());
  m.rng_seed = r.u64();
  auto& c = m.train_config;
  c.learning_rate = r.f64();
  c.weight_decay = r.f64();
  c.momentum = r.f64();
  c.batch_size = static_cast<int>(r.u32());
  c.epochs = static_cast<int>(r.u32());
  c.augment = r.u8() != 0;
  const auto reduction = r.u8();
  if (reduction > 1) fail(ErrorKind::Decode, "unknown loss reduction id");
  c.reduction = static_cast<LossReduction>(reduction);
  c.seed = r.u64();
  const auto count = r.u64();
  if (count > (bytes.size() / 4)) fail(ErrorKind::Decode, "parameter count exceeds file size");
  m.params.resize(count);
  for (double& v : m.params) v = r.f32();
  if (!r.at_end()) fail(ErrorKind::Decode, "trailing bytes after model parameters");
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Decode, e.what());
  }
  return m;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) { return deserialize_model(read_text_file(path)); }

EnsembleClassifier::EnsembleClassifier(std::vector<ClassifierModel> models, SiftParams sift)
    : models_(std::move(models)), sift_(sift) {
  if (models_.empty()) fail(ErrorKind::EmptyInput, "ensemble has no members");
  for (const auto& m : models_) {
    m.validate();
    if (m.n_classes != models_.front().n_classes) fail(ErrorKind::Mismatch, "ensemble members disagree on class count");
  }
}

int EnsembleClassifier::n_classes() const { return models_.front().n_classes; }

std::vector<double> EnsembleClassifier::classify(std::string_view, const PatchGeometry&,
                                                 const ImageBuffer& pixels) const {
  return classify_features(featurize(pixels, sift_));
}

std::vector<double> EnsembleClassifier::classify_features(std::span<const double> features) const {
  return ensemble_predict(models_, features);
}

ExternalLikelihoods ExternalLikelihoods::parse(std::istream& in) {
  ExternalLikelihoods out;
  std::string line;
  long line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (header) {
      if (f.size() < 6 || f[0] != "image_id" || f[1] != "x" || f[2] != "y" || f[3] != "side")
        fail(ErrorKind::MissingColumn, "likelihood file header must start with image_id,x,y,side,p_0,p_1");
      out.n_classes_ = static_cast<int>(f.size() - 4);
      header = false;
      continue;
    }
    if (static_cast<int>(f.size()) != out.n_classes_ + 4)
      fail(ErrorKind::Parse, "expected " + std::to_string(out.n_classes_ + 4) + " fields", line_no);
    Key key{f[0], static_cast<int>(parse_long(f[1], "x", line_no)), static_cast<int>(parse_long(f[2], "y", line_no)),
            static_cast<int>(parse_long(f[3], "side", line_no))};
    std::vector<double> p;
    double total = 0.0;
    for (std::size_t i = 4; i < f.size(); ++i) {
      p.push_back(parse_double(f[i], "likelihood", line_no));
      if (p.back() < 0.0) fail(ErrorKind::Parse, "negative likelihood", line_no);
      total += p.back();
    }
    if (std::abs(total - 1.0) > 1e-4) fail(ErrorKind::Parse, "likelihoods do not sum to 1", line_no);
    for (double& v : p) v /= total;
    out.table_[std::move(key)] = std::move(p);
  }
  if (header) fail(ErrorKind::MissingColumn, "likelihood file has no header");
  return out;
}

ExternalLikelihoods ExternalLikelihoods::load(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse(in);
}

bool ExternalLikelihoods::contains(std::string_view image_id, const PatchGeometry& g) const {
  return table_.count(Key{std::string(image_id), g.x, g.y, g.side}) != 0;
}

std::vector<double> ExternalLikelihoods::classify(std::string_view image_id, const PatchGeometry& g,
                                                  const ImageBuffer&) const {
  auto it = table_.find(Key{std::string(image_id), g.x, g.y, g.side});
  if (it == table_.end())
    fail(ErrorKind::Mismatch, "no external likelihoods for " + std::string(image_id) + " at (" + std::to_string(g.x) +
                                  "," + std::to_string(g.y) + ") side " + std::to_string(g.side));
  return it->second;
}

}  // namespace bage
