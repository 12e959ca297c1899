#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bage/classify.hpp"
#include "bage/data.hpp"
#include "bage/descriptors.hpp"
#include "bage/eval.hpp"
#include "bage/fusion.hpp"
#include "bage/imaging.hpp"
#include "bage/patches.hpp"
#include "bage/selection.hpp"

namespace py = pybind11;
using namespace bage;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

ImageBuffer to_image(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an (H, W, 3) uint8 array");
  ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::array_t<std::uint8_t> from_image(const ImageBuffer& img) {
  py::array_t<std::uint8_t> out({img.height, img.width, 3});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> from_labels(const LabelImage& img) {
  py::array_t<std::uint8_t> out({img.height, img.width});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

GrayImage to_gray(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected an (H, W) float array");
  GrayImage g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), g.data.begin());
  return g;
}

Matrix to_matrix(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d float array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

std::vector<double> to_vector(const F64Array& a) { return {a.data(), a.data() + a.size()}; }

py::array_t<double> from_vector(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

std::vector<std::vector<double>> to_rows(const F64Array& a) {
  const auto m = to_matrix(a);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m.rows; ++i) rows.emplace_back(m.row(i).begin(), m.row(i).end());
  return rows;
}

py::dict prediction_dict(const BuildingPrediction& p) {
  py::dict d;
  d["epoch"] = p.epoch;
  d["distribution"] = from_vector(p.distribution);
  d["n_patches_total"] = p.n_patches_total;
  d["n_patches_used"] = p.n_patches_used;
  d["low_confidence"] = p.low_confidence;
  return d;
}

FusionConfig fusion_config(Aggregation aggregation, double t_u, bool drop_ambiguous) {
  FusionConfig c{aggregation, t_u, drop_ambiguous};
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Building age estimation core";
  static py::exception<Error> error(m, "BageError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.attr("NUM_EPOCHS") = kNumEpochs;
  m.attr("FEATURE_DIM") = kFeatureDim;

  m.def("epoch_of_year", [](int yoc) { return epoch_of_year(yoc).index; }, py::arg("yoc"));
  m.def("epoch_name", [](int index) { return EpochLabel{index}.name(); }, py::arg("index"));

  m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"));
  m.def("save_png", [](const U8Array& a, const std::filesystem::path& p) { save_png(to_image(a), p); },
        py::arg("image"), py::arg("path"));
  m.def("to_grayscale", [](const U8Array& a) {
    const auto g = to_grayscale(to_image(a));
    py::array_t<double> out({g.height, g.width});
    std::copy(g.data.begin(), g.data.end(), out.mutable_data());
    return out;
  }, py::arg("image"));

  m.def("grid_stride", &grid_stride, py::arg("side"), py::arg("overlap") = kDefaultOverlap);
  m.def("sample_grid", [](int w, int h, const std::vector<int>& sides, double overlap) {
    std::vector<std::tuple<int, int, int>> out;
    for (const auto& g : sample_grid(w, h, sides, overlap)) out.emplace_back(g.x, g.y, g.side);
    return out;
  }, py::arg("width"), py::arg("height"), py::arg("sides") = kDefaultPatchSides, py::arg("overlap") = kDefaultOverlap);

  m.def("sift_descriptor", [](const F64Array& gray) { return from_vector(sift_descriptor(to_gray(gray)).values); },
        py::arg("gray"));
  m.def("contrast_score", [](const F64Array& d) { return contrast_score(SiftDescriptor{to_vector(d)}); },
        py::arg("descriptor"));
  m.def("normalize_descriptor",
        [](const F64Array& d, double clip) { return from_vector(normalize_descriptor(SiftDescriptor{to_vector(d)}, clip).values); },
        py::arg("descriptor"), py::arg("clip") = 0.2);
  m.def("featurize", [](const U8Array& patch) { return from_vector(featurize(to_image(patch))); }, py::arg("patch"));

  m.def("top_count", &top_count, py::arg("n"), py::arg("t_percent"));
  m.def("select_top_contrast", [](const F64Array& s, double t) { return select_top_contrast(to_vector(s), t); },
        py::arg("scores"), py::arg("t_percent"));
  m.def("kmeans", [](const F64Array& points, int k, std::uint64_t seed, int max_iter) {
    const auto r = kmeans(to_matrix(points), k, seed, max_iter);
    py::dict d;
    d["centroids"] = from_matrix(r.centroids);
    d["assignments"] = r.assignments;
    d["cost"] = r.cost;
    d["cost_per_iteration"] = r.cost_per_iteration;
    d["iterations"] = r.iterations;
    return d;
  }, py::arg("points"), py::arg("k"), py::arg("seed"), py::arg("max_iter") = 100);

  m.def("softmax", [](const F64Array& z) { return from_vector(softmax(to_vector(z))); }, py::arg("logits"));

  py::class_<ClassifierModel>(m, "Model")
      .def_property_readonly("n_classes", [](const ClassifierModel& c) { return c.n_classes; })
      .def_property_readonly("architecture", [](const ClassifierModel& c) { return to_string(c.architecture); })
      .def("predict", [](const ClassifierModel& c, const F64Array& f) { return from_vector(predict(c, to_vector(f))); },
           py::arg("features"));
  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));

  py::enum_<Aggregation>(m, "Aggregation")
      .value("MAJORITY_VOTE", Aggregation::MajorityVote)
      .value("MEAN_LIKELIHOOD", Aggregation::MeanLikelihood);
  m.def("is_ambiguous", [](const F64Array& d, double t_u) { return is_ambiguous(to_vector(d), t_u); },
        py::arg("distribution"), py::arg("t_u"));
  m.def("majority_vote", [](const F64Array& dists, double t_u, bool drop) {
    return prediction_dict(majority_vote(to_rows(dists), fusion_config(Aggregation::MajorityVote, t_u, drop)));
  }, py::arg("distributions"), py::arg("t_u") = 0.25, py::arg("drop_ambiguous") = true);
  m.def("mean_likelihood", [](const F64Array& dists, double t_u, bool drop) {
    return prediction_dict(mean_likelihood(to_rows(dists), fusion_config(Aggregation::MeanLikelihood, t_u, drop)));
  }, py::arg("distributions"), py::arg("t_u") = 0.25, py::arg("drop_ambiguous") = true);

  m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& t) { return accuracy(p, t); },
        py::arg("predictions"), py::arg("truths"));
  m.def("zero_rule_baseline", [](const std::vector<int>& t) { return zero_rule_baseline(t); }, py::arg("truths"));
  m.def("confusion_matrix", [](const std::vector<int>& p, const std::vector<int>& t, int n) {
    const auto cm = confusion_matrix(p, t, n);
    py::array_t<long> out({n, n});
    std::copy(cm.counts.begin(), cm.counts.end(), out.mutable_data());
    return out;
  }, py::arg("predictions"), py::arg("truths"), py::arg("n_classes") = kNumEpochs);

  m.def("synth_corpus", [](int n_per_class, int image_size, double clutter, int images_per_house, std::uint64_t seed) {
    const auto c = synth_corpus({n_per_class, image_size, clutter, images_per_house, seed});
    py::list images, masks, records;
    for (const auto& i : c.images) images.append(from_image(i));
    for (const auto& l : c.masks) masks.append(from_labels(l));
    for (const auto& r : c.records) {
      py::dict d;
      d["image_path"] = r.image_path;
      d["house_id"] = r.house_id;
      d["yoc"] = r.yoc;
      d["mask_path"] = r.mask_path;
      records.append(d);
    }
    py::dict out;
    out["images"] = images;
    out["masks"] = masks;
    out["records"] = records;
    return out;
  }, py::arg("n_per_class") = 100, py::arg("image_size") = 96, py::arg("clutter_fraction") = 0.2,
     py::arg("images_per_house") = 2, py::arg("seed") = 42);
}
