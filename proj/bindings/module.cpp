#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tsr/errors.hpp"
#include "tsr/eval.hpp"
#include "tsr/parallel.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/preprocess.hpp"
#include "tsr/shapeio.hpp"
#include "tsr/synthetic.hpp"

namespace py = pybind11;

namespace {

tsr::BinaryShape shape_from_array(const std::string& id,
                                  py::array_t<std::uint8_t, py::array::c_style> array,
                                  const std::string& label) {
    if (array.ndim() != 2) throw tsr::DimensionMismatch("expected a 2-D uint8 array");
    tsr::BinaryShape s;
    s.id = id;
    s.label = label;
    s.height = int(array.shape(0));
    s.width = int(array.shape(1));
    s.grid.resize(std::size_t(s.width) * s.height);
    auto view = array.unchecked<2>();
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
            s.grid[std::size_t(y) * s.width + x] = view(y, x) ? 1 : 0;
    return s;
}

py::array_t<std::uint8_t> shape_to_array(const tsr::BinaryShape& s) {
    py::array_t<std::uint8_t> out({s.height, s.width});
    auto view = out.mutable_unchecked<2>();
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) view(y, x) = s.grid[std::size_t(y) * s.width + x];
    return out;
}

py::array_t<std::uint8_t> normalized_to_array(const tsr::NormalizedShape& s) {
    py::array_t<std::uint8_t> out({s.size, s.size});
    auto view = out.mutable_unchecked<2>();
    for (int y = 0; y < s.size; ++y)
        for (int x = 0; x < s.size; ++x) view(y, x) = s.grid[std::size_t(y) * s.size + x];
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "two-stage silhouette retrieval core";

    py::register_exception<tsr::UsageError>(m, "TsrUsageError", PyExc_ValueError);
    py::register_exception<tsr::DataError>(m, "TsrDataError", PyExc_RuntimeError);

    py::class_<tsr::BinaryShape>(m, "Shape")
        .def(py::init(&shape_from_array), py::arg("id"), py::arg("array"), py::arg("label") = "")
        .def_readwrite("id", &tsr::BinaryShape::id)
        .def_readwrite("label", &tsr::BinaryShape::label)
        .def_property_readonly("width", [](const tsr::BinaryShape& s) { return s.width; })
        .def_property_readonly("height", [](const tsr::BinaryShape& s) { return s.height; })
        .def("to_array", &shape_to_array)
        .def("foreground_count", &tsr::BinaryShape::foreground_count)
        .def("__repr__", [](const tsr::BinaryShape& s) {
            return "<Shape '" + s.id + "' " + std::to_string(s.width) + "x" +
                   std::to_string(s.height) + ">";
        });

    py::class_<tsr::Gallery>(m, "Gallery")
        .def(py::init<>())
        .def_readwrite("shapes", &tsr::Gallery::shapes)
        .def_readwrite("source", &tsr::Gallery::source)
        .def("__len__", [](const tsr::Gallery& g) { return g.shapes.size(); });

    py::class_<tsr::BuildConfig>(m, "BuildConfig")
        .def(py::init<>())
        .def_readwrite("cluster_count", &tsr::BuildConfig::cluster_count)
        .def_readwrite("raster", &tsr::BuildConfig::raster)
        .def_readwrite("knn_count", &tsr::BuildConfig::knn_count)
        .def_readwrite("epsilon", &tsr::BuildConfig::epsilon)
        .def_readwrite("kernel_k", &tsr::BuildConfig::kernel_k)
        .def_readwrite("knn_w", &tsr::BuildConfig::knn_w)
        .def_readwrite("diffusion_iters", &tsr::BuildConfig::diffusion_iters)
        .def_readwrite("seed", &tsr::BuildConfig::seed)
        .def_readwrite("binarize_threshold", &tsr::BuildConfig::binarize_threshold);

    py::class_<tsr::RetrievalIndex>(m, "Index")
        .def_property_readonly("ids",
                               [](const tsr::RetrievalIndex& i) { return i.ids; })
        .def_property_readonly("labels",
                               [](const tsr::RetrievalIndex& i) { return i.labels; })
        .def_property_readonly("cluster_count",
                               [](const tsr::RetrievalIndex& i) { return i.config.cluster_count; })
        .def_property_readonly(
            "assignment", [](const tsr::RetrievalIndex& i) { return i.clusters.assignment; })
        .def("__len__", [](const tsr::RetrievalIndex& i) { return i.ids.size(); })
        .def("save", [](const tsr::RetrievalIndex& i, const std::filesystem::path& p) {
            tsr::save_index(i, p);
        });

    py::class_<tsr::QueryResult>(m, "QueryResult")
        .def_readonly("query_id", &tsr::QueryResult::query_id)
        .def_readonly("relevant_clusters", &tsr::QueryResult::relevant_clusters)
        .def_readonly("cluster_cost", &tsr::QueryResult::cluster_cost)
        .def_readonly("p_rf", &tsr::QueryResult::p_rf)
        .def_readonly("p_knn", &tsr::QueryResult::p_knn)
        .def_readonly("used_fallback", &tsr::QueryResult::used_fallback)
        .def_readonly("ranking", &tsr::QueryResult::ranking)
        .def_readonly("included_count", &tsr::QueryResult::included_count)
        .def_property_readonly("mode", [](const tsr::QueryResult& r) {
            return tsr::to_string(r.mode);
        });

    m.def("set_thread_count", &tsr::set_thread_count, py::arg("count"));
    m.def("load_shape", &tsr::load_shape, py::arg("path"), py::arg("threshold") = 128);
    m.def("save_pgm", &tsr::save_pgm, py::arg("shape"), py::arg("path"));
    m.def(
        "load_dataset",
        [](const std::filesystem::path& dir, bool strict, int threshold) {
            return tsr::load_dataset(dir, tsr::LabelRule::PrefixBeforeLastDash, strict, nullptr,
                                     threshold);
        },
        py::arg("dir"), py::arg("strict") = true, py::arg("threshold") = 128);

    m.def(
        "normalize",
        [](const tsr::BinaryShape& s, int raster) {
            return normalized_to_array(tsr::normalize(tsr::fill_holes(s), raster));
        },
        py::arg("shape"), py::arg("raster") = 256);

    m.def(
        "build_index",
        [](const tsr::Gallery& g, const tsr::BuildConfig& cfg, bool strict) {
            py::gil_scoped_release release;
            return tsr::build_index(g, cfg, strict);
        },
        py::arg("gallery"), py::arg("config"), py::arg("strict") = true);
    m.def("load_index", [](const std::filesystem::path& p) { return tsr::load_index(p); },
          py::arg("path"));
    m.def(
        "query",
        [](const tsr::RetrievalIndex& index, const tsr::BinaryShape& shape,
           const std::string& mode) {
            py::gil_scoped_release release;
            return tsr::query(index, shape, tsr::parse_query_mode(mode));
        },
        py::arg("index"), py::arg("shape"), py::arg("mode") = "tsr");

    m.def(
        "bulls_eye",
        [](const std::vector<std::pair<int, std::vector<int>>>& rankings,
           const std::vector<std::string>& labels, int class_size, bool include_self) {
            std::vector<tsr::Ranking> rs;
            for (const auto& [q, order] : rankings) rs.push_back({q, order});
            return tsr::bulls_eye(rs, labels, class_size, include_self);
        },
        py::arg("rankings"), py::arg("labels"), py::arg("class_size"),
        py::arg("include_self") = true);

    auto synth = m.def_submodule("synth", "deterministic synthetic silhouettes");
    synth.def("families", &tsr::synth::families);
    synth.def("make_instance", &tsr::synth::make_instance, py::arg("family"), py::arg("seed"),
              py::arg("canvas") = 256);
    synth.def(
        "write_dataset",
        [](const std::filesystem::path& dir, const std::string& layout, std::uint64_t seed) {
            tsr::synth::DatasetSpec spec =
                layout == "mpeg7" ? tsr::synth::mpeg7_like() : tsr::synth::kimia_like();
            tsr::synth::write_dataset(dir, spec, seed);
        },
        py::arg("dir"), py::arg("layout") = "kimia", py::arg("seed") = 0);
}
