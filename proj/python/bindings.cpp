#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "altimine/annotate.hpp"
#include "altimine/augment.hpp"
#include "altimine/cli.hpp"
#include "altimine/errors.hpp"
#include "altimine/eval.hpp"
#include "altimine/simgen.hpp"

namespace py = pybind11;
using namespace altimine;

namespace {

using PointsArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const PointsArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3) throw std::invalid_argument("points must have shape (N, 3)");
    auto a = arr.unchecked<2>();
    PointCloud pcd;
    pcd.points.reserve(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) pcd.points.emplace_back(a(i, 0), a(i, 1), a(i, 2));
    return pcd;
}

py::array_t<double> from_cloud(const PointCloud& pcd) {
    py::array_t<double> out({static_cast<py::ssize_t>(pcd.size()), py::ssize_t{3}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pcd.size(); ++i)
        for (int k = 0; k < 3; ++k) a(static_cast<py::ssize_t>(i), k) = pcd.points[i][k];
    return out;
}

// Boxes travel as (M, 7) arrays: x y z dx dy dz yaw.
std::vector<LabelRecord> to_labels(const PointsArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 7) throw std::invalid_argument("boxes must have shape (M, 7)");
    auto a = arr.unchecked<2>();
    std::vector<LabelRecord> out;
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        LabelRecord l;
        l.box = Box3D({a(i, 0), a(i, 1), a(i, 2)}, {a(i, 3), a(i, 4), a(i, 5)}, a(i, 6));
        l.class_name = "Excavator";
        out.push_back(l);
    }
    return out;
}

py::array_t<double> from_labels(const std::vector<LabelRecord>& labels) {
    py::array_t<double> out({static_cast<py::ssize_t>(labels.size()), py::ssize_t{7}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& b = labels[i].box;
        const double v[7] = {b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(), b.size.z(), b.yaw};
        for (int k = 0; k < 7; ++k) a(static_cast<py::ssize_t>(i), k) = v[k];
    }
    return out;
}

py::object json_loads(const std::string& s) { return py::module_::import("json").attr("loads")(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of the altimine dataset toolkit";

    static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    static py::exception<IoError> io_error(m, "IoError", PyExc_OSError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const IoError& e) {
            py::set_error(io_error, e.what());
        }
    });

    py::class_<Box3D>(m, "Box3D")
        .def(py::init([](const Vec3& c, const Vec3& s, double yaw) { return Box3D(c, s, yaw); }), py::arg("center"),
             py::arg("size"), py::arg("yaw") = 0.0)
        .def_readonly("center", &Box3D::center)
        .def_readonly("size", &Box3D::size)
        .def_readonly("yaw", &Box3D::yaw)
        .def("__repr__", [](const Box3D& b) {
            std::ostringstream s;
            s << "Box3D(center=[" << b.center.transpose() << "], size=[" << b.size.transpose() << "], yaw=" << b.yaw
              << ")";
            return s.str();
        });

    m.def("bev_iou", &bev_iou, py::arg("a"), py::arg("b"));
    m.def("iou_3d", &iou_3d, py::arg("a"), py::arg("b"));

    m.def(
        "quaternion_to_euler",
        [](double w, double x, double y, double z) {
            const auto e = quaternion_to_euler(Quaternion(w, x, y, z));
            return py::make_tuple(e.roll, e.pitch, e.yaw);
        },
        py::arg("w"), py::arg("qx"), py::arg("qy"), py::arg("qz"), "Intrinsic Z-Y-X angles (roll, pitch, yaw).");
    m.def(
        "rotation_matrix", [](double w, double x, double y, double z) { return rotation_matrix(Quaternion(w, x, y, z)); },
        py::arg("w"), py::arg("qx"), py::arg("qy"), py::arg("qz"));

    m.def(
        "point_in_box",
        [](const Vec3& p, const Vec3& center, const Vec3& size, const Mat3& rotation) {
            return point_in_box(p, OrientedBoxFull(center, size, rotation));
        },
        py::arg("point"), py::arg("center"), py::arg("size"), py::arg("rotation"));
    m.def(
        "crop",
        [](const PointsArray& points, const Vec3& center, const Vec3& size, const Mat3& rotation) {
            return from_cloud(crop(to_cloud(points), OrientedBoxFull(center, size, rotation)));
        },
        py::arg("points"), py::arg("center"), py::arg("size"), py::arg("rotation"));

    m.def(
        "classify_difficulty",
        [](double h, std::size_t n, double height_threshold_m, int density_easy, int density_floor) {
            AnnotateConfig cfg;
            cfg.height_threshold_m = height_threshold_m;
            cfg.density_easy = density_easy;
            cfg.density_floor = density_floor;
            cfg.validate();
            return static_cast<int>(classify_difficulty(h, n, cfg));
        },
        py::arg("height_variation_m"), py::arg("num_points"), py::arg("height_threshold_m") = 10.0,
        py::arg("density_easy") = 750, py::arg("density_floor") = 100,
        "0 easy, 1 moderate, 2 hard, -1 filtered.");

    m.def(
        "altitude_shift",
        [](const PointsArray& points, const PointsArray& boxes, double offset) {
            const auto f = altitude_shift(to_cloud(points), to_labels(boxes), offset);
            return py::make_tuple(from_cloud(f.pcd), from_labels(f.labels));
        },
        py::arg("points"), py::arg("boxes"), py::arg("offset"));
    m.def(
        "apply_spec",
        [](const PointsArray& points, const PointsArray& boxes, const std::string& spec_json, FrameId frame_id) {
            const auto spec = AugmentSpec::from_json(spec_json);
            const auto f = apply_spec(to_cloud(points), to_labels(boxes), spec, frame_id);
            py::list applied;
            for (const auto& a : f.applied) {
                py::dict params;
                for (const auto& [k, v] : a.params) params[py::str(k)] = v;
                applied.append(py::make_tuple(a.step, params));
            }
            return py::make_tuple(from_cloud(f.pcd), from_labels(f.labels), applied);
        },
        py::arg("points"), py::arg("boxes"), py::arg("spec_json"), py::arg("frame_id") = 0);

    m.def(
        "ap_r40",
        [](const std::vector<double>& scores, const std::vector<bool>& true_positive, std::size_t total_gt,
           int recall_positions) {
            if (scores.size() != true_positive.size()) throw std::invalid_argument("scores and flags differ in length");
            std::vector<ScoredDetection> stream;
            for (std::size_t i = 0; i < scores.size(); ++i) stream.push_back({scores[i], true_positive[i]});
            return ap_r40(stream, total_gt, recall_positions);
        },
        py::arg("scores"), py::arg("true_positive"), py::arg("total_gt"), py::arg("recall_positions") = 40);

    m.def(
        "generate_dataset",
        [](const fs::path& out_dir, const std::string& scenario, std::size_t frames, int objects, std::uint64_t seed,
           bool noise, int points_per_rotation, int channels, const std::string& format) {
            SceneConfig sc;
            sc.scenario = parse_scenario(scenario);
            sc.n_objects = objects;
            sc.seed = seed;
            LidarConfig lc;
            lc.points_per_rotation = points_per_rotation;
            lc.channels = channels;
            if (!noise) lc.range_noise_min_m = lc.range_noise_max_m = 0.0;
            const auto fmt = format == "ply" ? CloudFormat::Ply : CloudFormat::XyzBin;
            Scene scene;
            {
                py::gil_scoped_release release;
                scene = generate_dataset(sc, lc, frames, out_dir, fmt);
            }
            py::list truth;
            for (const auto& t : scene.truth) {
                py::list frame;
                for (const auto& l : t) frame.append(py::make_tuple(l.difficulty, l.num_points.value_or(0)));
                truth.append(frame);
            }
            return truth;
        },
        py::arg("out_dir"), py::arg("scenario") = "same-level", py::arg("frames") = 10, py::arg("objects") = 5,
        py::arg("seed") = 0, py::arg("noise") = true, py::arg("points_per_rotation") = 2048,
        py::arg("channels") = 128, py::arg("format") = "bin",
        "Writes a synthetic dataset; returns per-frame lists of (difficulty, num_points).");

    m.def(
        "annotate_dataset",
        [](const fs::path& dataset_dir, int min_points, std::optional<fs::path> out_dir, unsigned jobs) {
            AnnotateConfig cfg;
            cfg.min_points = min_points;
            AnnotateSummary s;
            {
                py::gil_scoped_release release;
                s = annotate_dataset(dataset_dir, cfg, ClassRegistry::default_registry(), out_dir, jobs);
            }
            py::dict d;
            d["frames"] = s.frames;
            d["labels"] = s.labels;
            d["filtered"] = s.filtered;
            d["warnings"] = s.warnings;
            return d;
        },
        py::arg("dataset_dir"), py::arg("min_points") = 100, py::arg("out_dir") = py::none(), py::arg("jobs") = 1);

    m.def(
        "evaluate",
        [](const fs::path& gt_dir, const fs::path& det_dir, double iou_threshold, int min_points, bool nested,
           std::optional<fs::path> points_dir) {
            EvalConfig cfg;
            cfg.iou_threshold = iou_threshold;
            cfg.min_points = min_points;
            cfg.nested = nested;
            return json_loads(evaluate(gt_dir, det_dir, cfg, points_dir).to_json());
        },
        py::arg("gt_dir"), py::arg("det_dir"), py::arg("iou_threshold") = 0.7, py::arg("min_points") = 100,
        py::arg("nested") = true, py::arg("points_dir") = py::none(),
        "Returns the JSON report as a dict: {'BEV': {'0': ap, ...}, '3D': {...}, 'counts': ...}.");

    m.def(
        "read_label_file",
        [](const fs::path& path) {
            py::list out;
            for (const auto& l : read_label_file(path)) {
                const auto& b = l.box;
                out.append(py::make_tuple(b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(),
                                          b.size.z(), b.yaw, l.class_name, l.difficulty));
            }
            return out;
        },
        py::arg("path"));
    m.def(
        "read_point_cloud", [](const fs::path& path) { return from_cloud(read_point_cloud(path)); }, py::arg("path"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
