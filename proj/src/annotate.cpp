#include "altimine/annotate.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "altimine/errors.hpp"

namespace altimine {

void AnnotateConfig::validate() const {
    if (min_points < 0) throw ValidationError("min_points must be >= 0");
    if (density_floor < 0 || density_floor > density_easy) {
        throw ValidationError("density_floor must satisfy 0 <= density_floor <= density_easy");
    }
    if (!(height_threshold_m >= 0.0)) throw ValidationError("height_threshold_m must be >= 0");
    if (!(detection_range.z_min < detection_range.z_max)) throw ValidationError("detection range needs z_min < z_max");
    if (!(detection_range.xy_half_extent > 0.0)) throw ValidationError("detection range half extent must be > 0");
}

Difficulty classify_difficulty(double height_variation_m, std::size_t num_points, const AnnotateConfig& cfg) {
    if (num_points < static_cast<std::size_t>(cfg.density_floor)) return Difficulty::Filtered;
    const bool low = height_variation_m < cfg.height_threshold_m;
    const bool dense = num_points > static_cast<std::size_t>(cfg.density_easy);
    if (low && dense) return Difficulty::Easy;
    if (low || dense) return Difficulty::Moderate;
    return Difficulty::Hard;
}

double height_variation(const Pose& /*sensor_pose*/, const Box3D& box) {
    // Boxes are already sensor-relative, so the sensor sits at z = 0.
    return std::abs(box.center.z());
}

ObjectBoxes object_boxes_in_sensor(const ObjectInstance& obj, const Pose& sensor_pose) {
    Pose lifted = obj.pose;
    lifted.position.z() += obj.size.z() / 2.0;
    const Pose rel = transform_to_frame(lifted, sensor_pose);
    const EulerAngles e = quaternion_to_euler(rel.orientation);
    return {Box3D(rel.position, obj.size, e.yaw),
            OrientedBoxFull(rel.position, obj.size, rotation_matrix(rel.orientation)), e};
}

FrameAnnotation annotate_frame(const FrameRecord& frame, const PointCloud& pcd, const AnnotateConfig& cfg,
                               const ClassRegistry& registry) {
    cfg.validate();
    pcd.validate();
    FrameAnnotation out;
    out.frame_id = frame.frame_id;
    out.per_point_class.assign(pcd.size(), kBackgroundClass);
    const std::string prefix = "frame " + frame_stem(frame.frame_id) + ": ";

    for (const auto& obj : frame.objects) {
        const ClassEntry* cls = registry.find(obj.class_name);
        if (!cls) {
            throw ValidationError(prefix + "object '" + obj.name + "' has class '" + obj.class_name +
                                  "' which is not in the class registry");
        }
        const ObjectBoxes boxes = object_boxes_in_sensor(obj, frame.sensor_pose);
        if (std::abs(boxes.euler.roll) > cfg.tilt_warning_rad || std::abs(boxes.euler.pitch) > cfg.tilt_warning_rad) {
            out.warnings.push_back(prefix + "object '" + obj.name + "' is tilted (roll " +
                                   format_double(boxes.euler.roll) + ", pitch " + format_double(boxes.euler.pitch) +
                                   "); its yaw-only label is lossy");
        }
        if (!cfg.detection_range.contains(boxes.label_box.center)) {
            out.warnings.push_back(prefix + "object '" + obj.name + "' center lies outside the detection range");
        }

        const auto idx = crop_indices(pcd, boxes.crop_box);
        const double h = height_variation(frame.sensor_pose, boxes.label_box);
        const Difficulty d = classify_difficulty(h, idx.size(), cfg);
        if (idx.size() < static_cast<std::size_t>(cfg.min_points)) {
            ++out.filtered;
            continue;
        }

        LabelRecord label;
        label.box = boxes.label_box;
        label.class_name = obj.class_name;
        // Kept below the density floor only when min_points allows it; graded as the hardest tier.
        label.difficulty = d == Difficulty::Filtered ? static_cast<int>(Difficulty::Hard) : static_cast<int>(d);
        label.num_points = idx.size();
        out.labels.push_back(label);
        out.label_objects.push_back(obj.name);

        PointCloud crop;
        crop.points.reserve(idx.size());
        if (pcd.colors) crop.colors.emplace().reserve(idx.size());
        std::size_t overlapped = 0;
        for (auto i : idx) {
            crop.points.push_back(pcd.points[i]);
            if (pcd.colors) crop.colors->push_back((*pcd.colors)[i]);
            if (out.per_point_class[i] != kBackgroundClass) ++overlapped;
            out.per_point_class[i] = cls->id;
        }
        if (overlapped > 0) {
            out.warnings.push_back(prefix + "object '" + obj.name + "' overlaps an earlier object on " +
                                   std::to_string(overlapped) + " points; later object wins");
        }
        out.crops.emplace(obj.name, std::move(crop));
    }
    return out;
}

namespace {

struct FrameResult {
    std::size_t labels = 0;
    std::size_t filtered = 0;
    std::vector<std::string> warnings;
};

void replace_dir(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::remove_all(to, ec);
    if (ec) throw IoError(to.string() + ": " + ec.message());
    fs::rename(from, to, ec);
    if (ec) throw IoError(to.string() + ": " + ec.message());
}

}  // namespace

AnnotateSummary annotate_dataset(const fs::path& dataset_dir, const AnnotateConfig& cfg,
                                 const ClassRegistry& registry, std::optional<fs::path> out_dir, unsigned jobs) {
    cfg.validate();
    const DatasetLayout in{dataset_dir};
    const fs::path out_root = out_dir.value_or(dataset_dir);
    const auto frames = read_pose_log(in.poses());

    std::vector<fs::path> cloud_files;
    cloud_files.reserve(frames.size());
    for (const auto& f : frames) {
        auto p = in.find_frame_file(f.frame_id);
        if (!p) {
            throw IoError(in.frames_dir().string() + ": no point cloud for frame_id " + std::to_string(f.frame_id) +
                          " (expected " + frame_stem(f.frame_id) + ".bin or .ply)");
        }
        cloud_files.push_back(*p);
    }

    const fs::path staging = out_root / ".annotate_staging";
    std::error_code ec;
    fs::remove_all(staging, ec);
    const DatasetLayout stage{staging};
    for (const auto& d : {stage.labels_dir(), stage.semantic_dir(), stage.gt_database_dir()}) {
        fs::create_directories(d, ec);
        if (ec) throw IoError(d.string() + ": " + ec.message());
    }

    std::vector<FrameResult> results(frames.size());
    std::vector<std::exception_ptr> errors(frames.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < frames.size(); i = next++) {
            try {
                const auto& f = frames[i];
                const PointCloud pcd = read_point_cloud(cloud_files[i]);
                FrameAnnotation ann = annotate_frame(f, pcd, cfg, registry);
                write_label_file(stage.label_file(f.frame_id), ann.labels);
                write_semantic_csv(stage.semantic_file(f.frame_id), pcd, ann.per_point_class, registry,
                                   cfg.emit_background);
                for (const auto& [name, crop] : ann.crops) write_gt_database(staging, f.frame_id, name, crop);
                results[i] = {ann.labels.size(), ann.filtered, std::move(ann.warnings)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(frames.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }

    for (const auto& e : errors) {
        if (e) {
            fs::remove_all(staging, ec);
            std::rethrow_exception(e);
        }
    }

    const DatasetLayout out{out_root};
    try {
        replace_dir(stage.labels_dir(), out.labels_dir());
        replace_dir(stage.semantic_dir(), out.semantic_dir());
        replace_dir(stage.gt_database_dir(), out.gt_database_dir());
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
    fs::remove_all(staging, ec);

    AnnotateSummary summary;
    summary.frames = frames.size();
    for (auto& r : results) {
        summary.labels += r.labels;
        summary.filtered += r.filtered;
        for (auto& w : r.warnings) summary.warnings.push_back(std::move(w));
    }
    return summary;
}

}  // namespace altimine
