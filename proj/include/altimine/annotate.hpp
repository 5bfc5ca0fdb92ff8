#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "altimine/frames.hpp"

namespace altimine {

struct DetectionRange {
    double xy_half_extent = 175.2 / 2.0;
    double z_min = -12.0;
    double z_max = 4.0;

    bool contains(const Vec3& p) const {
        return std::abs(p.x()) <= xy_half_extent && std::abs(p.y()) <= xy_half_extent && p.z() >= z_min &&
               p.z() <= z_max;
    }
};

struct AnnotateConfig {
    int min_points = 100;
    double height_threshold_m = 10.0;
    int density_easy = 750;
    int density_floor = 100;
    /// Semantic CSV carries every point (class 0 for background) when set.
    bool emit_background = true;
    DetectionRange detection_range;
    /// Roll or pitch above this makes the yaw-only label lossy; a warning is recorded.
    double tilt_warning_rad = 0.02;

    void validate() const;
};

/// Result of the difficulty rubric. `Filtered` means too few points to grade.
enum class Difficulty { Easy = 0, Moderate = 1, Hard = 2, Filtered = -1 };

/// Rubric over sensor-to-object height difference and in-box point count.
/// Strict comparisons: h < threshold is "low", n > density_easy is "dense".
Difficulty classify_difficulty(double height_variation_m, std::size_t num_points, const AnnotateConfig& cfg);

/// |z| of the box center in the sensor frame; the sensor origin is the height reference.
double height_variation(const Pose& sensor_pose, const Box3D& object_box_sensor_frame);

/// Sensor-frame geometry of one object: yaw label box plus the full-rotation crop box.
struct ObjectBoxes {
    Box3D label_box;
    OrientedBoxFull crop_box;
    EulerAngles euler;
};

/// World pose (base position) -> center-lifted boxes in the sensor frame.
ObjectBoxes object_boxes_in_sensor(const ObjectInstance& obj, const Pose& sensor_pose);

struct FrameAnnotation {
    FrameId frame_id = 0;
    /// Emitted labels, in pose-log object order.
    std::vector<LabelRecord> labels;
    /// Object name for each entry of `labels`.
    std::vector<std::string> label_objects;
    std::map<std::string, PointCloud> crops;
    std::vector<int> per_point_class;
    std::size_t filtered = 0;
    std::vector<std::string> warnings;
};

FrameAnnotation annotate_frame(const FrameRecord& frame, const PointCloud& pcd, const AnnotateConfig& cfg,
                               const ClassRegistry& registry);

struct AnnotateSummary {
    std::size_t frames = 0;
    std::size_t labels = 0;
    std::size_t filtered = 0;
    std::vector<std::string> warnings;
};

/// Runs annotate_frame over `dataset_dir` (poses.json + frames/) and writes labels/,
/// semantic/ and gt_database/ under `out_dir` (defaults to the dataset dir).
/// Outputs are staged and moved into place only when every frame succeeds.
AnnotateSummary annotate_dataset(const fs::path& dataset_dir, const AnnotateConfig& cfg,
                                 const ClassRegistry& registry, std::optional<fs::path> out_dir = std::nullopt,
                                 unsigned jobs = 1);

}  // namespace altimine
