#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "altimine/frames.hpp"
#include "altimine/random.hpp"

namespace altimine {

struct RandomAltitudeShift {
    double min = -2.0;
    double max = 2.0;
};
struct ConstantAltitudeShift {
    double offset = 0.5;
};
struct RandomWorldTranslationZ {
    double std = 0.5;
};
/// Mirrors across the x-z plane (y -> -y, yaw -> -yaw).
struct RandomFlipX {
    double probability = 0.5;
};
struct GlobalScaling {
    double min = 0.95;
    double max = 1.05;
};

using AugmentStep =
    std::variant<RandomAltitudeShift, ConstantAltitudeShift, RandomWorldTranslationZ, RandomFlipX, GlobalScaling>;

std::string step_name(const AugmentStep& step);

struct AugmentSpec {
    std::vector<AugmentStep> steps;
    std::uint64_t seed = 0;

    void validate() const;

    static AugmentSpec from_json(const std::string& text);
    std::string to_json() const;

    /// Named step lists: none, ras-2, ras-0.5, cas-0.5, rwt-z-0.5, standard,
    /// standard+ras, standard+cas, standard+rwt-z.
    static AugmentSpec preset(const std::string& name, std::uint64_t seed = 0);
    static std::vector<std::string> preset_names();
};

struct AppliedStep {
    std::string step;
    /// Drawn or fixed parameters, e.g. {"offset", 0.37} or {"applied", 1}.
    std::vector<std::pair<std::string, double>> params;
};

struct AugmentedFrame {
    PointCloud pcd;
    std::vector<LabelRecord> labels;
    std::vector<AppliedStep> applied;
};

AugmentedFrame altitude_shift(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double offset);
AugmentedFrame random_altitude_shift(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double min,
                                     double max, Rng& rng);
AugmentedFrame random_world_translation_z(const PointCloud& pcd, const std::vector<LabelRecord>& labels,
                                          double std_dev, Rng& rng);
AugmentedFrame random_flip_x(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double p, Rng& rng);
AugmentedFrame global_scaling(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double smin,
                              double smax, Rng& rng);

// Deterministic forms of the random steps.
AugmentedFrame flip_x(const PointCloud& pcd, const std::vector<LabelRecord>& labels);
AugmentedFrame scale(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double s);

/// Applies the steps in order, drawing from frame_rng(spec.seed, frame_id).
AugmentedFrame apply_spec(const PointCloud& pcd, const std::vector<LabelRecord>& labels, const AugmentSpec& spec,
                          FrameId frame_id = 0);

struct AugmentSummary {
    std::size_t frames = 0;
    std::size_t labels = 0;
};

/// Augments every frame of `in_dir` (frames/ + labels/) into `out_dir`, keeping each
/// frame's cloud format, and writes augment_log.json with the drawn parameters.
AugmentSummary augment_dataset(const fs::path& in_dir, const fs::path& out_dir, const AugmentSpec& spec,
                               unsigned jobs = 1);

}  // namespace altimine
