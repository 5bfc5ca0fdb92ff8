#pragma once

#include <optional>
#include <string>
#include <vector>

#include "altimine/annotate.hpp"
#include "altimine/frames.hpp"
#include "altimine/random.hpp"

namespace altimine {

/// Where the sensor and the excavators stand relative to the bench.
enum class Scenario { SameLevel, SensorInPit, SensorOnBench };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

struct SceneConfig {
    Scenario scenario = Scenario::SameLevel;
    double bench_height_m = 11.0;
    int n_objects = 5;
    Vec3 object_dims{8.65, 23.9, 10.02};
    double area_half_extent_m = 175.2 / 2.0;
    std::uint64_t seed = 0;
    /// LiDAR origin above the ground it stands on.
    double sensor_mount_height_m = 5.0;
    double sensor_yaw_rad = 0.3;
    /// World x of the bench wall; x < wall is the sensor's level.
    double wall_offset_m = 30.0;
    /// Keep-out radius around the sensor for object footprints.
    double sensor_clearance_m = 5.0;
    bool with_ground = true;
    std::string class_name = "Excavator";

    void validate() const;
};

struct LidarConfig {
    int channels = 128;
    double vertical_fov_deg = 22.5;
    int points_per_rotation = 2048;
    /// Range error magnitude, drawn uniformly in [min, max] with random sign. max = 0 disables noise.
    double range_noise_min_m = 0.025;
    double range_noise_max_m = 0.08;
    double max_range_m = 200.0;

    void validate() const;
};

/// Two horizontal planes split at x = wall_x, joined by a vertical wall.
struct Terrain {
    double wall_x = 0.0;
    double near_z = 0.0;  // x < wall_x
    double far_z = 0.0;   // x >= wall_x

    bool has_wall() const { return near_z != far_z; }
};

struct Scene {
    std::optional<Terrain> terrain;
    std::vector<FrameRecord> frames;
    /// Exact sensor-frame labels per frame, in object order. generate_dataset runs finalize_truth on them.
    std::vector<std::vector<LabelRecord>> truth;
};

Scene generate_scene(const SceneConfig& cfg, std::size_t n_frames);

/// Surface ids reported by scan_with_ids.
inline constexpr int kNearGround = -1;
inline constexpr int kFarGround = -2;
inline constexpr int kWall = -3;

struct ScanResult {
    PointCloud cloud;
    /// Object index (>= 0) or one of the terrain ids, parallel to the cloud.
    std::vector<int> surface;
    /// Ray range before noise, parallel to the cloud.
    std::vector<double> true_range;
};

ScanResult scan_with_ids(const FrameRecord& frame, const std::optional<Terrain>& terrain, const LidarConfig& lidar,
                         Rng& rng);
PointCloud scan(const FrameRecord& frame, const std::optional<Terrain>& terrain, const LidarConfig& lidar, Rng& rng);

/// Counts truth-box points in `cloud`, drops boxes under rubric.min_points and grades the rest,
/// so the result is what annotation with the same rubric would emit.
void finalize_truth(std::vector<LabelRecord>& labels, const PointCloud& cloud, const AnnotateConfig& rubric);

/// Writes poses.json, frames/ and truth/ under `out_dir`.
Scene generate_dataset(const SceneConfig& scene_cfg, const LidarConfig& lidar_cfg, std::size_t n_frames,
                       const fs::path& out_dir, CloudFormat format = CloudFormat::XyzBin,
                       const AnnotateConfig& rubric = {}, unsigned jobs = 1);

}  // namespace altimine
