#include "altimine/simgen.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "altimine/errors.hpp"

namespace altimine {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::SameLevel: return "same-level";
        case Scenario::SensorInPit: return "sensor-in-pit";
        case Scenario::SensorOnBench: return "sensor-on-bench";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (auto s : {Scenario::SameLevel, Scenario::SensorInPit, Scenario::SensorOnBench})
        if (scenario_name(s) == name) return s;
    throw ValidationError("unknown scenario '" + name + "' (same-level, sensor-in-pit, sensor-on-bench)");
}

void SceneConfig::validate() const {
    if (!(bench_height_m > 0.0)) throw ValidationError("bench_height_m must be > 0");
    if (n_objects < 0) throw ValidationError("n_objects must be >= 0");
    if ((object_dims.array() <= 0.0).any() || !object_dims.allFinite()) {
        throw ValidationError("object_dims must be positive");
    }
    if (!(area_half_extent_m > 0.0)) throw ValidationError("area_half_extent_m must be > 0");
    if (!(std::abs(wall_offset_m) < area_half_extent_m)) {
        throw ValidationError("wall_offset_m must lie inside the scene area");
    }
    if (!(sensor_mount_height_m >= 0.0)) throw ValidationError("sensor_mount_height_m must be >= 0");
    if (!(sensor_clearance_m >= 0.0)) throw ValidationError("sensor_clearance_m must be >= 0");
}

void LidarConfig::validate() const {
    if (channels < 1) throw ValidationError("channels must be >= 1");
    if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0)) throw ValidationError("vertical_fov_deg must lie in (0, 180)");
    if (points_per_rotation < 1) throw ValidationError("points_per_rotation must be >= 1");
    if (!(range_noise_min_m >= 0.0 && range_noise_min_m <= range_noise_max_m)) {
        throw ValidationError("range noise needs 0 <= min <= max");
    }
    if (!(max_range_m > 0.0)) throw ValidationError("max_range_m must be > 0");
}

// ---------------------------------------------------------------------------
// Scene layout

namespace {

struct Region {
    double x_lo, x_hi, base_z;
};

bool footprint_inside(const Box3D& b, const Region& r, double half_extent) {
    for (const auto& c : bev_corners(b)) {
        if (c.x() < r.x_lo || c.x() > r.x_hi || std::abs(c.y()) > half_extent) return false;
    }
    return true;
}

}  // namespace

Scene generate_scene(const SceneConfig& cfg, std::size_t n_frames) {
    cfg.validate();
    const double A = cfg.area_half_extent_m;
    const double H = cfg.bench_height_m;
    const double W = cfg.wall_offset_m;

    double sensor_ground = 0.0;
    Scene scene;
    std::vector<Region> regions;
    switch (cfg.scenario) {
        case Scenario::SameLevel:
            if (cfg.with_ground) scene.terrain = Terrain{W, 0.0, 0.0};
            regions = {{-A, A, 0.0}};
            break;
        case Scenario::SensorInPit:
            if (cfg.with_ground) scene.terrain = Terrain{W, 0.0, H};
            regions = {{-A, W, 0.0}, {W, A, H}};
            break;
        case Scenario::SensorOnBench:
            sensor_ground = H;
            if (cfg.with_ground) scene.terrain = Terrain{W, H, 0.0};
            regions = {{W, A, 0.0}};
            break;
    }

    const Vec3 sensor_pos(0.0, 0.0, sensor_ground + cfg.sensor_mount_height_m);
    const double sensor_yaw = normalize_angle(cfg.sensor_yaw_rad);
    const double cs = std::cos(sensor_yaw), sn = std::sin(sensor_yaw);
    const double half_diag = 0.5 * std::hypot(cfg.object_dims.x(), cfg.object_dims.y());

    for (std::size_t fi = 0; fi < n_frames; ++fi) {
        FrameRecord frame;
        frame.frame_id = fi;
        frame.sensor_pose = {sensor_pos, Quaternion::from_yaw(sensor_yaw)};
        Rng rng = frame_rng(cfg.seed, fi);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<Box3D> placed;
        std::vector<LabelRecord> truth;

        for (int oi = 0; oi < cfg.n_objects; ++oi) {
            bool ok = false;
            for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
                const Region& r = regions[static_cast<std::size_t>(unit(rng) * static_cast<double>(regions.size())) %
                                          regions.size()];
                const double x = r.x_lo + unit(rng) * (r.x_hi - r.x_lo);
                const double y = -A + unit(rng) * 2.0 * A;
                // 1 - u lies in (0, 1], so the heading covers (-pi, pi].
                const double yaw = -kPi + (1.0 - unit(rng)) * 2.0 * kPi;
                const Box3D footprint({x, y, r.base_z + cfg.object_dims.z() / 2.0}, cfg.object_dims, yaw);
                if (!footprint_inside(footprint, r, A)) continue;
                if (std::hypot(x - sensor_pos.x(), y - sensor_pos.y()) < half_diag + cfg.sensor_clearance_m) continue;
                bool overlaps = false;
                for (const auto& other : placed) {
                    if (bev_intersection_area(footprint, other) > 0.0) {
                        overlaps = true;
                        break;
                    }
                }
                if (overlaps) continue;
                ok = true;
                placed.push_back(footprint);

                ObjectInstance obj;
                obj.name = "exc_" + std::to_string(oi);
                obj.class_name = cfg.class_name;
                obj.size = cfg.object_dims;
                obj.pose = {{x, y, r.base_z}, Quaternion::from_yaw(yaw)};
                frame.objects.push_back(obj);

                // Planar rotation by -sensor_yaw; the sensor stays level in every scenario.
                const double dx = x - sensor_pos.x(), dy = y - sensor_pos.y();
                LabelRecord label;
                label.box = Box3D({cs * dx + sn * dy, -sn * dx + cs * dy,
                                   r.base_z + cfg.object_dims.z() / 2.0 - sensor_pos.z()},
                                  cfg.object_dims, yaw - sensor_yaw);
                label.class_name = cfg.class_name;
                truth.push_back(label);
            }
            if (!ok) {
                throw ValidationError("frame " + std::to_string(fi) + ": could not place object " +
                                      std::to_string(oi) + " after 1000 attempts; try a smaller n_objects");
            }
        }
        scene.frames.push_back(std::move(frame));
        scene.truth.push_back(std::move(truth));
    }
    return scene;
}

// ---------------------------------------------------------------------------
// Ray casting

namespace {

constexpr double kMinHit = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct CastBox {
    Vec3 center;
    Vec3 half;
    Mat3 rt;  // world -> box
};

double slab_hit(const CastBox& b, const Vec3& origin, const Vec3& dir) {
    const Vec3 o = b.rt * (origin - b.center);
    const Vec3 d = b.rt * dir;
    double t_enter = -kInf, t_exit = kInf;
    for (int i = 0; i < 3; ++i) {
        if (d[i] == 0.0) {
            if (std::abs(o[i]) > b.half[i]) return kInf;
            continue;
        }
        double t1 = (-b.half[i] - o[i]) / d[i];
        double t2 = (b.half[i] - o[i]) / d[i];
        if (t1 > t2) std::swap(t1, t2);
        t_enter = std::max(t_enter, t1);
        t_exit = std::min(t_exit, t2);
    }
    if (t_enter > t_exit || t_enter < kMinHit) return kInf;
    return t_enter;
}

void terrain_hit(const Terrain& t, const Vec3& o, const Vec3& d, double& best, int& id) {
    auto plane = [&](double z, bool near_side, int sid) {
        if (d.z() == 0.0) return;
        const double s = (z - o.z()) / d.z();
        if (s < kMinHit || s >= best) return;
        const double x = o.x() + s * d.x();
        if (t.has_wall() && (near_side ? x >= t.wall_x : x < t.wall_x)) return;
        best = s;
        id = sid;
    };
    plane(t.near_z, true, kNearGround);
    if (!t.has_wall()) return;
    plane(t.far_z, false, kFarGround);
    if (d.x() != 0.0) {
        const double s = (t.wall_x - o.x()) / d.x();
        if (s >= kMinHit && s < best) {
            const double z = o.z() + s * d.z();
            if (z >= std::min(t.near_z, t.far_z) && z <= std::max(t.near_z, t.far_z)) {
                best = s;
                id = kWall;
            }
        }
    }
}

}  // namespace

ScanResult scan_with_ids(const FrameRecord& frame, const std::optional<Terrain>& terrain, const LidarConfig& lidar,
                         Rng& rng) {
    lidar.validate();
    std::vector<CastBox> boxes;
    for (const auto& obj : frame.objects) {
        Vec3 c = obj.pose.position;
        const Mat3 r = rotation_matrix(obj.pose.orientation);
        c += r * Vec3(0.0, 0.0, obj.size.z() / 2.0);
        boxes.push_back({c, obj.size / 2.0, r.transpose()});
    }
    const Vec3 origin = frame.sensor_pose.position;
    const Mat3 sensor_r = rotation_matrix(frame.sensor_pose.orientation);
    const bool noisy = lidar.range_noise_max_m > 0.0;
    std::uniform_real_distribution<double> magnitude(lidar.range_noise_min_m, lidar.range_noise_max_m);
    std::bernoulli_distribution sign(0.5);

    const double fov = lidar.vertical_fov_deg * kPi / 180.0;
    ScanResult out;
    for (int row = 0; row < lidar.channels; ++row) {
        const double elev =
            lidar.channels == 1 ? 0.0 : -fov / 2.0 + fov * static_cast<double>(row) / (lidar.channels - 1);
        for (int col = 0; col < lidar.points_per_rotation; ++col) {
            const double az = 2.0 * kPi * static_cast<double>(col) / lidar.points_per_rotation;
            const Vec3 dir_s(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
            const Vec3 dir_w = sensor_r * dir_s;
            double best = lidar.max_range_m;
            int id = std::numeric_limits<int>::min();
            for (std::size_t b = 0; b < boxes.size(); ++b) {
                const double t = slab_hit(boxes[b], origin, dir_w);
                if (t <= best) {
                    best = t;
                    id = static_cast<int>(b);
                }
            }
            if (terrain) terrain_hit(*terrain, origin, dir_w, best, id);
            if (id == std::numeric_limits<int>::min()) continue;
            double range = best;
            if (noisy) range += (sign(rng) ? 1.0 : -1.0) * magnitude(rng);
            out.cloud.points.push_back(range * dir_s);
            out.surface.push_back(id);
            out.true_range.push_back(best);
        }
    }
    return out;
}

PointCloud scan(const FrameRecord& frame, const std::optional<Terrain>& terrain, const LidarConfig& lidar, Rng& rng) {
    return scan_with_ids(frame, terrain, lidar, rng).cloud;
}

void finalize_truth(std::vector<LabelRecord>& labels, const PointCloud& cloud, const AnnotateConfig& rubric) {
    std::vector<LabelRecord> kept;
    for (auto& l : labels) {
        const std::size_t n = crop_indices(cloud, OrientedBoxFull::from_box(l.box)).size();
        if (n < static_cast<std::size_t>(rubric.min_points)) continue;
        const Difficulty d = classify_difficulty(std::abs(l.box.center.z()), n, rubric);
        l.num_points = n;
        l.difficulty = d == Difficulty::Filtered ? static_cast<int>(Difficulty::Hard) : static_cast<int>(d);
        kept.push_back(std::move(l));
    }
    labels = std::move(kept);
}

Scene generate_dataset(const SceneConfig& scene_cfg, const LidarConfig& lidar_cfg, std::size_t n_frames,
                       const fs::path& out_dir, CloudFormat format, const AnnotateConfig& rubric, unsigned jobs) {
    lidar_cfg.validate();
    Scene scene = generate_scene(scene_cfg, n_frames);
    const DatasetLayout out{out_dir};
    fs::create_directories(out.frames_dir());
    fs::create_directories(out.truth_dir());
    write_pose_log(out.poses(), scene.frames);

    std::vector<std::exception_ptr> errors(n_frames);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_frames; i = next++) {
            try {
                const auto& frame = scene.frames[i];
                Rng rng = frame_rng(scene_cfg.seed ^ 0x5CA11ED5EEDULL, frame.frame_id);
                PointCloud cloud = scan(frame, scene.terrain, lidar_cfg, rng);
                if (format == CloudFormat::XyzBin) cloud = quantize_to_float(cloud);
                write_point_cloud(out.frame_file(frame.frame_id, format), cloud, format);
                finalize_truth(scene.truth[i], cloud, rubric);
                write_label_file(out.truth_file(frame.frame_id), scene.truth[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_frames)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return scene;
}

}  // namespace altimine
