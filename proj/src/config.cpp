#include "altimine/config.hpp"

#include <set>

#include <json.hpp>

#include "altimine/errors.hpp"

namespace altimine {

using nlohmann::json;

namespace {

json parse(const std::string& text, const std::string& what) {
    try {
        json j = json::parse(text);
        if (!j.is_object()) throw ValidationError(what + " config must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ValidationError(what + " config: " + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& what) {
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ValidationError(what + " config: unknown field '" + k + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& field, const std::string& what) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(what + " config: field '" + key + "' has the wrong type");
    }
}

void read_vec3(const json& j, const char* key, Vec3& field, const std::string& what) {
    if (!j.contains(key)) return;
    std::vector<double> v;
    read(j, key, v, what);
    if (v.size() != 3) throw ValidationError(what + " config: field '" + key + "' needs 3 numbers");
    field = {v[0], v[1], v[2]};
}

}  // namespace

GenSceneFileConfig gen_scene_config_from_json(const std::string& text) {
    const json j = parse(text, "gen-scene");
    reject_unknown(j, {"scene", "lidar", "format"}, "gen-scene");
    GenSceneFileConfig cfg;
    if (j.contains("scene")) {
        const auto& s = j.at("scene");
        const std::string w = "gen-scene scene";
        reject_unknown(s,
                       {"scenario", "bench_height_m", "n_objects", "object_dims", "area_half_extent_m", "seed",
                        "sensor_mount_height_m", "sensor_yaw_rad", "wall_offset_m", "sensor_clearance_m",
                        "with_ground", "class_name"},
                       w);
        std::string scenario = scenario_name(cfg.scene.scenario);
        read(s, "scenario", scenario, w);
        cfg.scene.scenario = parse_scenario(scenario);
        read(s, "bench_height_m", cfg.scene.bench_height_m, w);
        read(s, "n_objects", cfg.scene.n_objects, w);
        read_vec3(s, "object_dims", cfg.scene.object_dims, w);
        read(s, "area_half_extent_m", cfg.scene.area_half_extent_m, w);
        read(s, "seed", cfg.scene.seed, w);
        read(s, "sensor_mount_height_m", cfg.scene.sensor_mount_height_m, w);
        read(s, "sensor_yaw_rad", cfg.scene.sensor_yaw_rad, w);
        read(s, "wall_offset_m", cfg.scene.wall_offset_m, w);
        read(s, "sensor_clearance_m", cfg.scene.sensor_clearance_m, w);
        read(s, "with_ground", cfg.scene.with_ground, w);
        read(s, "class_name", cfg.scene.class_name, w);
    }
    if (j.contains("lidar")) {
        const auto& l = j.at("lidar");
        const std::string w = "gen-scene lidar";
        reject_unknown(l,
                       {"channels", "vertical_fov_deg", "points_per_rotation", "range_noise_min_m",
                        "range_noise_max_m", "max_range_m"},
                       w);
        read(l, "channels", cfg.lidar.channels, w);
        read(l, "vertical_fov_deg", cfg.lidar.vertical_fov_deg, w);
        read(l, "points_per_rotation", cfg.lidar.points_per_rotation, w);
        read(l, "range_noise_min_m", cfg.lidar.range_noise_min_m, w);
        read(l, "range_noise_max_m", cfg.lidar.range_noise_max_m, w);
        read(l, "max_range_m", cfg.lidar.max_range_m, w);
    }
    if (j.contains("format")) {
        std::string f;
        read(j, "format", f, "gen-scene");
        if (f == "bin") {
            cfg.format = CloudFormat::XyzBin;
        } else if (f == "ply") {
            cfg.format = CloudFormat::Ply;
        } else {
            throw ValidationError("gen-scene config: format must be 'bin' or 'ply'");
        }
    }
    cfg.scene.validate();
    cfg.lidar.validate();
    return cfg;
}

AnnotateFileConfig annotate_config_from_json(const std::string& text) {
    const json j = parse(text, "annotate");
    const std::string w = "annotate";
    reject_unknown(j,
                   {"min_points", "height_threshold_m", "density_easy", "density_floor", "emit_background",
                    "detection_range", "tilt_warning_rad", "classes"},
                   w);
    AnnotateFileConfig cfg;
    auto& a = cfg.annotate;
    read(j, "min_points", a.min_points, w);
    read(j, "height_threshold_m", a.height_threshold_m, w);
    read(j, "density_easy", a.density_easy, w);
    read(j, "density_floor", a.density_floor, w);
    read(j, "emit_background", a.emit_background, w);
    read(j, "tilt_warning_rad", a.tilt_warning_rad, w);
    if (j.contains("detection_range")) {
        const auto& r = j.at("detection_range");
        reject_unknown(r, {"xy_half_extent", "z_min", "z_max"}, "annotate detection_range");
        read(r, "xy_half_extent", a.detection_range.xy_half_extent, w);
        read(r, "z_min", a.detection_range.z_min, w);
        read(r, "z_max", a.detection_range.z_max, w);
    }
    if (j.contains("classes")) {
        if (!j.at("classes").is_array()) throw ValidationError("annotate config: 'classes' must be an array");
        std::vector<ClassEntry> entries;
        for (const auto& c : j.at("classes")) {
            reject_unknown(c, {"name", "id", "color"}, "annotate classes");
            ClassEntry e;
            std::vector<int> color{0, 0, 0};
            read(c, "name", e.name, w);
            read(c, "id", e.id, w);
            read(c, "color", color, w);
            if (color.size() != 3) throw ValidationError("annotate config: class color needs 3 components");
            for (int k = 0; k < 3; ++k) {
                if (color[k] < 0 || color[k] > 255) throw ValidationError("annotate config: color out of range");
                e.color[k] = static_cast<std::uint8_t>(color[k]);
            }
            entries.push_back(e);
        }
        cfg.registry = ClassRegistry(std::move(entries));
    }
    a.validate();
    return cfg;
}

EvalConfig eval_config_from_json(const std::string& text) {
    const json j = parse(text, "evaluate");
    const std::string w = "evaluate";
    reject_unknown(j, {"iou_threshold", "recall_positions", "nested", "min_points", "class_name"}, w);
    EvalConfig cfg;
    read(j, "iou_threshold", cfg.iou_threshold, w);
    read(j, "recall_positions", cfg.recall_positions, w);
    read(j, "nested", cfg.nested, w);
    read(j, "min_points", cfg.min_points, w);
    read(j, "class_name", cfg.class_name, w);
    cfg.validate();
    return cfg;
}

}  // namespace altimine
