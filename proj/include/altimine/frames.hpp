#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "altimine/geom3d.hpp"

namespace altimine {

namespace fs = std::filesystem;

using FrameId = std::uint64_t;

struct ObjectInstance {
    std::string name;
    std::string class_name;
    Vec3 size = Vec3::Ones();
    /// World pose; position is the base (footprint) of the object, not its center.
    Pose pose;
};

struct FrameRecord {
    FrameId frame_id = 0;
    Pose sensor_pose;
    std::vector<ObjectInstance> objects;
};

struct LabelRecord {
    Box3D box;
    std::string class_name;
    int difficulty = 0;
    /// Not serialized in label files; known only when produced in-process.
    std::optional<std::size_t> num_points;

    /// Compares the serialized fields only.
    bool same_serialized(const LabelRecord& o) const {
        return box == o.box && class_name == o.class_name && difficulty == o.difficulty;
    }
};

struct ClassEntry {
    std::string name;
    int id = 0;
    Rgb color{0, 0, 0};
};

/// Ordered class table. Id 0 is reserved for background.
class ClassRegistry {
public:
    ClassRegistry() = default;
    explicit ClassRegistry(std::vector<ClassEntry> entries);

    /// Excavator=1 in red.
    static ClassRegistry default_registry();

    void add(ClassEntry entry);
    const ClassEntry* find(std::string_view name) const;
    const ClassEntry* find(int id) const;
    const std::vector<ClassEntry>& entries() const { return entries_; }

private:
    std::vector<ClassEntry> entries_;
};

inline constexpr int kBackgroundClass = 0;

// Shortest representation that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view token);

// Pose log (poses.json)
std::vector<FrameRecord> parse_pose_log(const std::string& text, const std::string& source = "<memory>");
std::vector<FrameRecord> read_pose_log(const fs::path& path);
std::string serialize_pose_log(const std::vector<FrameRecord>& frames);
void write_pose_log(const fs::path& path, const std::vector<FrameRecord>& frames);

// Point clouds
enum class CloudFormat { XyzBin, Ply };

/// Little-endian float32 xyz triplets, or PLY (ascii / binary_little_endian).
PointCloud read_point_cloud(const fs::path& path, CloudFormat format);
/// Format inferred from the extension (.bin or .ply).
PointCloud read_point_cloud(const fs::path& path);
/// Bin output is float32; PLY output stores doubles and optional uchar colors.
void write_point_cloud(const fs::path& path, const PointCloud& pcd, CloudFormat format);
/// Rounds every coordinate through float32, as a bin round trip would.
PointCloud quantize_to_float(const PointCloud& pcd);

// Label files: `x y z dx dy dz yaw class difficulty`
std::string format_label_line(const LabelRecord& label);
LabelRecord parse_label_line(std::string_view line, const std::string& context = "");
void write_label_file(const fs::path& path, const std::vector<LabelRecord>& labels);
std::vector<LabelRecord> read_label_file(const fs::path& path);

// Semantic CSV: `x,y,z,r,g,b,class_id`
void write_semantic_csv(const fs::path& path, const PointCloud& pcd, const std::vector<int>& per_point_class,
                        const ClassRegistry& registry, bool include_background = true);

struct SemanticRow {
    Vec3 point;
    Rgb color;
    int class_id;
};
std::vector<SemanticRow> read_semantic_csv(const fs::path& path);

// gt_database crops
fs::path gt_database_path(const fs::path& root, FrameId frame_id, const std::string& object_name);
fs::path write_gt_database(const fs::path& root, FrameId frame_id, const std::string& object_name,
                           const PointCloud& crop);

/// Six-digit zero padded id, e.g. 000007.
std::string frame_stem(FrameId id);

/// Standard dataset directory layout.
struct DatasetLayout {
    fs::path root;

    fs::path poses() const { return root / "poses.json"; }
    fs::path frames_dir() const { return root / "frames"; }
    fs::path labels_dir() const { return root / "labels"; }
    fs::path semantic_dir() const { return root / "semantic"; }
    fs::path gt_database_dir() const { return root / "gt_database"; }
    fs::path truth_dir() const { return root / "truth"; }

    fs::path frame_file(FrameId id, CloudFormat f) const;
    /// Existing .bin or .ply for `id`, preferring .bin.
    std::optional<fs::path> find_frame_file(FrameId id) const;
    fs::path label_file(FrameId id) const { return labels_dir() / (frame_stem(id) + ".txt"); }
    fs::path semantic_file(FrameId id) const { return semantic_dir() / (frame_stem(id) + ".csv"); }
    fs::path truth_file(FrameId id) const { return truth_dir() / (frame_stem(id) + ".txt"); }
};

/// Frame ids of `dir/NNNNNN<ext>` files, ascending. Other files are skipped.
std::vector<FrameId> list_frame_ids(const fs::path& dir, const std::string& ext);

/// Whole-file helpers that raise IoError with the path and OS cause.
std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, std::string_view content);

}  // namespace altimine
