#include "altimine/frames.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "altimine/errors.hpp"

namespace altimine {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

// ---------------------------------------------------------------------------
// Class registry

ClassRegistry::ClassRegistry(std::vector<ClassEntry> entries) {
    for (auto& e : entries) add(std::move(e));
}

ClassRegistry ClassRegistry::default_registry() {
    return ClassRegistry({{"Excavator", 1, {255, 0, 0}}});
}

void ClassRegistry::add(ClassEntry entry) {
    if (entry.id <= kBackgroundClass) {
        throw ValidationError("class '" + entry.name + "' must have a positive id (0 is background)");
    }
    if (entry.name.empty() || entry.name.find_first_of(" \t\r\n") != std::string::npos) {
        throw ValidationError("class name '" + entry.name + "' must be a non-empty token without whitespace");
    }
    if (find(entry.name) || find(entry.id)) {
        throw ValidationError("duplicate class registry entry '" + entry.name + "' / id " +
                              std::to_string(entry.id));
    }
    entries_.push_back(std::move(entry));
}

const ClassEntry* ClassRegistry::find(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

const ClassEntry* ClassRegistry::find(int id) const {
    for (const auto& e : entries_)
        if (e.id == id) return &e;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Text helpers

std::string format_double(double v) {
    char buf[64];
    if (v == 0.0) v = 0.0;  // no "-0"
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

double parse_double(std::string_view token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || token.empty()) {
        throw FormatError("'" + std::string(token) + "' is not a number");
    }
    if (!std::isfinite(v)) throw FormatError("'" + std::string(token) + "' is not finite");
    return v;
}

namespace {

std::string os_cause() { return std::strerror(errno); }

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

long long parse_int(std::string_view token, const std::string& what) {
    long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
        throw FormatError(what + ": '" + std::string(token) + "' is not an integer");
    }
    return v;
}

std::ofstream open_out(const fs::path& path, bool binary) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw IoError(path.string() + ": " + os_cause());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError(path.string() + ": write failed: " + os_cause());
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": " + os_cause());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(path.string() + ": read failed: " + os_cause());
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    auto out = open_out(path, true);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    finish(out, path);
}

std::string frame_stem(FrameId id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(id));
    return buf;
}

// ---------------------------------------------------------------------------
// Pose log

namespace {

std::string line_context(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    std::size_t line_start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
    std::size_t line_end = text.find('\n', line_start);
    std::string snippet = text.substr(line_start, std::min<std::size_t>(line_end - line_start, 120));
    return "line " + std::to_string(line) + ", column " + std::to_string(byte - line_start + 1) +
           ": `" + snippet + "`";
}

Vec3 vec3_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 3) {
        throw ValidationError(where + ": '" + key + "' must be an array of 3 numbers");
    }
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        const auto& e = j.at(key)[i];
        if (!e.is_number()) throw ValidationError(where + ": '" + key + "' must contain numbers");
        v[i] = e.get<double>();
    }
    if (!v.allFinite()) throw ValidationError(where + ": '" + key + "' is not finite");
    return v;
}

Pose pose_field(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": pose must be an object");
    Pose p;
    p.position = vec3_field(j, "position", where);
    const auto& o = j.contains("orientation") ? j.at("orientation") : json();
    if (!o.is_array() || o.size() != 4) {
        throw ValidationError(where + ": 'orientation' must be [w, qx, qy, qz]");
    }
    std::array<double, 4> q{};
    for (int i = 0; i < 4; ++i) {
        if (!o[i].is_number()) throw ValidationError(where + ": 'orientation' must contain numbers");
        q[i] = o[i].get<double>();
    }
    try {
        p.orientation = Quaternion(q[0], q[1], q[2], q[3]);
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return p;
}

json pose_json(const Pose& p) {
    return {{"position", {p.position.x(), p.position.y(), p.position.z()}},
            {"orientation", {p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()}}};
}

}  // namespace

std::vector<FrameRecord> parse_pose_log(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": malformed JSON at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                              " (" + e.what() + ")");
    }
    if (!doc.is_object() || !doc.contains("frames") || !doc.at("frames").is_array()) {
        throw ValidationError(source + ": expected an object with a 'frames' array");
    }
    std::vector<FrameRecord> frames;
    std::set<FrameId> seen;
    for (const auto& jf : doc.at("frames")) {
        if (!jf.is_object() || !jf.contains("frame_id") || !jf.at("frame_id").is_number_unsigned()) {
            throw ValidationError(source + ": every frame needs a non-negative integer 'frame_id'");
        }
        FrameRecord f;
        f.frame_id = jf.at("frame_id").get<FrameId>();
        const std::string where = source + ": frame " + std::to_string(f.frame_id);
        if (!seen.insert(f.frame_id).second) throw ValidationError(where + ": duplicate frame_id");
        if (!jf.contains("sensor_pose")) throw ValidationError(where + ": missing 'sensor_pose'");
        f.sensor_pose = pose_field(jf.at("sensor_pose"), where + " sensor_pose");
        std::set<std::string> names;
        for (const auto& jo : jf.value("objects", json::array())) {
            ObjectInstance o;
            if (!jo.is_object() || !jo.contains("name") || !jo.at("name").is_string()) {
                throw ValidationError(where + ": every object needs a string 'name'");
            }
            o.name = jo.at("name").get<std::string>();
            const std::string owhere = where + " object '" + o.name + "'";
            if (o.name.empty() || o.name.find_first_of(" \t\r\n/\\") != std::string::npos) {
                throw ValidationError(owhere + ": name must be a non-empty token without whitespace or slashes");
            }
            if (!names.insert(o.name).second) throw ValidationError(owhere + ": duplicate object name");
            if (!jo.contains("class_name") || !jo.at("class_name").is_string()) {
                throw ValidationError(owhere + ": missing 'class_name'");
            }
            o.class_name = jo.at("class_name").get<std::string>();
            o.size = vec3_field(jo, "size", owhere);
            if ((o.size.array() <= 0.0).any()) throw ValidationError(owhere + ": size components must be > 0");
            if (!jo.contains("pose")) throw ValidationError(owhere + ": missing 'pose'");
            o.pose = pose_field(jo.at("pose"), owhere);
            f.objects.push_back(std::move(o));
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<FrameRecord> read_pose_log(const fs::path& path) {
    return parse_pose_log(read_text_file(path), path.string());
}

std::string serialize_pose_log(const std::vector<FrameRecord>& frames) {
    json jframes = json::array();
    for (const auto& f : frames) {
        json objs = json::array();
        for (const auto& o : f.objects) {
            objs.push_back({{"name", o.name},
                            {"class_name", o.class_name},
                            {"size", {o.size.x(), o.size.y(), o.size.z()}},
                            {"pose", pose_json(o.pose)}});
        }
        jframes.push_back({{"frame_id", f.frame_id}, {"sensor_pose", pose_json(f.sensor_pose)}, {"objects", objs}});
    }
    return json{{"frames", jframes}}.dump(2) + "\n";
}

void write_pose_log(const fs::path& path, const std::vector<FrameRecord>& frames) {
    write_text_file(path, serialize_pose_log(frames));
}

// ---------------------------------------------------------------------------
// Point clouds

namespace {

PointCloud read_xyz_bin(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() % 12 != 0) {
        throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                          " is not a multiple of 12 (truncated xyz float32 file?)");
    }
    PointCloud pcd;
    const std::size_t n = bytes.size() / 12;
    pcd.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        float xyz[3];
        std::memcpy(xyz, bytes.data() + 12 * i, 12);
        pcd.points.emplace_back(xyz[0], xyz[1], xyz[2]);
    }
    pcd.validate();
    return pcd;
}

struct PlyProperty {
    std::string name;
    std::string type;
};

std::size_t ply_type_size(const std::string& t, const fs::path& path) {
    static const std::map<std::string, std::size_t> sizes{
        {"char", 1},  {"uchar", 1},  {"int8", 1},   {"uint8", 1},   {"short", 2},  {"ushort", 2},
        {"int16", 2}, {"uint16", 2}, {"int", 4},    {"uint", 4},    {"int32", 4},  {"uint32", 4},
        {"float", 4}, {"float32", 4}, {"double", 8}, {"float64", 8}};
    auto it = sizes.find(t);
    if (it == sizes.end()) throw FormatError(path.string() + ": unsupported PLY property type '" + t + "'");
    return it->second;
}

double ply_read_binary(const char* p, const std::string& t) {
    auto get = [p]<typename T>(T) {
        T v;
        std::memcpy(&v, p, sizeof(T));
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return get(std::int8_t{});
    if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
    if (t == "short" || t == "int16") return get(std::int16_t{});
    if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
    if (t == "int" || t == "int32") return get(std::int32_t{});
    if (t == "uint" || t == "uint32") return get(std::uint32_t{});
    if (t == "float" || t == "float32") return get(float{});
    return get(double{});
}

PointCloud read_ply(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    const auto header_end = bytes.find("end_header\n");
    if (bytes.rfind("ply\n", 0) != 0 || header_end == std::string::npos) {
        throw FormatError(path.string() + ": not a PLY file (missing 'ply' magic or 'end_header')");
    }
    std::istringstream header(bytes.substr(0, header_end));
    std::string line, format;
    std::size_t vertex_count = 0;
    bool in_vertex = false, seen_vertex = false;
    std::vector<PlyProperty> props;
    while (std::getline(header, line)) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "format") {
            ls >> format;
        } else if (kw == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (seen_vertex && name != "vertex") {
                // Trailing elements after vertex are ignored; they do not affect vertex offsets.
                in_vertex = false;
                continue;
            }
            if (name != "vertex") {
                throw FormatError(path.string() + ": element '" + name + "' before vertex is not supported");
            }
            in_vertex = seen_vertex = true;
            vertex_count = count;
        } else if (kw == "property" && in_vertex) {
            PlyProperty p;
            ls >> p.type;
            if (p.type == "list") throw FormatError(path.string() + ": list properties on vertex are not supported");
            ls >> p.name;
            props.push_back(p);
        }
    }
    if (format != "ascii" && format != "binary_little_endian") {
        throw FormatError(path.string() + ": unsupported PLY format '" + format + "'");
    }
    auto index_of = [&](std::initializer_list<const char*> names) -> int {
        for (std::size_t i = 0; i < props.size(); ++i)
            for (const char* n : names)
                if (props[i].name == n) return static_cast<int>(i);
        return -1;
    };
    const int ix = index_of({"x"}), iy = index_of({"y"}), iz = index_of({"z"});
    if (ix < 0 || iy < 0 || iz < 0) throw FormatError(path.string() + ": PLY vertex lacks x/y/z properties");
    const int ir = index_of({"red", "r"}), ig = index_of({"green", "g"}), ib = index_of({"blue", "b"});
    const bool has_rgb = ir >= 0 && ig >= 0 && ib >= 0;

    PointCloud pcd;
    pcd.points.reserve(vertex_count);
    if (has_rgb) pcd.colors.emplace().reserve(vertex_count);
    std::vector<double> values(props.size());
    const std::size_t body = header_end + std::strlen("end_header\n");

    if (format == "binary_little_endian") {
        std::vector<std::size_t> offsets(props.size());
        std::size_t stride = 0;
        for (std::size_t i = 0; i < props.size(); ++i) {
            offsets[i] = stride;
            stride += ply_type_size(props[i].type, path);
        }
        if (bytes.size() < body + stride * vertex_count) {
            throw FormatError(path.string() + ": truncated PLY body");
        }
        for (std::size_t v = 0; v < vertex_count; ++v) {
            const char* rec = bytes.data() + body + v * stride;
            for (std::size_t i = 0; i < props.size(); ++i) values[i] = ply_read_binary(rec + offsets[i], props[i].type);
            pcd.points.emplace_back(values[ix], values[iy], values[iz]);
            if (has_rgb) {
                pcd.colors->push_back({static_cast<std::uint8_t>(values[ir]), static_cast<std::uint8_t>(values[ig]),
                                       static_cast<std::uint8_t>(values[ib])});
            }
        }
    } else {
        std::istringstream in(bytes.substr(body));
        for (std::size_t v = 0; v < vertex_count; ++v) {
            std::string vline;
            if (!std::getline(in, vline)) throw FormatError(path.string() + ": truncated PLY body");
            std::istringstream vs(vline);
            for (std::size_t i = 0; i < props.size(); ++i) {
                std::string tok;
                if (!(vs >> tok)) throw FormatError(path.string() + ": short vertex line " + std::to_string(v));
                values[i] = parse_double(tok);
            }
            pcd.points.emplace_back(values[ix], values[iy], values[iz]);
            if (has_rgb) {
                pcd.colors->push_back({static_cast<std::uint8_t>(values[ir]), static_cast<std::uint8_t>(values[ig]),
                                       static_cast<std::uint8_t>(values[ib])});
            }
        }
    }
    try {
        pcd.validate();
    } catch (const ValidationError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return pcd;
}

void write_ply(const fs::path& path, const PointCloud& pcd) {
    pcd.validate();
    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(pcd.size()) +
                      "\nproperty double x\nproperty double y\nproperty double z\n";
    if (pcd.colors) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";
    const std::size_t stride = 24 + (pcd.colors ? 3 : 0);
    const std::size_t head = out.size();
    out.resize(head + stride * pcd.size());
    char* p = out.data() + head;
    for (std::size_t i = 0; i < pcd.size(); ++i, p += stride) {
        const double xyz[3] = {pcd.points[i].x(), pcd.points[i].y(), pcd.points[i].z()};
        std::memcpy(p, xyz, 24);
        if (pcd.colors) std::memcpy(p + 24, (*pcd.colors)[i].data(), 3);
    }
    write_text_file(path, out);
}

void write_xyz_bin(const fs::path& path, const PointCloud& pcd) {
    pcd.validate();
    std::string out(pcd.size() * 12, '\0');
    for (std::size_t i = 0; i < pcd.size(); ++i) {
        const float xyz[3] = {static_cast<float>(pcd.points[i].x()), static_cast<float>(pcd.points[i].y()),
                              static_cast<float>(pcd.points[i].z())};
        std::memcpy(out.data() + 12 * i, xyz, 12);
    }
    write_text_file(path, out);
}

}  // namespace

PointCloud read_point_cloud(const fs::path& path, CloudFormat format) {
    return format == CloudFormat::XyzBin ? read_xyz_bin(path) : read_ply(path);
}

PointCloud read_point_cloud(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".bin") return read_xyz_bin(path);
    if (ext == ".ply") return read_ply(path);
    throw FormatError(path.string() + ": unknown point cloud extension (expected .bin or .ply)");
}

void write_point_cloud(const fs::path& path, const PointCloud& pcd, CloudFormat format) {
    if (format == CloudFormat::XyzBin) {
        write_xyz_bin(path, pcd);
    } else {
        write_ply(path, pcd);
    }
}

PointCloud quantize_to_float(const PointCloud& pcd) {
    // Staged through a float buffer: gcc 11 -O3 folds an in-place double->float->double round trip.
    std::vector<float> buf(pcd.size() * 3);
    for (std::size_t i = 0; i < pcd.size(); ++i)
        for (int k = 0; k < 3; ++k) buf[3 * i + static_cast<std::size_t>(k)] = static_cast<float>(pcd.points[i][k]);
    PointCloud out;
    out.colors = pcd.colors;
    out.points.reserve(pcd.size());
    for (std::size_t i = 0; i < pcd.size(); ++i) out.points.emplace_back(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
    return out;
}

// ---------------------------------------------------------------------------
// Label files

std::string format_label_line(const LabelRecord& l) {
    if (l.difficulty < 0 || l.difficulty > 2) {
        throw ValidationError("difficulty " + std::to_string(l.difficulty) + " outside {0,1,2}");
    }
    if (l.class_name.empty() || l.class_name.find_first_of(" \t\r\n") != std::string::npos) {
        throw ValidationError("class name '" + l.class_name + "' is not a single token");
    }
    const auto& b = l.box;
    std::string s;
    for (double v : {b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(), b.size.z(), b.yaw}) {
        s += format_double(v);
        s += ' ';
    }
    s += l.class_name;
    s += ' ';
    s += std::to_string(l.difficulty);
    return s;
}

LabelRecord parse_label_line(std::string_view line, const std::string& context) {
    const auto tok = split(line, ' ');
    if (tok.size() != 9) {
        throw FormatError(context + ": expected 9 space-separated tokens, got " + std::to_string(tok.size()));
    }
    try {
        LabelRecord l;
        l.box = Box3D({parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2])},
                      {parse_double(tok[3]), parse_double(tok[4]), parse_double(tok[5])}, parse_double(tok[6]));
        l.class_name = std::string(tok[7]);
        const auto d = parse_int(tok[8], "difficulty");
        if (d < 0 || d > 2) throw FormatError("difficulty " + std::to_string(d) + " outside {0,1,2}");
        l.difficulty = static_cast<int>(d);
        return l;
    } catch (const ValidationError& e) {
        throw FormatError(context + ": " + e.what());
    }
}

void write_label_file(const fs::path& path, const std::vector<LabelRecord>& labels) {
    std::string out;
    for (const auto& l : labels) {
        out += format_label_line(l);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<LabelRecord> read_label_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::vector<LabelRecord> out;
    std::size_t start = 0, line_no = 1;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty()) out.push_back(parse_label_line(line, path.string() + ":" + std::to_string(line_no)));
        start = end + 1;
        ++line_no;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Semantic CSV

void write_semantic_csv(const fs::path& path, const PointCloud& pcd, const std::vector<int>& per_point_class,
                        const ClassRegistry& registry, bool include_background) {
    if (per_point_class.size() != pcd.size()) {
        throw ValidationError("per-point class list has " + std::to_string(per_point_class.size()) +
                              " entries for " + std::to_string(pcd.size()) + " points");
    }
    std::string out = "x,y,z,r,g,b,class_id\n";
    for (std::size_t i = 0; i < pcd.size(); ++i) {
        const int cls = per_point_class[i];
        Rgb color{0, 0, 0};
        if (cls == kBackgroundClass) {
            if (!include_background) continue;
        } else {
            const auto* entry = registry.find(cls);
            if (!entry) throw ValidationError("class id " + std::to_string(cls) + " is not in the class registry");
            color = entry->color;
        }
        const auto& p = pcd.points[i];
        out += format_double(p.x()) + ',' + format_double(p.y()) + ',' + format_double(p.z()) + ',' +
               std::to_string(color[0]) + ',' + std::to_string(color[1]) + ',' + std::to_string(color[2]) + ',' +
               std::to_string(cls) + '\n';
    }
    write_text_file(path, out);
}

std::vector<SemanticRow> read_semantic_csv(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "x,y,z,r,g,b,class_id") {
        throw FormatError(path.string() + ": missing semantic CSV header");
    }
    std::vector<SemanticRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = split(line, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (tok.size() != 7) throw FormatError(where + ": expected 7 fields");
        SemanticRow r;
        r.point = {parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2])};
        for (int c = 0; c < 3; ++c) {
            const auto v = parse_int(tok[3 + c], where);
            if (v < 0 || v > 255) throw FormatError(where + ": color component out of range");
            r.color[c] = static_cast<std::uint8_t>(v);
        }
        r.class_id = static_cast<int>(parse_int(tok[6], where));
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// gt_database

fs::path gt_database_path(const fs::path& root, FrameId frame_id, const std::string& object_name) {
    return root / "gt_database" / ("Crop_3d_" + frame_stem(frame_id) + "_" + object_name + ".ply");
}

fs::path write_gt_database(const fs::path& root, FrameId frame_id, const std::string& object_name,
                           const PointCloud& crop) {
    auto path = gt_database_path(root, frame_id, object_name);
    write_ply(path, crop);
    return path;
}

// ---------------------------------------------------------------------------
// Layout

fs::path DatasetLayout::frame_file(FrameId id, CloudFormat f) const {
    return frames_dir() / (frame_stem(id) + (f == CloudFormat::XyzBin ? ".bin" : ".ply"));
}

std::optional<fs::path> DatasetLayout::find_frame_file(FrameId id) const {
    for (auto f : {CloudFormat::XyzBin, CloudFormat::Ply}) {
        auto p = frame_file(id, f);
        if (fs::is_regular_file(p)) return p;
    }
    return std::nullopt;
}

std::vector<FrameId> list_frame_ids(const fs::path& dir, const std::string& ext) {
    std::vector<FrameId> ids;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError(dir.string() + ": not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
        const auto stem = entry.path().stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            continue;
        }
        ids.push_back(std::stoull(stem));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace altimine
