#include "altimine/augment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include <json.hpp>

#include "altimine/errors.hpp"

namespace altimine {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void shift_in_place(AugmentedFrame& f, double offset) {
    for (auto& p : f.pcd.points) p.z() += offset;
    for (auto& l : f.labels) l.box.center.z() += offset;
}

void flip_in_place(AugmentedFrame& f) {
    for (auto& p : f.pcd.points) p.y() = -p.y();
    for (auto& l : f.labels) {
        l.box.center.y() = -l.box.center.y();
        l.box.yaw = normalize_angle(-l.box.yaw);
    }
}

void scale_in_place(AugmentedFrame& f, double s) {
    for (auto& p : f.pcd.points) p *= s;
    for (auto& l : f.labels) {
        l.box.center *= s;
        l.box.size *= s;
    }
}

double draw_uniform(double lo, double hi, Rng& rng) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void apply_step(AugmentedFrame& f, const AugmentStep& step, Rng& rng) {
    std::visit(overloaded{
                   [&](const RandomAltitudeShift& s) {
                       const double o = draw_uniform(s.min, s.max, rng);
                       shift_in_place(f, o);
                       f.applied.push_back({"RandomAltitudeShift", {{"offset", o}}});
                   },
                   [&](const ConstantAltitudeShift& s) {
                       shift_in_place(f, s.offset);
                       f.applied.push_back({"ConstantAltitudeShift", {{"offset", s.offset}}});
                   },
                   [&](const RandomWorldTranslationZ& s) {
                       const double o = s.std > 0.0 ? std::normal_distribution<double>(0.0, s.std)(rng) : 0.0;
                       shift_in_place(f, o);
                       f.applied.push_back({"RandomWorldTranslationZ", {{"offset", o}}});
                   },
                   [&](const RandomFlipX& s) {
                       // Always consume a draw so later steps see the same stream for any p.
                       const bool flip = draw_uniform(0.0, 1.0, rng) < s.probability;
                       if (flip) flip_in_place(f);
                       f.applied.push_back({"RandomFlipX", {{"applied", flip ? 1.0 : 0.0}}});
                   },
                   [&](const GlobalScaling& s) {
                       const double k = draw_uniform(s.min, s.max, rng);
                       scale_in_place(f, k);
                       f.applied.push_back({"GlobalScaling", {{"scale", k}}});
                   },
               },
               step);
}

void validate_step(const AugmentStep& step) {
    std::visit(overloaded{
                   [](const RandomAltitudeShift& s) {
                       if (!(std::isfinite(s.min) && std::isfinite(s.max) && s.min <= s.max))
                           throw ValidationError("RandomAltitudeShift needs finite min <= max");
                   },
                   [](const ConstantAltitudeShift& s) {
                       if (!std::isfinite(s.offset)) throw ValidationError("ConstantAltitudeShift offset must be finite");
                   },
                   [](const RandomWorldTranslationZ& s) {
                       if (!(std::isfinite(s.std) && s.std >= 0.0))
                           throw ValidationError("RandomWorldTranslationZ std must be >= 0");
                   },
                   [](const RandomFlipX& s) {
                       if (!(s.probability >= 0.0 && s.probability <= 1.0))
                           throw ValidationError("RandomFlipX probability must lie in [0, 1]");
                   },
                   [](const GlobalScaling& s) {
                       if (!(std::isfinite(s.max) && s.min > 0.0 && s.min <= s.max))
                           throw ValidationError("GlobalScaling needs 0 < min <= max");
                   },
               },
               step);
}

AugmentedFrame start(const PointCloud& pcd, const std::vector<LabelRecord>& labels) {
    return {pcd, labels, {}};
}

double number(const json& j, const char* key, const std::string& type) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ValidationError("augment step " + type + " needs numeric '" + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace

std::string step_name(const AugmentStep& step) {
    return std::visit(overloaded{
                          [](const RandomAltitudeShift&) { return std::string("RandomAltitudeShift"); },
                          [](const ConstantAltitudeShift&) { return std::string("ConstantAltitudeShift"); },
                          [](const RandomWorldTranslationZ&) { return std::string("RandomWorldTranslationZ"); },
                          [](const RandomFlipX&) { return std::string("RandomFlipX"); },
                          [](const GlobalScaling&) { return std::string("GlobalScaling"); },
                      },
                      step);
}

void AugmentSpec::validate() const {
    for (const auto& s : steps) validate_step(s);
}

AugmentSpec AugmentSpec::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("augment spec: malformed JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) throw ValidationError("augment spec must be a JSON object");
    AugmentSpec spec;
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) throw ValidationError("augment spec 'seed' must be a non-negative integer");
        spec.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("preset")) {
        if (doc.contains("steps")) throw ValidationError("augment spec: give either 'preset' or 'steps', not both");
        return preset(doc.at("preset").get<std::string>(), spec.seed);
    }
    for (const auto& js : doc.value("steps", json::array())) {
        if (!js.is_object() || !js.contains("type") || !js.at("type").is_string()) {
            throw ValidationError("augment step needs a string 'type'");
        }
        const auto type = js.at("type").get<std::string>();
        if (type == "RandomAltitudeShift") {
            spec.steps.emplace_back(RandomAltitudeShift{number(js, "min", type), number(js, "max", type)});
        } else if (type == "ConstantAltitudeShift") {
            spec.steps.emplace_back(ConstantAltitudeShift{number(js, "offset", type)});
        } else if (type == "RandomWorldTranslationZ") {
            spec.steps.emplace_back(RandomWorldTranslationZ{number(js, "std", type)});
        } else if (type == "RandomFlipX") {
            spec.steps.emplace_back(RandomFlipX{number(js, "probability", type)});
        } else if (type == "GlobalScaling") {
            spec.steps.emplace_back(GlobalScaling{number(js, "min", type), number(js, "max", type)});
        } else {
            throw ValidationError("unknown augment step type '" + type + "'");
        }
    }
    spec.validate();
    return spec;
}

std::string AugmentSpec::to_json() const {
    json steps_json = json::array();
    for (const auto& s : steps) {
        json js = std::visit(overloaded{
                                 [](const RandomAltitudeShift& s) { return json{{"min", s.min}, {"max", s.max}}; },
                                 [](const ConstantAltitudeShift& s) { return json{{"offset", s.offset}}; },
                                 [](const RandomWorldTranslationZ& s) { return json{{"std", s.std}}; },
                                 [](const RandomFlipX& s) { return json{{"probability", s.probability}}; },
                                 [](const GlobalScaling& s) { return json{{"min", s.min}, {"max", s.max}}; },
                             },
                             s);
        js["type"] = step_name(s);
        steps_json.push_back(js);
    }
    return json{{"seed", seed}, {"steps", steps_json}}.dump(2) + "\n";
}

AugmentSpec AugmentSpec::preset(const std::string& name, std::uint64_t seed) {
    const std::vector<AugmentStep> standard{RandomFlipX{0.5}, GlobalScaling{0.95, 1.05}};
    auto with_standard = [&](AugmentStep extra) {
        auto s = standard;
        s.push_back(extra);
        return s;
    };
    std::map<std::string, std::vector<AugmentStep>> table{
        {"none", {}},
        {"ras-2", {RandomAltitudeShift{-2.0, 2.0}}},
        {"ras-0.5", {RandomAltitudeShift{-0.5, 0.5}}},
        {"cas-0.5", {ConstantAltitudeShift{0.5}}},
        {"rwt-z-0.5", {RandomWorldTranslationZ{0.5}}},
        {"standard", standard},
        {"standard+ras", with_standard(RandomAltitudeShift{-2.0, 2.0})},
        {"standard+cas", with_standard(ConstantAltitudeShift{0.5})},
        {"standard+rwt-z", with_standard(RandomWorldTranslationZ{0.5})},
    };
    auto it = table.find(name);
    if (it == table.end()) throw ValidationError("unknown augment preset '" + name + "'");
    return {it->second, seed};
}

std::vector<std::string> AugmentSpec::preset_names() {
    return {"none",     "ras-2",        "ras-0.5",      "cas-0.5",       "rwt-z-0.5",
            "standard", "standard+ras", "standard+cas", "standard+rwt-z"};
}

AugmentedFrame altitude_shift(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double offset) {
    validate_step(ConstantAltitudeShift{offset});
    auto f = start(pcd, labels);
    shift_in_place(f, offset);
    f.applied.push_back({"ConstantAltitudeShift", {{"offset", offset}}});
    return f;
}

AugmentedFrame random_altitude_shift(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double min,
                                     double max, Rng& rng) {
    validate_step(RandomAltitudeShift{min, max});
    auto f = start(pcd, labels);
    apply_step(f, RandomAltitudeShift{min, max}, rng);
    return f;
}

AugmentedFrame random_world_translation_z(const PointCloud& pcd, const std::vector<LabelRecord>& labels,
                                          double std_dev, Rng& rng) {
    validate_step(RandomWorldTranslationZ{std_dev});
    auto f = start(pcd, labels);
    apply_step(f, RandomWorldTranslationZ{std_dev}, rng);
    return f;
}

AugmentedFrame random_flip_x(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double p, Rng& rng) {
    validate_step(RandomFlipX{p});
    auto f = start(pcd, labels);
    apply_step(f, RandomFlipX{p}, rng);
    return f;
}

AugmentedFrame global_scaling(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double smin,
                              double smax, Rng& rng) {
    validate_step(GlobalScaling{smin, smax});
    auto f = start(pcd, labels);
    apply_step(f, GlobalScaling{smin, smax}, rng);
    return f;
}

AugmentedFrame flip_x(const PointCloud& pcd, const std::vector<LabelRecord>& labels) {
    auto f = start(pcd, labels);
    flip_in_place(f);
    f.applied.push_back({"RandomFlipX", {{"applied", 1.0}}});
    return f;
}

AugmentedFrame scale(const PointCloud& pcd, const std::vector<LabelRecord>& labels, double s) {
    validate_step(GlobalScaling{s, s});
    auto f = start(pcd, labels);
    scale_in_place(f, s);
    f.applied.push_back({"GlobalScaling", {{"scale", s}}});
    return f;
}

AugmentedFrame apply_spec(const PointCloud& pcd, const std::vector<LabelRecord>& labels, const AugmentSpec& spec,
                          FrameId frame_id) {
    spec.validate();
    auto f = start(pcd, labels);
    Rng rng = frame_rng(spec.seed, frame_id);
    for (const auto& step : spec.steps) apply_step(f, step, rng);
    return f;
}

AugmentSummary augment_dataset(const fs::path& in_dir, const fs::path& out_dir, const AugmentSpec& spec,
                               unsigned jobs) {
    spec.validate();
    const DatasetLayout in{in_dir}, out{out_dir};
    if (fs::weakly_canonical(in_dir) == fs::weakly_canonical(out_dir)) {
        throw ValidationError("augment output directory must differ from the input directory");
    }
    const auto ids = list_frame_ids(in.labels_dir(), ".txt");
    std::vector<fs::path> clouds;
    for (auto id : ids) {
        auto p = in.find_frame_file(id);
        if (!p) throw IoError(in.frames_dir().string() + ": no point cloud for frame_id " + std::to_string(id));
        clouds.push_back(*p);
    }

    std::vector<std::vector<AppliedStep>> logs(ids.size());
    std::vector<std::size_t> label_counts(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++) {
            try {
                const auto pcd = read_point_cloud(clouds[i]);
                const auto labels = read_label_file(in.label_file(ids[i]));
                auto f = apply_spec(pcd, labels, spec, ids[i]);
                const auto fmt = clouds[i].extension() == ".bin" ? CloudFormat::XyzBin : CloudFormat::Ply;
                write_point_cloud(out.frame_file(ids[i], fmt), f.pcd, fmt);
                write_label_file(out.label_file(ids[i]), f.labels);
                logs[i] = std::move(f.applied);
                label_counts[i] = f.labels.size();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(ids.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    json log = json::array();
    AugmentSummary summary;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        json steps = json::array();
        for (const auto& a : logs[i]) {
            json params = json::object();
            for (const auto& [k, v] : a.params) params[k] = v;
            steps.push_back({{"step", a.step}, {"params", params}});
        }
        log.push_back({{"frame_id", ids[i]}, {"applied", steps}});
        ++summary.frames;
        summary.labels += label_counts[i];
    }
    fs::create_directories(out_dir);
    write_text_file(out_dir / "augment_log.json",
                    json{{"spec", json::parse(spec.to_json())}, {"frames", log}}.dump(2) + "\n");
    return summary;
}

}  // namespace altimine
