#include "altimine/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "altimine/annotate.hpp"
#include "altimine/augment.hpp"
#include "altimine/config.hpp"
#include "altimine/errors.hpp"
#include "altimine/eval.hpp"
#include "altimine/simgen.hpp"

namespace altimine::cli {

namespace {

using nlohmann::json;

void print_warnings(const std::vector<std::string>& warnings, bool verbose, std::ostream& err) {
    constexpr std::size_t kShown = 10;
    const std::size_t n = verbose ? warnings.size() : std::min(kShown, warnings.size());
    for (std::size_t i = 0; i < n; ++i) err << "warning: " << warnings[i] << "\n";
    if (n < warnings.size()) err << "warning: ... " << warnings.size() - n << " more (use -v to list all)\n";
}

void require_dir(const fs::path& p, const std::string& what) {
    if (!fs::is_directory(p)) throw IoError(p.string() + ": " + what + " directory does not exist");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dataset tooling for altitude-aware 3D detection in mining scenes"};
    app.name("altimine");
    app.require_subcommand(1, 1);
    app.fallthrough();

    bool as_json = false;
    bool verbose = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_flag("--json", as_json, "Print a JSON summary to standard output");
    app.add_flag("-v,--verbose", verbose, "Print every warning");
    app.add_option("--jobs", jobs, "Worker threads for frame-parallel stages")->check(CLI::PositiveNumber);

    // gen-scene
    auto* gen = app.add_subcommand("gen-scene", "Generate a synthetic mine-scene dataset");
    std::string g_scenario, g_out, g_config, g_format;
    std::size_t g_frames = 10;
    int g_objects = 0, g_ppr = 0, g_channels = 0;
    double g_bench = 0.0;
    std::uint64_t g_seed = 0;
    bool g_no_noise = false;
    int g_min_points = 0;
    gen->add_option("--out", g_out, "Output dataset directory")->required();
    gen->add_option("--config", g_config, "JSON config ({scene, lidar, format})");
    gen->add_option("--scenario", g_scenario, "same-level | sensor-in-pit | sensor-on-bench");
    gen->add_option("--frames", g_frames, "Number of frames");
    auto* g_objects_opt = gen->add_option("--objects", g_objects, "Excavators per frame");
    auto* g_bench_opt = gen->add_option("--bench-height", g_bench, "Bench height in meters");
    auto* g_seed_opt = gen->add_option("--seed", g_seed, "Random seed");
    gen->add_option("--format", g_format, "Point cloud format: bin | ply");
    auto* g_ppr_opt = gen->add_option("--points-per-rotation", g_ppr, "Azimuth samples per channel");
    auto* g_channels_opt = gen->add_option("--channels", g_channels, "LiDAR channels");
    gen->add_flag("--no-noise", g_no_noise, "Disable range noise");
    auto* g_min_opt =
        gen->add_option("--min-points", g_min_points, "Truth keeps objects with at least this many points (as annotate)");

    // annotate
    auto* ann = app.add_subcommand("annotate", "Annotate a dataset (labels, semantic CSVs, gt_database)");
    std::string a_dataset, a_out, a_config;
    int a_min_points = 0;
    bool a_foreground_only = false;
    ann->add_option("dataset", a_dataset, "Dataset directory with poses.json and frames/")->required();
    ann->add_option("--out", a_out, "Output directory (defaults to the dataset directory)");
    ann->add_option("--config", a_config, "JSON annotate config");
    auto* a_min_opt = ann->add_option("--min-points", a_min_points, "Drop objects with fewer in-box points");
    ann->add_flag("--foreground-only", a_foreground_only, "Semantic CSVs carry only object points");

    // augment
    auto* aug = app.add_subcommand("augment", "Apply an augmentation spec to a labeled dataset");
    std::string u_in, u_out, u_spec, u_preset;
    std::uint64_t u_seed = 0;
    double u_shift = 0.0;
    aug->add_option("--in", u_in, "Input dataset (frames/ + labels/)")->required();
    aug->add_option("--out", u_out, "Output directory")->required();
    auto* u_spec_opt = aug->add_option("--spec", u_spec, "JSON augment spec");
    auto* u_preset_opt = aug->add_option("--preset", u_preset, "Named spec (none, ras-2, standard+ras, ...)");
    u_spec_opt->excludes(u_preset_opt);
    auto* u_seed_opt = aug->add_option("--seed", u_seed, "Seed override");
    auto* u_shift_opt = aug->add_option("--shift", u_shift, "Append a constant altitude shift (meters)");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score detections against ground-truth labels");
    std::string e_gt, e_det, e_points, e_config, e_class, e_out;
    double e_iou = 0.0;
    int e_min_points = 0;
    bool e_strict = false;
    ev->add_option("--gt", e_gt, "Ground-truth label directory")->required();
    ev->add_option("--det", e_det, "Detection directory")->required();
    ev->add_option("--points", e_points, "Point cloud directory used to count GT points");
    ev->add_option("--config", e_config, "JSON eval config");
    auto* e_iou_opt = ev->add_option("--iou", e_iou, "IoU threshold");
    auto* e_min_opt = ev->add_option("--min-points", e_min_points, "Ignore GTs with fewer points");
    auto* e_class_opt = ev->add_option("--class", e_class, "Evaluated class");
    ev->add_flag("--strict", e_strict, "Evaluate each difficulty on its own GTs only");
    ev->add_option("--out", e_out, "Write report.json and report.txt here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (*gen) {
            GenSceneFileConfig cfg;
            if (!g_config.empty()) cfg = gen_scene_config_from_json(read_text_file(g_config));
            if (!g_scenario.empty()) cfg.scene.scenario = parse_scenario(g_scenario);
            if (*g_objects_opt) cfg.scene.n_objects = g_objects;
            if (*g_bench_opt) cfg.scene.bench_height_m = g_bench;
            if (*g_seed_opt) cfg.scene.seed = g_seed;
            if (*g_ppr_opt) cfg.lidar.points_per_rotation = g_ppr;
            if (*g_channels_opt) cfg.lidar.channels = g_channels;
            if (g_no_noise) cfg.lidar.range_noise_min_m = cfg.lidar.range_noise_max_m = 0.0;
            if (g_format == "bin") {
                cfg.format = CloudFormat::XyzBin;
            } else if (g_format == "ply") {
                cfg.format = CloudFormat::Ply;
            } else if (!g_format.empty()) {
                throw ValidationError("--format must be 'bin' or 'ply'");
            }
            AnnotateConfig rubric;
            if (*g_min_opt) rubric.min_points = g_min_points;
            rubric.validate();
            const Scene scene = generate_dataset(cfg.scene, cfg.lidar, g_frames, g_out, cfg.format, rubric, jobs);
            std::size_t objects = 0;
            std::array<std::size_t, 3> hist{};
            for (const auto& t : scene.truth) {
                objects += t.size();
                for (const auto& l : t) ++hist[static_cast<std::size_t>(l.difficulty)];
            }
            if (as_json) {
                out << json{{"frames", scene.frames.size()},
                            {"objects", objects},
                            {"difficulty_histogram", hist},
                            {"scenario", scenario_name(cfg.scene.scenario)}}
                           .dump()
                    << "\n";
            } else {
                out << "generated " << scene.frames.size() << " frames (" << objects << " objects, "
                    << scenario_name(cfg.scene.scenario) << ") in " << g_out << "\n";
            }
        } else if (*ann) {
            require_dir(a_dataset, "dataset");
            AnnotateFileConfig cfg;
            if (!a_config.empty()) cfg = annotate_config_from_json(read_text_file(a_config));
            if (*a_min_opt) cfg.annotate.min_points = a_min_points;
            if (a_foreground_only) cfg.annotate.emit_background = false;
            std::optional<fs::path> out_dir;
            if (!a_out.empty()) out_dir = a_out;
            const auto summary = annotate_dataset(a_dataset, cfg.annotate, cfg.registry, out_dir, jobs);
            print_warnings(summary.warnings, verbose, err);
            if (as_json) {
                out << json{{"frames", summary.frames},
                            {"labels", summary.labels},
                            {"filtered", summary.filtered},
                            {"warnings", summary.warnings.size()}}
                           .dump()
                    << "\n";
            } else {
                out << "annotated " << summary.frames << " frames: " << summary.labels << " labels, "
                    << summary.filtered << " filtered\n";
            }
        } else if (*aug) {
            require_dir(u_in, "input");
            AugmentSpec spec;
            if (*u_spec_opt) {
                spec = AugmentSpec::from_json(read_text_file(u_spec));
            } else if (*u_preset_opt) {
                spec = AugmentSpec::preset(u_preset);
            } else if (!*u_shift_opt) {
                throw ValidationError("augment needs --spec, --preset or --shift");
            }
            if (*u_seed_opt) spec.seed = u_seed;
            if (*u_shift_opt) spec.steps.emplace_back(ConstantAltitudeShift{u_shift});
            const auto summary = augment_dataset(u_in, u_out, spec, jobs);
            if (as_json) {
                out << json{{"frames", summary.frames}, {"labels", summary.labels}, {"seed", spec.seed}}.dump()
                    << "\n";
            } else {
                out << "augmented " << summary.frames << " frames into " << u_out << "\n";
            }
        } else if (*ev) {
            require_dir(e_gt, "ground-truth");
            EvalConfig cfg;
            if (!e_config.empty()) cfg = eval_config_from_json(read_text_file(e_config));
            if (*e_iou_opt) cfg.iou_threshold = e_iou;
            if (*e_min_opt) cfg.min_points = e_min_points;
            if (*e_class_opt) cfg.class_name = e_class;
            if (e_strict) cfg.nested = false;
            std::optional<fs::path> points;
            if (!e_points.empty()) {
                require_dir(e_points, "point cloud");
                points = e_points;
            }
            const auto report = evaluate(e_gt, e_det, cfg, points);
            print_warnings(report.warnings, verbose, err);
            if (!e_out.empty()) {
                write_text_file(fs::path(e_out) / "report.json", report.to_json());
                write_text_file(fs::path(e_out) / "report.txt", report.to_table());
            }
            out << (as_json ? report.to_json() : report.to_table());
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace altimine::cli
