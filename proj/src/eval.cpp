#include "altimine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <json.hpp>

#include "altimine/errors.hpp"

namespace altimine {

// ---------------------------------------------------------------------------
// Detection files

std::string format_detection_line(const Detection& det) {
    if (!std::isfinite(det.score)) throw ValidationError("detection score must be finite");
    LabelRecord l;
    l.box = det.box;
    l.class_name = det.class_name;
    // The difficulty column is unused for detections and always written as 0.
    l.difficulty = 0;
    return format_label_line(l) + " " + format_double(det.score);
}

Detection parse_detection_line(std::string_view line, const std::string& context) {
    const auto cut = line.rfind(' ');
    if (cut == std::string_view::npos) throw FormatError(context + ": expected 10 space-separated tokens");
    const LabelRecord l = parse_label_line(line.substr(0, cut), context);
    Detection d;
    d.box = l.box;
    d.class_name = l.class_name;
    try {
        d.score = parse_double(line.substr(cut + 1));
    } catch (const FormatError& e) {
        throw FormatError(context + ": score " + e.what());
    }
    return d;
}

void write_detection_file(const fs::path& path, const std::vector<Detection>& dets) {
    std::string out;
    for (const auto& d : dets) out += format_detection_line(d) + "\n";
    write_text_file(path, out);
}

std::vector<Detection> read_detection_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::vector<Detection> out;
    std::size_t start = 0, line_no = 1;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty()) out.push_back(parse_detection_line(line, path.string() + ":" + std::to_string(line_no)));
        start = end + 1;
        ++line_no;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matching

std::string metric_name(Metric m) { return m == Metric::Bev ? "BEV" : "3D"; }

double box_iou(Metric m, const Box3D& a, const Box3D& b) {
    return m == Metric::Bev ? bev_iou(a, b) : iou_3d(a, b);
}

FrameMatch match_frame(const std::vector<LabelRecord>& gts, const std::vector<Detection>& dets, Metric metric,
                       double iou_threshold, int difficulty, const MatchOptions& opts) {
    FrameMatch m;
    m.det_outcome.assign(dets.size(), MatchOutcome::FalsePositive);
    m.gt_matched.assign(gts.size(), false);
    m.gt_eligible.assign(gts.size(), false);
    std::vector<bool> gt_ignored(gts.size(), false);

    auto in_class = [&](const std::string& name) { return opts.class_name.empty() || name == opts.class_name; };
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const auto& gt = gts[g];
        if (!in_class(gt.class_name)) continue;
        const bool level_ok = opts.nested ? gt.difficulty <= difficulty : gt.difficulty == difficulty;
        const bool points_ok = !gt.num_points || *gt.num_points >= static_cast<std::size_t>(std::max(0, opts.min_points));
        if (level_ok && points_ok) {
            m.gt_eligible[g] = true;
            ++m.eligible_gt;
        } else {
            gt_ignored[g] = true;
            ++m.ignored_gt;
        }
    }

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    for (auto d : order) {
        const auto& det = dets[d];
        if (!in_class(det.class_name)) {
            m.det_outcome[d] = MatchOutcome::Ignored;
            continue;
        }
        double best = -1.0;
        std::size_t best_gt = gts.size();
        bool covers_ignored = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gts[g].class_name != det.class_name) continue;
            if (m.gt_eligible[g] && m.gt_matched[g]) continue;
            if (!m.gt_eligible[g] && !gt_ignored[g]) continue;
            const double iou = box_iou(metric, det.box, gts[g].box);
            if (iou < iou_threshold) continue;
            if (m.gt_eligible[g]) {
                if (iou > best) {
                    best = iou;
                    best_gt = g;
                }
            } else {
                covers_ignored = true;
            }
        }
        if (best_gt < gts.size()) {
            m.gt_matched[best_gt] = true;
            m.det_outcome[d] = MatchOutcome::TruePositive;
        } else if (covers_ignored) {
            m.det_outcome[d] = MatchOutcome::Ignored;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Average precision

double ap_r40(std::vector<ScoredDetection> stream, std::size_t total_eligible_gt, int recall_positions) {
    if (recall_positions < 1) throw ValidationError("recall_positions must be >= 1");
    if (total_eligible_gt == 0) return stream.empty() ? 100.0 : 0.0;
    std::stable_sort(stream.begin(), stream.end(),
                     [](const ScoredDetection& a, const ScoredDetection& b) { return a.score > b.score; });
    const std::size_t n = stream.size();
    std::vector<std::size_t> tp(n);
    std::vector<double> precision(n);
    std::size_t cum_tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (stream[i].true_positive) ++cum_tp;
        tp[i] = cum_tp;
        precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
    }
    // Suffix maximum: best precision at any later cut-off.
    for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

    const auto positions = static_cast<std::size_t>(recall_positions);
    double sum = 0.0;
    std::size_t i = 0;
    for (std::size_t k = 1; k <= positions; ++k) {
        // Recall tp/G >= k/R, compared in integers.
        while (i < n && tp[i] * positions < k * total_eligible_gt) ++i;
        if (i == n) break;
        sum += precision[i];
    }
    return 100.0 * sum / static_cast<double>(positions);
}

// ---------------------------------------------------------------------------
// Reports

void EvalConfig::validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ValidationError("iou_threshold must lie in (0, 1]");
    if (recall_positions < 1) throw ValidationError("recall_positions must be >= 1");
    if (min_points < 0) throw ValidationError("min_points must be >= 0");
}

namespace {

CellResult score_cell(std::vector<ScoredDetection> stream, std::size_t eligible, std::size_t ignored,
                      int recall_positions) {
    CellResult c;
    c.eligible_gt = eligible;
    c.ignored_gt = ignored;
    c.detections = stream.size();
    c.ap = ap_r40(stream, eligible, recall_positions);
    std::stable_sort(stream.begin(), stream.end(),
                     [](const ScoredDetection& a, const ScoredDetection& b) { return a.score > b.score; });
    double best_f1 = -1.0;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream[i].true_positive) ++tp;
        const std::size_t fp = i + 1 - tp;
        const double f1 = eligible == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(i + 1 + eligible);
        if (f1 > best_f1) {
            best_f1 = f1;
            c.tp_best = tp;
            c.fp_best = fp;
        }
    }
    c.tp_total = tp;
    c.fp_total = stream.size() - tp;
    return c;
}

const char* kLevelNames[3] = {"Easy", "Mod.", "Hard"};

}  // namespace

EvalReport evaluate_frames(const std::vector<FrameEvalInput>& frames, const EvalConfig& cfg) {
    cfg.validate();
    EvalReport report;
    report.config = cfg;
    report.frames = frames.size();
    const MatchOptions opts{cfg.nested, cfg.min_points, cfg.class_name};
    for (auto metric : kMetrics) {
        for (int d = 0; d < 3; ++d) {
            std::vector<ScoredDetection> stream;
            std::size_t eligible = 0, ignored = 0;
            for (const auto& f : frames) {
                const auto m = match_frame(f.gts, f.dets, metric, cfg.iou_threshold, d, opts);
                eligible += m.eligible_gt;
                ignored += m.ignored_gt;
                for (std::size_t i = 0; i < f.dets.size(); ++i) {
                    if (m.det_outcome[i] == MatchOutcome::Ignored) continue;
                    stream.push_back({f.dets[i].score, m.det_outcome[i] == MatchOutcome::TruePositive});
                }
            }
            auto& cell = report.cells[static_cast<int>(metric)][d];
            cell = score_cell(std::move(stream), eligible, ignored, cfg.recall_positions);
            if (eligible == 0) {
                report.warnings.push_back(metric_name(metric) + " " + kLevelNames[d] +
                                          ": no eligible ground truth; AP is " +
                                          (cell.detections == 0 ? "vacuously 100" : "0"));
            }
        }
    }
    return report;
}

EvalReport evaluate(const fs::path& gt_dir, const fs::path& det_dir, const EvalConfig& cfg,
                    std::optional<fs::path> points_dir) {
    cfg.validate();
    const auto gt_ids = list_frame_ids(gt_dir, ".txt");
    std::vector<FrameId> det_ids;
    if (fs::exists(det_dir)) det_ids = list_frame_ids(det_dir, ".txt");
    const std::set<FrameId> gt_set(gt_ids.begin(), gt_ids.end());
    for (auto id : det_ids) {
        if (!gt_set.count(id)) {
            throw ValidationError("frame_id " + std::to_string(id) + " has detections in " + det_dir.string() +
                                  " but no ground truth in " + gt_dir.string());
        }
    }
    const std::set<FrameId> det_set(det_ids.begin(), det_ids.end());

    std::vector<FrameEvalInput> frames;
    std::size_t missing_det = 0;
    for (auto id : gt_ids) {
        FrameEvalInput f;
        f.frame_id = id;
        f.gts = read_label_file(gt_dir / (frame_stem(id) + ".txt"));
        if (det_set.count(id)) {
            f.dets = read_detection_file(det_dir / (frame_stem(id) + ".txt"));
        } else {
            ++missing_det;
        }
        if (points_dir) {
            std::optional<fs::path> cloud;
            for (const char* ext : {".bin", ".ply"}) {
                auto p = *points_dir / (frame_stem(id) + ext);
                if (fs::is_regular_file(p)) {
                    cloud = p;
                    break;
                }
            }
            if (!cloud) {
                throw IoError(points_dir->string() + ": no point cloud for frame_id " + std::to_string(id));
            }
            const auto pcd = read_point_cloud(*cloud);
            for (auto& gt : f.gts) gt.num_points = crop_indices(pcd, OrientedBoxFull::from_box(gt.box)).size();
        }
        frames.push_back(std::move(f));
    }
    EvalReport report = evaluate_frames(frames, cfg);
    if (missing_det > 0) {
        report.warnings.insert(report.warnings.begin(), std::to_string(missing_det) +
                                                            " ground-truth frame(s) have no detection file");
    }
    return report;
}

std::string EvalReport::to_table() const {
    char thr[32];
    std::snprintf(thr, sizeof(thr), "%g", config.iou_threshold);
    const std::string bev = std::string("BEV at ") + thr + " IoU";
    const std::string d3 = std::string("3D at ") + thr + " IoU";
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-12s| %-26s| %-26s|\n", "Class", bev.c_str(), d3.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-12s| %-8s %-8s %-8s| %-8s %-8s %-8s|\n", "", "Easy", "Mod.", "Hard", "Easy",
                  "Mod.", "Hard");
    out += buf;
    const auto& b = cells[0];
    const auto& t = cells[1];
    std::snprintf(buf, sizeof(buf), "%-12s| %-8.2f %-8.2f %-8.2f| %-8.2f %-8.2f %-8.2f|\n",
                  config.class_name.empty() ? "all" : config.class_name.c_str(), b[0].ap, b[1].ap, b[2].ap, t[0].ap,
                  t[1].ap, t[2].ap);
    out += buf;
    return out;
}

std::string EvalReport::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    nlohmann::json counts = nlohmann::json::object();
    for (auto m : kMetrics) {
        for (int d = 0; d < 3; ++d) {
            const auto& c = cell(m, d);
            j[metric_name(m)][std::to_string(d)] = c.ap;
            counts[metric_name(m)][std::to_string(d)] = {
                {"eligible_gt", c.eligible_gt}, {"ignored_gt", c.ignored_gt}, {"detections", c.detections},
                {"tp_total", c.tp_total},       {"fp_total", c.fp_total},     {"tp_best", c.tp_best},
                {"fp_best", c.fp_best}};
        }
    }
    j["counts"] = counts;
    j["frames"] = frames;
    j["config"] = {{"iou_threshold", config.iou_threshold},
                   {"recall_positions", config.recall_positions},
                   {"nested", config.nested},
                   {"min_points", config.min_points},
                   {"class_name", config.class_name}};
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

}  // namespace altimine
