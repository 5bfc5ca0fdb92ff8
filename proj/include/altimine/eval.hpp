#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "altimine/frames.hpp"

namespace altimine {

struct Detection {
    Box3D box;
    std::string class_name;
    double score = 0.0;
};

/// Label line plus a trailing score (10 tokens).
std::string format_detection_line(const Detection& det);
Detection parse_detection_line(std::string_view line, const std::string& context = "");
void write_detection_file(const fs::path& path, const std::vector<Detection>& dets);
std::vector<Detection> read_detection_file(const fs::path& path);

enum class Metric { Bev = 0, ThreeD = 1 };
inline constexpr std::array<Metric, 2> kMetrics{Metric::Bev, Metric::ThreeD};
std::string metric_name(Metric m);
double box_iou(Metric m, const Box3D& a, const Box3D& b);

struct MatchOptions {
    /// Nested: level d uses GTs with difficulty <= d. Otherwise only difficulty == d.
    bool nested = true;
    /// GTs with a known point count below this are ignored.
    int min_points = 0;
    /// Evaluated class; empty matches every class (each detection to GTs of its own class).
    std::string class_name;
};

enum class MatchOutcome { TruePositive, FalsePositive, Ignored };

struct FrameMatch {
    std::vector<MatchOutcome> det_outcome;
    std::vector<bool> gt_matched;
    std::vector<bool> gt_eligible;
    std::size_t eligible_gt = 0;
    std::size_t ignored_gt = 0;
};

/// Greedy matching in descending score order. Each detection takes the unmatched
/// eligible GT with the highest IoU >= threshold (ties to the lower GT index);
/// failing that it is Ignored if it overlaps an ineligible GT of its class at
/// IoU >= threshold, and a false positive otherwise.
FrameMatch match_frame(const std::vector<LabelRecord>& gts, const std::vector<Detection>& dets, Metric metric,
                       double iou_threshold, int difficulty, const MatchOptions& opts = {});

struct ScoredDetection {
    double score = 0.0;
    bool true_positive = false;
};

/// Interpolated AP in percent over recall positions {1/R, ..., R/R}.
/// With no eligible GT the result is 100 when nothing was scored and 0 otherwise.
double ap_r40(std::vector<ScoredDetection> stream, std::size_t total_eligible_gt, int recall_positions = 40);

struct EvalConfig {
    double iou_threshold = 0.7;
    int recall_positions = 40;
    bool nested = true;
    int min_points = 100;
    std::string class_name = "Excavator";

    void validate() const;
};

struct CellResult {
    double ap = 0.0;
    std::size_t eligible_gt = 0;
    std::size_t ignored_gt = 0;
    std::size_t detections = 0;
    std::size_t tp_total = 0;
    std::size_t fp_total = 0;
    /// Counts at the score cut-off with the best F1.
    std::size_t tp_best = 0;
    std::size_t fp_best = 0;
};

struct EvalReport {
    EvalConfig config;
    std::size_t frames = 0;
    /// cells[metric][difficulty]
    std::array<std::array<CellResult, 3>, 2> cells{};
    std::vector<std::string> warnings;

    const CellResult& cell(Metric m, int difficulty) const { return cells[static_cast<int>(m)][difficulty]; }

    std::string to_table() const;
    std::string to_json() const;
};

struct FrameEvalInput {
    FrameId frame_id = 0;
    std::vector<LabelRecord> gts;
    std::vector<Detection> dets;
};

EvalReport evaluate_frames(const std::vector<FrameEvalInput>& frames, const EvalConfig& cfg);

/// Scores `det_dir/NNNNNN.txt` against `gt_dir/NNNNNN.txt`. When `points_dir` is given,
/// each GT's point count is measured from `points_dir/NNNNNN.{bin,ply}` for the
/// min_points filter; otherwise label files are taken as already filtered.
EvalReport evaluate(const fs::path& gt_dir, const fs::path& det_dir, const EvalConfig& cfg,
                    std::optional<fs::path> points_dir = std::nullopt);

}  // namespace altimine
