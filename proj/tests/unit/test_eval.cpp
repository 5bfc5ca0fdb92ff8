#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "altimine/errors.hpp"
#include "altimine/eval.hpp"
#include "altimine/simgen.hpp"
#include "test_util.hpp"

using namespace altimine;
using testutil::TempDir;

namespace {

LabelRecord gt(double x, double y, int difficulty, double yaw = 0.0) {
    LabelRecord l;
    l.box = Box3D({x, y, 0}, {4, 8, 3}, yaw);
    l.class_name = "Excavator";
    l.difficulty = difficulty;
    return l;
}

Detection det(double x, double y, double score, double yaw = 0.0) {
    return {Box3D({x, y, 0}, {4, 8, 3}, yaw), "Excavator", score};
}

// PR staircase straight from the definition: for each recall position r = k/R, the
// best precision over every cut-off whose recall reaches r. Fractions compared exactly.
double brute_ap(const std::vector<ScoredDetection>& stream, std::size_t g, int r_pos) {
    if (g == 0) return stream.empty() ? 100.0 : 0.0;
    std::vector<std::size_t> order(stream.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return stream[a].score > stream[b].score; });
    double sum = 0;
    for (int k = 1; k <= r_pos; ++k) {
        double best = 0;
        for (std::size_t cut = 1; cut <= order.size(); ++cut) {
            std::size_t tp = 0;
            for (std::size_t i = 0; i < cut; ++i) tp += stream[order[i]].true_positive;
            if (tp * static_cast<std::size_t>(r_pos) >= static_cast<std::size_t>(k) * g)
                best = std::max(best, static_cast<double>(tp) / static_cast<double>(cut));
        }
        sum += best;
    }
    return 100.0 * sum / r_pos;
}

}  // namespace

TEST_CASE("detection line format") {
    const Detection d = det(1, 2, 0.75);
    const auto line = format_detection_line(d);
    CHECK(line == "1 2 0 4 8 3 0 Excavator 0 0.75");
    const auto back = parse_detection_line(line);
    CHECK(back.box == d.box);
    CHECK(back.score == 0.75);
    CHECK_THROWS_AS(parse_detection_line("1 2 0 4 8 3 0 Excavator 0"), FormatError);
    CHECK_THROWS_AS(parse_detection_line("1 2 0 4 8 3 0 Excavator 0 nan"), FormatError);
    CHECK_THROWS_AS(format_detection_line(det(0, 0, INFINITY)), ValidationError);
}

TEST_CASE("match_frame examples") {
    auto empty = match_frame({}, {}, Metric::Bev, 0.7, 0);
    CHECK(empty.det_outcome.empty());
    CHECK(empty.eligible_gt == 0);

    auto one = match_frame({gt(10, 0, 0)}, {det(10, 0, 0.9)}, Metric::ThreeD, 0.7, 0);
    CHECK(one.det_outcome[0] == MatchOutcome::TruePositive);

    auto two = match_frame({gt(10, 0, 0)}, {det(10.1, 0, 0.5), det(10, 0, 0.9)}, Metric::Bev, 0.7, 0);
    CHECK(two.det_outcome[1] == MatchOutcome::TruePositive);
    CHECK(two.det_outcome[0] == MatchOutcome::FalsePositive);

    auto ign = match_frame({gt(10, 0, 0), gt(-20, 0, 2)}, {det(-20, 0, 0.9), det(50, 0, 0.8)}, Metric::Bev, 0.7, 0);
    CHECK(ign.det_outcome[0] == MatchOutcome::Ignored);
    CHECK(ign.det_outcome[1] == MatchOutcome::FalsePositive);
    CHECK(ign.eligible_gt == 1);
    CHECK(ign.ignored_gt == 1);

    auto hard = match_frame({gt(10, 0, 0), gt(-20, 0, 2)}, {det(-20, 0, 0.9)}, Metric::Bev, 0.7, 2);
    CHECK(hard.det_outcome[0] == MatchOutcome::TruePositive);
    auto strict = match_frame({gt(10, 0, 0), gt(-20, 0, 2)}, {det(10, 0, 0.9)}, Metric::Bev, 0.7, 2,
                              MatchOptions{false, 0, ""});
    CHECK(strict.det_outcome[0] == MatchOutcome::Ignored);
    CHECK(strict.eligible_gt == 1);
}

TEST_CASE("match_frame tie goes to lower gt index") {
    // Both GTs overlap the detection equally.
    const auto m = match_frame({gt(0, 0.5, 0), gt(0, -0.5, 0)}, {det(0, 0, 1.0)}, Metric::Bev, 0.5, 0);
    CHECK(m.gt_matched[0]);
    CHECK_FALSE(m.gt_matched[1]);
}

TEST_CASE("match_frame min_points and class filter") {
    auto sparse = gt(0, 0, 0);
    sparse.num_points = 10;
    MatchOptions o;
    o.min_points = 100;
    const auto m = match_frame({sparse}, {det(0, 0, 1.0)}, Metric::Bev, 0.7, 2, o);
    CHECK(m.eligible_gt == 0);
    CHECK(m.det_outcome[0] == MatchOutcome::Ignored);

    Detection other = det(0, 0, 1.0);
    other.class_name = "Truck";
    MatchOptions only;
    only.class_name = "Excavator";
    const auto c = match_frame({gt(0, 0, 0)}, {other}, Metric::Bev, 0.7, 0, only);
    CHECK(c.det_outcome[0] == MatchOutcome::Ignored);
}

TEST_CASE("ap_r40 examples") {
    CHECK(ap_r40({{1.0, true}, {0.9, true}}, 2) == doctest::Approx(100.0));
    CHECK(ap_r40({}, 3) == 0.0);
    CHECK(ap_r40({{0.9, true}, {0.8, false}, {0.7, true}}, 2) == doctest::Approx(83.3333333).epsilon(1e-9));
    CHECK(std::abs(ap_r40({{0.9, true}, {0.8, false}, {0.7, true}}, 2) - 83.33) < 0.01);
    CHECK(ap_r40({}, 0) == 100.0);
    CHECK(ap_r40({{0.5, false}}, 0) == 0.0);
    CHECK_THROWS_AS(ap_r40({}, 1, 0), ValidationError);
}

TEST_CASE("ap_r40 equals the brute-force staircase") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> nd(0, 7), ng(0, 5), sc(0, 4);
    std::bernoulli_distribution tp(0.5);
    for (int t = 0; t < 3000; ++t) {
        std::vector<ScoredDetection> s;
        const int n = nd(rng);
        for (int i = 0; i < n; ++i) s.push_back({0.1 + 0.2 * sc(rng), tp(rng)});
        std::size_t tps = 0;
        for (const auto& x : s) tps += x.true_positive;
        const std::size_t g = tps + static_cast<std::size_t>(ng(rng));
        for (int r : {40, 11, 7}) {
            CHECK(std::round(ap_r40(s, g, r) * 1e9) == std::round(brute_ap(s, g, r) * 1e9));
        }
    }
}

TEST_CASE("ap_r40 monotonicity and score-shift invariance") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> score(0.01, 1.0);
    std::bernoulli_distribution tp(0.6);
    for (int t = 0; t < 500; ++t) {
        std::vector<ScoredDetection> s;
        for (int i = 0; i < 12; ++i) s.push_back({score(rng), tp(rng)});
        const std::size_t g = 15;
        const double base = ap_r40(s, g);

        auto low = s;
        low.push_back({0.0, false});
        CHECK(ap_r40(low, g) <= base);

        auto fewer = s;
        auto it = std::find_if(fewer.begin(), fewer.end(), [](auto& x) { return !x.true_positive; });
        if (it != fewer.end()) {
            fewer.erase(it);
            CHECK(ap_r40(fewer, g) >= base);
        }

        auto shifted = s;
        for (auto& x : shifted) x.score = std::exp(3 * x.score) - 7;
        CHECK(ap_r40(shifted, g) == base);
    }
}

TEST_CASE("evaluate_frames perfect and empty detections") {
    std::vector<FrameEvalInput> frames(2);
    frames[0].gts = {gt(10, 0, 0), gt(-20, 10, 1)};
    frames[1].gts = {gt(30, 30, 2), gt(0, 40, 0, 0.7)};
    for (auto& f : frames)
        for (const auto& g : f.gts) f.dets.push_back({g.box, g.class_name, 1.0});
    EvalConfig cfg;
    const auto perfect = evaluate_frames(frames, cfg);
    for (auto m : kMetrics)
        for (int d = 0; d < 3; ++d) CHECK(perfect.cell(m, d).ap == 100.0);

    for (auto& f : frames) f.dets.clear();
    const auto none = evaluate_frames(frames, cfg);
    for (auto m : kMetrics)
        for (int d = 0; d < 3; ++d) CHECK(none.cell(m, d).ap == 0.0);
}

TEST_CASE("AP switches at the closed-form offset boundary") {
    // Axis-aligned boxes shifted along x by s: IoU = (dx - s) / (dx + s), so IoU >= 0.7 iff s <= 0.3 dx / 1.7.
    const double dx = 4.0;
    const double s_star = 0.3 * dx / 1.7;
    EvalConfig cfg;
    cfg.min_points = 0;
    for (double s : {s_star * 0.99, s_star * 1.01}) {
        std::vector<FrameEvalInput> frames(20);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            frames[i].frame_id = i;
            frames[i].gts = {gt(10, 0, 0), gt(-15, 5, 0, kPi / 2)};
            frames[i].dets = {{Box3D({10 + s, 0, 0}, {4, 8, 3}, 0), "Excavator", 0.9},
                              {Box3D({-15, 5 + s, 0}, {4, 8, 3}, kPi / 2), "Excavator", 0.8}};
        }
        const auto r = evaluate_frames(frames, cfg);
        const double expected = s < s_star ? 100.0 : 0.0;
        for (auto m : kMetrics)
            for (int d = 0; d < 3; ++d) CHECK(r.cell(m, d).ap == expected);
    }
}

TEST_CASE("evaluate on directories") {
    TempDir tmp;
    const fs::path gtd = tmp / "gt", detd = tmp / "det";
    write_label_file(gtd / "000000.txt", {gt(10, 0, 0), gt(-20, 0, 1)});
    write_label_file(gtd / "000001.txt", {gt(10, 30, 2)});
    write_detection_file(detd / "000000.txt", {det(10, 0, 0.9), det(-20, 0, 0.8), det(50, 50, 0.3)});
    EvalConfig cfg;
    const auto r = evaluate(gtd, detd, cfg);
    CHECK(r.frames == 2);
    CHECK(r.cell(Metric::Bev, 2).eligible_gt == 3);
    CHECK(r.cell(Metric::Bev, 0).eligible_gt == 1);
    CHECK(r.cell(Metric::Bev, 0).ap == 100.0);
    CHECK(r.warnings.front().find("no detection file") != std::string::npos);

    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["BEV"]["0"].get<double>() == 100.0);
    CHECK(j["3D"]["2"].is_number());
    CHECK(r.to_table().find("BEV at 0.7 IoU") != std::string::npos);

    write_detection_file(detd / "000004.txt", {det(0, 0, 1.0)});
    try {
        evaluate(gtd, detd, cfg);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("frame_id 4") != std::string::npos);
    }
}

TEST_CASE("evaluate counts points for the min_points filter") {
    TempDir tmp;
    write_label_file(tmp / "gt/000000.txt", {gt(10, 0, 0), gt(-20, 0, 0)});
    write_detection_file(tmp / "det/000000.txt", {det(10, 0, 0.9), det(-20, 0, 0.8)});
    PointCloud pcd;
    for (int i = 0; i < 150; ++i) pcd.points.emplace_back(10 + 0.01 * i, 0, 0);
    for (int i = 0; i < 20; ++i) pcd.points.emplace_back(-20 + 0.01 * i, 0, 0);
    write_point_cloud(tmp / "pts/000000.bin", pcd, CloudFormat::XyzBin);
    EvalConfig cfg;
    const auto r = evaluate(tmp / "gt", tmp / "det", cfg, tmp / "pts");
    CHECK(r.cell(Metric::Bev, 0).eligible_gt == 1);
    CHECK(r.cell(Metric::Bev, 0).ignored_gt == 1);
    CHECK(r.cell(Metric::Bev, 0).ap == 100.0);
}

TEST_CASE("perfect detections on a generated dataset") {
    for (auto sc : {Scenario::SameLevel, Scenario::SensorInPit, Scenario::SensorOnBench}) {
        SceneConfig cfg;
        cfg.scenario = sc;
        cfg.seed = 3;
        LidarConfig lc;
        lc.points_per_rotation = 512;
        lc.channels = 32;
        const Scene scene = generate_scene(cfg, 4);
        std::vector<FrameEvalInput> frames;
        for (std::size_t i = 0; i < scene.frames.size(); ++i) {
            FrameEvalInput f;
            f.frame_id = scene.frames[i].frame_id;
            f.gts = scene.truth[i];
            for (const auto& g : f.gts) f.dets.push_back({g.box, g.class_name, 1.0});
            frames.push_back(f);
        }
        const auto r = evaluate_frames(frames, EvalConfig{});
        for (auto m : kMetrics)
            for (int d = 0; d < 3; ++d) CHECK(r.cell(m, d).ap == 100.0);
    }
}
