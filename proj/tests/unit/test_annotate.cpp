#include <doctest.h>

#include <random>

#include "altimine/annotate.hpp"
#include "altimine/errors.hpp"
#include "altimine/simgen.hpp"
#include "test_util.hpp"

using namespace altimine;
using testutil::TempDir;

namespace {

ObjectInstance make_object(const std::string& name, const Vec3& base, const Vec3& size, double yaw) {
    ObjectInstance o;
    o.name = name;
    o.class_name = "Excavator";
    o.size = size;
    o.pose.position = base;
    o.pose.orientation = Quaternion::from_yaw(yaw);
    return o;
}

// Points on the faces of a yaw box, generated from the box parameters directly.
std::vector<Vec3> surface_points(const Vec3& center, const Vec3& size, double yaw, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_int_distribution<int> face(0, 5);
    const double c = std::cos(yaw), s = std::sin(yaw);
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i) {
        Vec3 l(u(rng), u(rng), u(rng));
        const int f = face(rng);
        l[f / 2] = f % 2 ? 0.5 : -0.5;
        l = l.cwiseProduct(size);
        out.emplace_back(center.x() + c * l.x() - s * l.y(), center.y() + s * l.x() + c * l.y(), center.z() + l.z());
    }
    return out;
}

}  // namespace

TEST_CASE("difficulty rubric examples") {
    const AnnotateConfig cfg;
    CHECK(classify_difficulty(5, 1000, cfg) == Difficulty::Easy);
    CHECK(classify_difficulty(15, 500, cfg) == Difficulty::Hard);
    CHECK(classify_difficulty(10.0, 800, cfg) == Difficulty::Moderate);
    CHECK(classify_difficulty(5, 99, cfg) == Difficulty::Filtered);
    CHECK(classify_difficulty(15, 1000, cfg) == Difficulty::Moderate);
    CHECK(classify_difficulty(5, 500, cfg) == Difficulty::Moderate);
}

TEST_CASE("difficulty boundary table") {
    const AnnotateConfig cfg;
    struct Row {
        double h;
        std::size_t n;
        Difficulty d;
    };
    const Row rows[] = {{9.99, 99, Difficulty::Filtered},  {9.99, 100, Difficulty::Moderate},
                        {9.99, 750, Difficulty::Moderate}, {9.99, 751, Difficulty::Easy},
                        {10.0, 99, Difficulty::Filtered},  {10.0, 100, Difficulty::Hard},
                        {10.0, 750, Difficulty::Hard},     {10.0, 751, Difficulty::Moderate}};
    for (const auto& r : rows) {
        CAPTURE(r.h);
        CAPTURE(r.n);
        CHECK(classify_difficulty(r.h, r.n, cfg) == r.d);
    }
}

TEST_CASE("height variation") {
    CHECK(height_variation(Pose{}, Box3D({10, 0, 0}, {1, 1, 1}, 0)) == 0.0);
    CHECK(height_variation(Pose{}, Box3D({10, 0, -12}, {1, 1, 1}, 0)) == 12.0);

    SceneConfig sc;
    sc.scenario = Scenario::SensorOnBench;
    sc.bench_height_m = 11.0;
    sc.seed = 4;
    const Scene scene = generate_scene(sc, 5);
    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        for (const auto& obj : scene.frames[f].objects) {
            const auto boxes = object_boxes_in_sensor(obj, scene.frames[f].sensor_pose);
            CHECK(height_variation(scene.frames[f].sensor_pose, boxes.label_box) > 10.0);
        }
    }
}

TEST_CASE("center lift and sensor transform") {
    Pose sensor;
    sensor.position = {1, 2, 5};
    sensor.orientation = Quaternion::from_yaw(kPi / 2);
    const auto obj = make_object("a", {1, 12, 0}, {2, 4, 6}, kPi / 2 + 0.25);
    const auto b = object_boxes_in_sensor(obj, sensor);
    CHECK((b.label_box.center - Vec3(10, 0, -2)).norm() < 1e-12);
    CHECK(b.label_box.yaw == doctest::Approx(0.25));
    CHECK(b.label_box.size == obj.size);
}

TEST_CASE("annotate_frame with no objects") {
    FrameRecord f;
    PointCloud pcd;
    pcd.points = {{1, 2, 3}, {4, 5, 6}};
    const auto a = annotate_frame(f, pcd, AnnotateConfig{}, ClassRegistry::default_registry());
    CHECK(a.labels.empty());
    CHECK(a.per_point_class == std::vector<int>{0, 0});
}

TEST_CASE("annotate_frame recovers a sampled box") {
    std::mt19937_64 rng(8);
    FrameRecord f;
    f.frame_id = 4;
    const Vec3 size(8.65, 23.9, 10.02);
    f.objects.push_back(make_object("exc_0", {30, -5, -4}, size, 0.7));
    const Vec3 center(30, -5, -4 + size.z() / 2);
    PointCloud pcd;
    pcd.points = surface_points(center, size, 0.7, 5000, rng);
    for (int i = 0; i < 300; ++i) pcd.points.emplace_back(-30.0 - i, 0, 0);

    const auto a = annotate_frame(f, pcd, AnnotateConfig{}, ClassRegistry::default_registry());
    REQUIRE(a.labels.size() == 1);
    CHECK((a.labels[0].box.center - center).norm() < 1e-9);
    CHECK(a.labels[0].box.yaw == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(a.labels[0].num_points == 5000u);
    CHECK(a.labels[0].difficulty == 0);
    CHECK(a.crops.at("exc_0").size() == 5000);
    std::size_t fg = 0;
    for (int c : a.per_point_class) fg += c == 1;
    CHECK(fg == 5000);
}

TEST_CASE("annotate_frame filters sparse objects") {
    std::mt19937_64 rng(2);
    FrameRecord f;
    const Vec3 size(2, 2, 2);
    f.objects.push_back(make_object("sparse", {10, 0, 0}, size, 0));
    PointCloud pcd;
    pcd.points = surface_points({10, 0, 1}, size, 0, 50, rng);
    const auto a = annotate_frame(f, pcd, AnnotateConfig{}, ClassRegistry::default_registry());
    CHECK(a.labels.empty());
    CHECK(a.filtered == 1);
    CHECK(a.crops.empty());
    for (int c : a.per_point_class) CHECK(c == 0);

    AnnotateConfig keep;
    keep.min_points = 0;
    const auto k = annotate_frame(f, pcd, keep, ClassRegistry::default_registry());
    REQUIRE(k.labels.size() == 1);
    CHECK(k.labels[0].difficulty == 2);
}

TEST_CASE("annotate_frame errors and warnings") {
    FrameRecord f;
    auto o = make_object("x", {10, 0, 0}, {1, 1, 1}, 0);
    o.class_name = "Truck";
    f.objects.push_back(o);
    CHECK_THROWS_AS(annotate_frame(f, PointCloud{}, AnnotateConfig{}, ClassRegistry::default_registry()),
                    ValidationError);

    FrameRecord t;
    auto tilted = make_object("t", {10, 0, 0}, {1, 1, 1}, 0);
    tilted.pose.orientation = Quaternion::from_euler(0.2, 0, 0);
    t.objects.push_back(tilted);
    t.objects.push_back(make_object("far", {500, 0, 0}, {1, 1, 1}, 0));
    AnnotateConfig cfg;
    cfg.min_points = 0;
    const auto a = annotate_frame(t, PointCloud{}, cfg, ClassRegistry::default_registry());
    CHECK(a.warnings.size() == 2);

    AnnotateConfig bad;
    bad.density_floor = 800;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("annotate_dataset end to end") {
    TempDir tmp;
    SceneConfig sc;
    sc.seed = 12;
    LidarConfig lc;
    lc.range_noise_min_m = lc.range_noise_max_m = 0.0;
    lc.points_per_rotation = 1024;
    lc.channels = 64;
    AnnotateConfig cfg;
    cfg.min_points = 0;
    const Scene scene = generate_dataset(sc, lc, 10, tmp.path(), CloudFormat::XyzBin, cfg);
    const auto summary = annotate_dataset(tmp.path(), cfg, ClassRegistry::default_registry());
    CHECK(summary.frames == 10);
    CHECK(summary.filtered == 0);

    const DatasetLayout layout{tmp.path()};
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
        const auto labels = read_label_file(layout.label_file(scene.frames[i].frame_id));
        const auto& truth = scene.truth[i];
        REQUIRE(labels.size() == truth.size());
        for (std::size_t k = 0; k < labels.size(); ++k) {
            CHECK((labels[k].box.center - truth[k].box.center).norm() < 1e-6);
            CHECK(std::abs(normalize_angle(labels[k].box.yaw - truth[k].box.yaw)) < 1e-6);
            CHECK(labels[k].difficulty == truth[k].difficulty);
            CHECK(labels[k].class_name == truth[k].class_name);
        }
    }
    CHECK_FALSE(fs::exists(tmp / ".annotate_staging"));

    const auto first = testutil::slurp(layout.label_file(0)) + testutil::slurp(layout.semantic_file(3));
    annotate_dataset(tmp.path(), cfg, ClassRegistry::default_registry(), std::nullopt, 3);
    CHECK(first == testutil::slurp(layout.label_file(0)) + testutil::slurp(layout.semantic_file(3)));
}

TEST_CASE("annotate_dataset edge cases") {
    TempDir tmp;
    testutil::dump(tmp / "poses.json", R"({"frames": []})");
    const auto s = annotate_dataset(tmp.path(), AnnotateConfig{}, ClassRegistry::default_registry());
    CHECK(s.frames == 0);
    CHECK(s.labels == 0);
    CHECK(s.filtered == 0);

    TempDir missing;
    testutil::dump(missing / "poses.json", R"({"frames": [{"frame_id": 5,
        "sensor_pose": {"position": [0,0,0], "orientation": [1,0,0,0]}}]})");
    try {
        annotate_dataset(missing.path(), AnnotateConfig{}, ClassRegistry::default_registry());
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("frame_id 5") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(missing / "labels"));
}
