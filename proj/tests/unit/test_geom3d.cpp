#include <doctest.h>

#include <cmath>
#include <random>

#include "altimine/errors.hpp"
#include "altimine/geom3d.hpp"

using namespace altimine;

namespace {

// Rotation matrix built from elementary axis rotations, independent of the quaternion code.
Mat3 rz(double a) {
    Mat3 m;
    m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return m;
}
Mat3 ry(double a) {
    Mat3 m;
    m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return m;
}
Mat3 rx(double a) {
    Mat3 m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}

Quaternion random_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return Quaternion(n(rng), n(rng), n(rng), n(rng));
}

// Hamilton product on raw 4-tuples for the sandwich oracle.
std::array<double, 4> hamilton(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3], a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1], a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Box3D box(double x, double y, double z, double dx, double dy, double dz, double yaw) {
    return Box3D({x, y, z}, {dx, dy, dz}, yaw);
}

}  // namespace

TEST_CASE("quaternion normalizes and rejects zero") {
    const Quaternion q(2, 0, 0, 0);
    CHECK(q.w() == 1.0);
    CHECK_THROWS_AS(Quaternion(0, 0, 0, 0), ValidationError);
    CHECK_THROWS_AS(Quaternion(1e-8, 0, 0, 0), ValidationError);
    CHECK_THROWS_AS(Quaternion(std::nan(""), 0, 0, 0), ValidationError);
}

TEST_CASE("quaternion_to_euler examples") {
    const auto e0 = quaternion_to_euler(Quaternion(1, 0, 0, 0));
    CHECK(e0.roll == 0.0);
    CHECK(e0.pitch == 0.0);
    CHECK(e0.yaw == 0.0);

    const double t = 0.6;
    const auto e = quaternion_to_euler(Quaternion(std::cos(t / 2), 0, 0, std::sin(t / 2)));
    CHECK(e.yaw == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(std::abs(e.roll) < 1e-12);
    CHECK(std::abs(e.pitch) < 1e-12);
}

TEST_CASE("euler round trip against elementary rotations") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const Quaternion q = random_quaternion(rng);
        const auto e = quaternion_to_euler(q);
        const Mat3 rebuilt = rz(e.yaw) * ry(e.pitch) * rx(e.roll);
        const Mat3 m = rotation_matrix(q);
        CHECK((rebuilt - m).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("euler near gimbal lock stays finite") {
    const auto q = Quaternion::from_euler(0.1, kPi / 2, 0.3);
    const auto e = quaternion_to_euler(q);
    CHECK(std::isfinite(e.roll));
    CHECK(std::isfinite(e.pitch));
    CHECK(std::isfinite(e.yaw));
    CHECK((rz(e.yaw) * ry(e.pitch) * rx(e.roll) - rotation_matrix(q)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rotation_matrix examples") {
    CHECK(rotation_matrix(Quaternion()).isApprox(Mat3::Identity()));
    const Mat3 r = rotation_matrix(Quaternion::from_yaw(kPi / 2));
    const Vec3 y = r * Vec3::UnitX();
    CHECK((y - Vec3::UnitY()).norm() < 1e-12);
}

TEST_CASE("rotation_matrix equals the sandwich product") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion q = random_quaternion(rng);
        const Mat3 m = rotation_matrix(q);
        const std::array<double, 4> qa{q.w(), q.x(), q.y(), q.z()};
        const std::array<double, 4> qc{q.w(), -q.x(), -q.y(), -q.z()};
        for (int k = 0; k < 3; ++k) {
            std::array<double, 4> v{0, 0, 0, 0};
            v[k + 1] = 1.0;
            const auto r = hamilton(hamilton(qa, v), qc);
            const Vec3 col = m.col(k);
            CHECK(std::abs(col.x() - r[1]) < 1e-12);
            CHECK(std::abs(col.y() - r[2]) < 1e-12);
            CHECK(std::abs(col.z() - r[3]) < 1e-12);
        }
    }
}

TEST_CASE("transform_to_frame examples") {
    Pose obj;
    obj.position = {3, -2, 1};
    obj.orientation = Quaternion::from_yaw(0.4);

    const Pose same = transform_to_frame(obj, Pose{});
    CHECK((same.position - obj.position).norm() < 1e-15);
    CHECK(same.orientation.same_rotation(obj.orientation, 1e-15));

    Pose shifted;
    shifted.position = {1, 1, 1};
    const Pose t = transform_to_frame(obj, shifted);
    CHECK((t.position - Vec3(2, -3, 0)).norm() < 1e-15);
    CHECK(t.orientation.same_rotation(obj.orientation, 1e-15));

    Pose rotated;
    rotated.orientation = Quaternion::from_yaw(kPi / 2);
    Pose p;
    p.position = {1, 0, 0};
    const Pose r = transform_to_frame(p, rotated);
    CHECK((r.position - Vec3(0, -1, 0)).norm() < 1e-12);
}

TEST_CASE("transform_to_frame matches homogeneous matrices") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 500; ++i) {
        Pose frame{{u(rng), u(rng), u(rng)}, random_quaternion(rng)};
        Pose obj{{u(rng), u(rng), u(rng)}, random_quaternion(rng)};
        const Mat3 rf = rotation_matrix(frame.orientation);
        const Vec3 expected = rf.transpose() * (obj.position - frame.position);
        const Pose t = transform_to_frame(obj, frame);
        CHECK((t.position - expected).norm() < 1e-9);
        const Mat3 expected_r = rf.transpose() * rotation_matrix(obj.orientation);
        CHECK((rotation_matrix(t.orientation) - expected_r).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("box validation and yaw normalization") {
    CHECK_THROWS_AS(box(0, 0, 0, 0, 1, 1, 0), ValidationError);
    CHECK_THROWS_AS(box(0, 0, 0, 1, -1, 1, 0), ValidationError);
    CHECK_THROWS_AS(box(std::nan(""), 0, 0, 1, 1, 1, 0), ValidationError);
    CHECK(box(0, 0, 0, 1, 1, 1, 3 * kPi).yaw == doctest::Approx(kPi));
    CHECK(box(0, 0, 0, 1, 1, 1, -kPi).yaw == doctest::Approx(kPi));
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(0.5) == 0.5);
    Mat3 bad = Mat3::Identity();
    bad(0, 0) = -1;
    CHECK_THROWS_AS(OrientedBoxFull(Vec3::Zero(), Vec3::Ones(), bad), ValidationError);
    CHECK_THROWS_AS(OrientedBoxFull(Vec3::Zero(), Vec3::Ones(), 2 * Mat3::Identity()), ValidationError);
}

TEST_CASE("point_in_box examples") {
    const OrientedBoxFull unit(Vec3::Zero(), Vec3::Ones(), Mat3::Identity());
    CHECK(point_in_box(Vec3::Zero(), unit));
    CHECK(point_in_box(Vec3(0.5, 0.5, 0.5), unit));
    CHECK(point_in_box(Vec3(-0.5, 0.5, -0.5), unit));
    CHECK_FALSE(point_in_box(Vec3(0.51, 0, 0), unit));
    CHECK(point_in_box(Vec3(0.5 + 0.5e-9, 0, 0), unit));
    CHECK_FALSE(point_in_box(Vec3(0.5 + 2e-9, 0, 0), unit));

    const OrientedBoxFull rotated(Vec3(1, 1, 0), Vec3(4, 1, 1), rotation_matrix(Quaternion::from_yaw(kPi / 2)));
    CHECK(point_in_box(Vec3(1, 2.9, 0), rotated));
    CHECK_FALSE(point_in_box(Vec3(2.9, 1, 0), rotated));
}

TEST_CASE("crop examples and brute-force count") {
    const OrientedBoxFull unit(Vec3::Zero(), Vec3::Ones(), Mat3::Identity());
    CHECK(crop(PointCloud{}, unit).empty());

    PointCloud inside;
    inside.points = {{0.1, 0.2, 0.3}, {-0.4, 0, 0.5}};
    CHECK(crop(inside, unit) == inside);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    PointCloud cloud;
    for (int i = 0; i < 20000; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    std::size_t expected = 0;
    for (const auto& p : cloud.points)
        if (std::abs(p.x()) <= 0.5 && std::abs(p.y()) <= 0.5 && std::abs(p.z()) <= 0.5) ++expected;
    const PointCloud c = crop(cloud, unit);
    CHECK(c.size() == expected);
    CHECK(crop(c, unit) == c);
}

TEST_CASE("crop keeps colors aligned") {
    PointCloud pcd;
    pcd.points = {{0, 0, 0}, {5, 0, 0}, {0.2, 0, 0}};
    pcd.colors = std::vector<Rgb>{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const auto c = crop(pcd, OrientedBoxFull(Vec3::Zero(), Vec3::Ones(), Mat3::Identity()));
    REQUIRE(c.size() == 2);
    REQUIRE(c.has_colors());
    CHECK((*c.colors)[1] == Rgb{7, 8, 9});
    CHECK(crop_indices(pcd, OrientedBoxFull(Vec3::Zero(), Vec3::Ones(), Mat3::Identity())) ==
          std::vector<std::size_t>{0, 2});
}

TEST_CASE("bev_iou examples") {
    const Box3D a = box(0, 0, 0, 2, 2, 2, 0);
    CHECK(bev_iou(a, a) == doctest::Approx(1.0));
    CHECK(bev_iou(a, box(1, 0, 0, 2, 2, 2, 0)) == doctest::Approx(1.0 / 3.0));
    const double r = 2 * (std::sqrt(2.0) - 1);
    const double expected = r / (2 - r);
    CHECK(bev_iou(box(0, 0, 0, 1, 1, 1, 0), box(0, 0, 0, 1, 1, 1, kPi / 4)) == doctest::Approx(expected));
    CHECK(std::abs(expected - 0.7071) < 1e-3);
    CHECK(bev_iou(a, box(10, 0, 0, 2, 2, 2, 0)) == 0.0);
    CHECK(bev_iou(a, box(2, 0, 0, 2, 2, 2, 0)) == 0.0);
}

TEST_CASE("iou_3d examples") {
    const Box3D a = box(0, 0, 0, 2, 2, 2, 0);
    CHECK(iou_3d(a, a) == doctest::Approx(1.0));
    CHECK(iou_3d(a, box(1, 0, 0, 2, 2, 2, 0)) == doctest::Approx(1.0 / 3.0));
    CHECK(iou_3d(a, box(0, 0, 5, 2, 2, 2, 0)) == 0.0);
    CHECK(iou_3d(a, box(0, 0, 1, 2, 2, 2, 0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou properties: symmetry, bounds, rigid invariance") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> c(-3, 3), d(0.5, 4), yaw(-kPi, kPi);
    for (int i = 0; i < 3000; ++i) {
        const Box3D a = box(c(rng), c(rng), c(rng), d(rng), d(rng), d(rng), yaw(rng));
        const Box3D b = box(c(rng), c(rng), c(rng), d(rng), d(rng), d(rng), yaw(rng));
        const double i3 = iou_3d(a, b);
        const double ib = bev_iou(a, b);
        CHECK(i3 == iou_3d(b, a));
        CHECK(ib == bev_iou(b, a));
        CHECK(i3 >= 0.0);
        CHECK(i3 <= 1.0);
        CHECK(ib >= 0.0);
        CHECK(ib <= 1.0);

        const double phi = yaw(rng);
        const Vec3 t(c(rng), c(rng), c(rng));
        const Mat3 r = rz(phi);
        const Box3D a2(r * a.center + t, a.size, a.yaw + phi);
        const Box3D b2(r * b.center + t, b.size, b.yaw + phi);
        CHECK(iou_3d(a2, b2) == doctest::Approx(i3).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("bev intersection matches Monte-Carlo") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> c(-1.5, 1.5), d(0.5, 3), yaw(-kPi, kPi), unit(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
        const Box3D a = box(c(rng), c(rng), 0, d(rng), d(rng), 1, yaw(rng));
        const Box3D b = box(c(rng), c(rng), 0, d(rng), d(rng), 1, yaw(rng));
        const Mat3 ra = rz(a.yaw);
        const OrientedBoxFull fb = OrientedBoxFull::from_box(b);
        const int n = 200000;
        int hits = 0;
        for (int k = 0; k < n; ++k) {
            const Vec3 local(unit(rng) * a.size.x(), unit(rng) * a.size.y(), 0);
            Vec3 p = ra * local + a.center;
            p.z() = b.center.z();
            if (point_in_box(p, fb)) ++hits;
        }
        const double mc = a.size.x() * a.size.y() * hits / n;
        CHECK(std::abs(mc - bev_intersection_area(a, b)) < 0.02 * a.size.x() * a.size.y());
    }
}

TEST_CASE("clip and area helpers") {
    Polygon2 sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_area(sq) == doctest::Approx(1.0));
    Polygon2 shifted{{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
    CHECK(polygon_area(clip_convex(sq, shifted)) == doctest::Approx(0.25));
    const auto corners = bev_corners(box(0, 0, 0, 2, 4, 1, 0));
    REQUIRE(corners.size() == 4);
    CHECK(polygon_area(corners) == doctest::Approx(8.0));
}
