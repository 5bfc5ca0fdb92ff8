#include "altimine/geom3d.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include <Eigen/Geometry>

#include "altimine/errors.hpp"

namespace altimine {

double normalize_angle(double rad) {
    double r = std::remainder(rad, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

// ---------------------------------------------------------------------------
// Quaternion

Quaternion::Quaternion(double w, double x, double y, double z) {
    if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw ValidationError("quaternion has non-finite component");
    }
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < kMinQuaternionNorm) {
        throw ValidationError("quaternion norm " + std::to_string(n) + " is too small to normalize");
    }
    w_ = w / n;
    x_ = x / n;
    y_ = y / n;
    z_ = z / n;
}

Quaternion Quaternion::from_yaw(double yaw) {
    return {std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)};
}

Quaternion Quaternion::from_euler(double roll, double pitch, double yaw) {
    const double cr = std::cos(roll / 2.0), sr = std::sin(roll / 2.0);
    const double cp = std::cos(pitch / 2.0), sp = std::sin(pitch / 2.0);
    const double cy = std::cos(yaw / 2.0), sy = std::sin(yaw / 2.0);
    return {cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy};
}

Quaternion Quaternion::conjugate() const {
    Quaternion c;
    c.w_ = w_;
    c.x_ = -x_;
    c.y_ = -y_;
    c.z_ = -z_;
    return c;
}

Quaternion Quaternion::operator*(const Quaternion& r) const {
    return {w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
            w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
            w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
            w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_};
}

Vec3 Quaternion::rotate(const Vec3& v) const {
    return rotation_matrix(*this) * v;
}

bool Quaternion::same_rotation(const Quaternion& o, double tol) const {
    const double d = w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
    const double s = d < 0.0 ? -1.0 : 1.0;
    return std::abs(w_ - s * o.w_) <= tol && std::abs(x_ - s * o.x_) <= tol &&
           std::abs(y_ - s * o.y_) <= tol && std::abs(z_ - s * o.z_) <= tol;
}

EulerAngles quaternion_to_euler(const Quaternion& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    EulerAngles e;
    const double sinp = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
    e.pitch = std::asin(sinp);
    if (std::abs(sinp) > 1.0 - 1e-14) {
        // Gimbal lock: only yaw - roll (or yaw + roll) is defined; put it all in yaw.
        e.roll = 0.0;
        e.yaw = std::atan2(-2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z));
        return e;
    }
    e.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
    e.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
    return e;
}

Mat3 rotation_matrix(const Quaternion& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

// ---------------------------------------------------------------------------
// Poses

Pose Pose::compose(const Pose& local) const {
    return {position + orientation.rotate(local.position), orientation * local.orientation};
}

Pose Pose::inverse() const {
    const Quaternion inv = orientation.conjugate();
    return {-inv.rotate(position), inv};
}

Pose transform_to_frame(const Pose& p_world, const Pose& frame) {
    return frame.inverse().compose(p_world);
}

// ---------------------------------------------------------------------------
// Boxes and clouds

namespace {

void check_size(const Vec3& size) {
    for (int i = 0; i < 3; ++i) {
        if (!(std::isfinite(size[i]) && size[i] > 0.0)) {
            throw ValidationError("box dimensions must be finite and positive");
        }
    }
}

}  // namespace

Box3D::Box3D(const Vec3& c, const Vec3& s, double y) : center(c), size(s), yaw(normalize_angle(y)) {
    check_size(size);
    if (!center.allFinite() || !std::isfinite(y)) {
        throw ValidationError("box center and yaw must be finite");
    }
}

OrientedBoxFull::OrientedBoxFull(const Vec3& c, const Vec3& s, const Mat3& r)
    : center(c), size(s), rotation(r) {
    check_size(size);
    if (!center.allFinite()) throw ValidationError("box center must be finite");
    if (!(r.transpose() * r).isApprox(Mat3::Identity(), 1e-6) ||
        std::abs(r.determinant() - 1.0) > 1e-6) {
        throw ValidationError("box rotation is not a proper orthonormal matrix");
    }
}

OrientedBoxFull OrientedBoxFull::from_box(const Box3D& b) {
    return {b.center, b.size, rotation_matrix(Quaternion::from_yaw(b.yaw))};
}

void PointCloud::validate() const {
    if (colors && colors->size() != points.size()) {
        throw ValidationError("point cloud has " + std::to_string(points.size()) + " points but " +
                              std::to_string(colors->size()) + " colors");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) {
            throw ValidationError("point " + std::to_string(i) + " has a non-finite coordinate");
        }
    }
}

bool point_in_box(const Vec3& p, const OrientedBoxFull& b) {
    const Vec3 local = b.rotation.transpose() * (p - b.center);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(local[i]) > b.size[i] / 2.0 + kBoxEpsilon) return false;
    }
    return true;
}

std::vector<std::size_t> crop_indices(const PointCloud& pcd, const OrientedBoxFull& b) {
    std::vector<std::size_t> idx;
    const Mat3 rt = b.rotation.transpose();
    const Vec3 half = b.size / 2.0 + Vec3::Constant(kBoxEpsilon);
    for (std::size_t i = 0; i < pcd.points.size(); ++i) {
        const Vec3 local = rt * (pcd.points[i] - b.center);
        if (std::abs(local.x()) <= half.x() && std::abs(local.y()) <= half.y() &&
            std::abs(local.z()) <= half.z()) {
            idx.push_back(i);
        }
    }
    return idx;
}

PointCloud crop(const PointCloud& pcd, const OrientedBoxFull& b) {
    const auto idx = crop_indices(pcd, b);
    PointCloud out;
    out.points.reserve(idx.size());
    for (auto i : idx) out.points.push_back(pcd.points[i]);
    if (pcd.colors) {
        out.colors.emplace();
        out.colors->reserve(idx.size());
        for (auto i : idx) out.colors->push_back((*pcd.colors)[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rotated IoU

namespace {

constexpr double kSliverArea = 1e-12;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
}

// Canonical argument order so that iou(a, b) and iou(b, a) run the same arithmetic.
bool box_less(const Box3D& a, const Box3D& b) {
    return std::tie(a.center.x(), a.center.y(), a.center.z(), a.size.x(), a.size.y(), a.size.z(),
                    a.yaw) < std::tie(b.center.x(), b.center.y(), b.center.z(), b.size.x(),
                                      b.size.y(), b.size.z(), b.yaw);
}

double z_overlap(const Box3D& a, const Box3D& b) {
    const double lo = std::max(a.center.z() - a.size.z() / 2.0, b.center.z() - b.size.z() / 2.0);
    const double hi = std::min(a.center.z() + a.size.z() / 2.0, b.center.z() + b.size.z() / 2.0);
    return std::max(0.0, hi - lo);
}

}  // namespace

Polygon2 bev_corners(const Box3D& b) {
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    const double hx = b.size.x() / 2.0, hy = b.size.y() / 2.0;
    const std::array<std::array<double, 2>, 4> local{{{hx, hy}, {-hx, hy}, {-hx, -hy}, {hx, -hy}}};
    Polygon2 out;
    out.reserve(4);
    for (const auto& l : local) {
        out.emplace_back(b.center.x() + c * l[0] - s * l[1], b.center.y() + s * l[0] + c * l[1]);
    }
    return out;
}

double polygon_area(const Polygon2& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        twice += cross(poly[i], poly[(i + 1) % poly.size()]);
    }
    return twice / 2.0;
}

Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
    Polygon2 output = subject;
    for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
        const Eigen::Vector2d& a = clip[e];
        const Eigen::Vector2d& b = clip[(e + 1) % clip.size()];
        const Eigen::Vector2d edge = b - a;
        const Polygon2 input = std::move(output);
        output.clear();
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Eigen::Vector2d& cur = input[i];
            const Eigen::Vector2d& prev = input[(i + input.size() - 1) % input.size()];
            const double dc = cross(edge, cur - a);
            const double dp = cross(edge, prev - a);
            if (dc >= 0.0) {
                if (dp < 0.0) output.push_back(prev + (cur - prev) * (dp / (dp - dc)));
                output.push_back(cur);
            } else if (dp >= 0.0) {
                output.push_back(prev + (cur - prev) * (dp / (dp - dc)));
            }
        }
    }
    return output;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
    const Box3D& first = box_less(b, a) ? b : a;
    const Box3D& second = box_less(b, a) ? a : b;
    const double area = polygon_area(clip_convex(bev_corners(first), bev_corners(second)));
    return area < kSliverArea ? 0.0 : area;
}

double bev_iou(const Box3D& a, const Box3D& b) {
    const double inter = bev_intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    const double uni = a.size.x() * a.size.y() + b.size.x() * b.size.y() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
    const double dz = z_overlap(a, b);
    if (dz <= 0.0) return 0.0;
    const double inter = bev_intersection_area(a, b) * dz;
    if (inter <= 0.0) return 0.0;
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace altimine
