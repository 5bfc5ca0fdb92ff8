#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace altimine {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rgb = std::array<std::uint8_t, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Boundary tolerance for point-in-box tests, in meters.
inline constexpr double kBoxEpsilon = 1e-9;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double rad);

/// Unit quaternion in (w, x, y, z) order. Construction normalizes; a
/// (near-)zero quaternion is rejected with ValidationError.
class Quaternion {
public:
    Quaternion() = default;
    Quaternion(double w, double x, double y, double z);

    static Quaternion identity() { return {}; }
    static Quaternion from_yaw(double yaw);
    /// Intrinsic Z-Y-X composition: R = Rz(yaw) * Ry(pitch) * Rx(roll).
    static Quaternion from_euler(double roll, double pitch, double yaw);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Quaternion conjugate() const;
    Quaternion operator*(const Quaternion& rhs) const;
    /// Rotates v by this quaternion (q v q^-1).
    Vec3 rotate(const Vec3& v) const;

    /// True if the two quaternions encode the same rotation (q or -q) within tol.
    bool same_rotation(const Quaternion& other, double tol) const;

private:
    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// Smallest |q| accepted before normalization.
inline constexpr double kMinQuaternionNorm = 1e-6;

struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

EulerAngles quaternion_to_euler(const Quaternion& q);
Mat3 rotation_matrix(const Quaternion& q);

struct Pose {
    Vec3 position = Vec3::Zero();
    Quaternion orientation;

    /// frame * local: maps coordinates expressed in this pose into the parent frame.
    Pose compose(const Pose& local) const;
    Pose inverse() const;
};

/// Expresses a world pose in the coordinates of `frame` (also given in world).
Pose transform_to_frame(const Pose& p_world, const Pose& frame);

/// Heading-only box, the form written to label files.
struct Box3D {
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones();
    double yaw = 0.0;

    /// Validates sizes and normalizes yaw.
    Box3D(const Vec3& center, const Vec3& size, double yaw);
    Box3D() = default;

    double volume() const { return size.prod(); }
    bool operator==(const Box3D&) const = default;
};

/// Box with an arbitrary orthonormal rotation, used for cropping.
struct OrientedBoxFull {
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones();
    Mat3 rotation = Mat3::Identity();

    OrientedBoxFull(const Vec3& center, const Vec3& size, const Mat3& rotation);
    OrientedBoxFull() = default;

    static OrientedBoxFull from_box(const Box3D& b);
};

struct PointCloud {
    std::vector<Vec3> points;
    std::optional<std::vector<Rgb>> colors;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return colors.has_value(); }

    /// Throws ValidationError on non-finite coordinates or color length mismatch.
    void validate() const;
    bool operator==(const PointCloud&) const = default;
};

bool point_in_box(const Vec3& p, const OrientedBoxFull& b);
PointCloud crop(const PointCloud& pcd, const OrientedBoxFull& b);
/// Indices of the points of `pcd` inside `b`, ascending.
std::vector<std::size_t> crop_indices(const PointCloud& pcd, const OrientedBoxFull& b);

using Polygon2 = std::vector<Eigen::Vector2d>;

/// Counter-clockwise footprint corners of a yaw box.
Polygon2 bev_corners(const Box3D& b);
double polygon_area(const Polygon2& poly);
/// Sutherland-Hodgman clip of `subject` by convex CCW `clip`.
Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip);

/// Footprint intersection area of two yaw boxes.
double bev_intersection_area(const Box3D& a, const Box3D& b);
double bev_iou(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

}  // namespace altimine
