#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsetrack {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Error taxonomy. The CLI maps these onto exit codes.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Point3() = default;
    constexpr Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
    explicit Point3(const Vec3& v) : x(v.x()), y(v.y()), z(v.z()) {}

    Vec3 vec() const { return {x, y, z}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    friend Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(Point3 a, Point3 b) { return (a - b).norm(); }

/// Rigid transform from a sensor-local frame into the global frame.
/// The rotation must be orthonormal with determinant +1; nothing is renormalized.
class Pose {
public:
    Pose() = default;
    Pose(Point3 translation, const Mat3& rotation);

    static Pose identity() { return {}; }
    static Pose from_yaw(double yaw_rad, Point3 translation = {});

    const Point3& translation() const { return translation_; }
    const Mat3& rotation() const { return rotation_; }

    Pose inverse() const;

private:
    Point3 translation_{};
    Mat3 rotation_ = Mat3::Identity();
};

struct Scan {
    double t = 0.0;
    std::vector<Point3> points;  // local frame
    Pose pose;
};

struct Measurement {
    double t = 0.0;
    Point3 position;  // global frame
    int support = 1;
};

/// Throws ValidationError unless rotation is orthonormal with det +1 (tolerance 1e-9).
void validate_rotation(const Mat3& rotation);

Point3 to_global(Point3 local, const Pose& pose);
Point3 to_local(Point3 global, const Pose& pose);

/// Mean Euclidean norm of the scan's local-frame points.
/// Throws EmptyInputError for an empty scan.
double mean_range(std::span<const Point3> points);
inline double mean_range(const Scan& scan) { return mean_range(scan.points); }

}  // namespace sparsetrack
