#include "sparsetrack/core.hpp"

#include "sparsetrack/soa.hpp"

#include <sstream>

namespace sparsetrack {

void validate_rotation(const Mat3& rotation) {
    if (!rotation.allFinite()) {
        throw ValidationError("rotation has non-finite entries");
    }
    const double ortho_err = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = rotation.determinant();
    if (ortho_err > 1e-9 || std::abs(det - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "rotation is not a proper orthonormal matrix (|R R^T - I|max = " << ortho_err
           << ", det = " << det << ")";
        throw ValidationError(os.str());
    }
}

Pose::Pose(Point3 translation, const Mat3& rotation) : translation_(translation), rotation_(rotation) {
    if (!translation.finite()) {
        throw ValidationError("pose translation is not finite");
    }
    validate_rotation(rotation);
}

Pose Pose::from_yaw(double yaw_rad, Point3 translation) {
    Mat3 r;
    const double c = std::cos(yaw_rad);
    const double s = std::sin(yaw_rad);
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return Pose(translation, r);
}

Pose Pose::inverse() const {
    const Mat3 rt = rotation_.transpose();
    return Pose(Point3(-(rt * translation_.vec())), rt);
}

Point3 to_global(Point3 local, const Pose& pose) {
    if (!local.finite()) {
        throw ValidationError("to_global: non-finite point");
    }
    return Point3(pose.rotation() * local.vec() + pose.translation().vec());
}

Point3 to_local(Point3 global, const Pose& pose) {
    if (!global.finite()) {
        throw ValidationError("to_local: non-finite point");
    }
    return Point3(pose.rotation().transpose() * (global - pose.translation()).vec());
}

double mean_range(std::span<const Point3> points) {
    if (points.empty()) {
        throw EmptyInputError("mean_range of an empty scan");
    }
    const kernels::PointsSoA soa(points);
    std::vector<double> norms(points.size());
    kernels::active().norms(soa.view(), norms.data());
    double sum = 0.0;
    for (double n : norms) sum += n;
    return sum / static_cast<double>(points.size());
}

}  // namespace sparsetrack
