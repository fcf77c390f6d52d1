#pragma once

#include "sparsetrack/core.hpp"
#include "sparsetrack/kernels.hpp"

#include <span>
#include <vector>

namespace sparsetrack::kernels {

/// Owning SoA copy of a point list, fed to the kernels.
class PointsSoA {
public:
    PointsSoA() = default;
    explicit PointsSoA(std::span<const Point3> pts) {
        x_.reserve(pts.size());
        y_.reserve(pts.size());
        z_.reserve(pts.size());
        for (const auto& p : pts) {
            x_.push_back(p.x);
            y_.push_back(p.y);
            z_.push_back(p.z);
        }
    }

    PointsView view() const { return {x_.data(), y_.data(), z_.data(), x_.size()}; }
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_, y_, z_;
};

}  // namespace sparsetrack::kernels
