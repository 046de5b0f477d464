#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

namespace canopy {

struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<std::array<std::uint8_t, 3>> colors;  // empty or one RGB per point

    bool has_colors() const { return !colors.empty(); }
    std::size_t size() const { return points.size(); }
};

}  // namespace canopy
