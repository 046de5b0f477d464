#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "depthmap.hpp"
#include "mesh.hpp"
#include "pointcloud.hpp"

namespace canopy {

// Z-buffer rasterization at pixel centers, no antialiasing, no back-face
// culling. Depth is distance along the optical axis; ties at equal depth go
// to the lower face index. Triangles are clipped against a small near plane.
std::pair<DepthMap, ForegroundMask> render_depth(const LabeledMesh& mesh,
                                                 const PinholeCamera& camera);

// One world-space point per foreground pixel, row-major pixel order.
PointCloud unproject(const DepthMap& depth, const ForegroundMask& mask);

struct OrganColors {
    std::array<std::uint8_t, 3> leaf{45, 110, 35};
    std::array<std::uint8_t, 3> stem{85, 110, 55};
    std::array<std::uint8_t, 3> petiole{95, 120, 60};
    std::array<std::uint8_t, 3> ground{120, 85, 60};

    const std::array<std::uint8_t, 3>& for_organ(Organ o) const;
};

// Area-uniform surface sampling; color assigned by organ class.
PointCloud sample_surface_points(const LabeledMesh& mesh, std::size_t count, std::uint64_t seed,
                                 const OrganColors& colors = {});

}  // namespace canopy
