#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "camera.hpp"

namespace canopy {

// Metric depths along the optical axis; NaN marks background.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> depth;
    PinholeCamera camera;

    float at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { mask[static_cast<std::size_t>(y) * width + x] = v ? 255 : 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto m : mask) n += (m != 0);
        return n;
    }
};

inline DepthMap make_depth(const PinholeCamera& cam) {
    DepthMap d;
    d.width = cam.width;
    d.height = cam.height;
    d.depth.assign(d.pixel_count(), std::numeric_limits<float>::quiet_NaN());
    d.camera = cam;
    return d;
}

inline ForegroundMask make_mask(int width, int height) {
    ForegroundMask m;
    m.width = width;
    m.height = height;
    m.mask.assign(static_cast<std::size_t>(width) * height, 0);
    return m;
}

}  // namespace canopy
