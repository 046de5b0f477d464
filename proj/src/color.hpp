#pragma once

#include <array>
#include <cstdint>

namespace canopy {

struct Lab {
    double l, a, b;
};

// sRGB in [0, 255] -> CIE L*a*b* under D65; L* in [0, 100].
Lab rgb_to_lab(double r, double g, double b);

inline Lab rgb_to_lab(const std::array<std::uint8_t, 3>& rgb) {
    return rgb_to_lab(rgb[0], rgb[1], rgb[2]);
}

}  // namespace canopy
