#pragma once

#include <array>
#include <string>
#include <vector>

#include "depthmap.hpp"

namespace canopy {

// CDM1 depth file: magic "CDM1", little-endian u32 width, u32 height, then
// width*height little-endian f32 row-major, NaN = background.
void save_cdm(const DepthMap& depth, const std::string& path);
DepthMap load_cdm(const std::string& path);  // camera left default; attach separately

// Binary PGM (P5), 0 = background, 255 = foreground.
void save_pgm(const ForegroundMask& mask, const std::string& path);
ForegroundMask load_pgm(const std::string& path);

// Binary PPM (P6) RGB image, used for ingested color renders.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;  // row-major

    const std::array<std::uint8_t, 3>& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

void save_ppm(const RgbImage& img, const std::string& path);
RgbImage load_ppm(const std::string& path);

}  // namespace canopy
