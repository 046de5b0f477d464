#pragma once

#include <string>

#include "pointcloud.hpp"

namespace canopy {

// Binary little-endian PLY with float x,y,z and uchar red,green,blue.
void save_ply(const PointCloud& cloud, const std::string& path);

// Accepts float or double coordinates; colors optional on read.
PointCloud load_ply(const std::string& path);

}  // namespace canopy
