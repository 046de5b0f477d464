#pragma once

#include <Eigen/Core>
#include <string>

#include <nlohmann/json.hpp>

namespace canopy {

// Pinhole camera, OpenCV-style axes: +z looks forward along the optical
// axis, +x right (image u), +y down (image v). `rotation` maps world to
// camera coordinates; its rows are the camera axes expressed in world space.
struct PinholeCamera {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    int width = 994;
    int height = 738;
    double vfov_deg = 50.0;

    double fy() const;
    double fx() const { return fy(); }
    double cx() const { return 0.5 * width; }
    double cy() const { return 0.5 * height; }

    Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
        return rotation * (p_world - center);
    }
    Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam) const {
        return rotation.transpose() * p_cam + center;
    }
    // Pixel (ix, iy) center + depth along the optical axis -> world point.
    Eigen::Vector3d unproject_pixel(int ix, int iy, double depth) const;

    void validate() const;
};

// Straight-down camera at `height` above (x, y, ground_z), x-axis along +x.
PinholeCamera overhead_camera(double x, double y, double ground_z, double height, int width = 994,
                              int height_px = 738, double vfov_deg = 50.0);

nlohmann::json camera_to_json(const PinholeCamera& cam);
PinholeCamera camera_from_json(const nlohmann::json& j);
PinholeCamera load_camera(const std::string& path);
void save_camera(const PinholeCamera& cam, const std::string& path);

}  // namespace canopy
