#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "camera.hpp"
#include "pointcloud.hpp"

namespace canopy {

// Affine normalization applied to raw L*a*b* before thresholding. The
// published cutoffs assume a rescaled color space (raw L* is never < 0), so
// the mapping is explicit and configurable.
struct LabNormalization {
    double l_offset = -50.0;  // L' = L* + l_offset
    double a_scale = 0.5;     // a' = a* * a_scale
    double b_scale = 0.5;     // b' = b* * b_scale
};

struct RowFitConfig {
    // sampling
    Eigen::Vector3d box_min{-1.0, -1.0, -0.5};
    Eigen::Vector3d box_max{1.0, 1.0, 2.5};
    std::size_t sample_count = 100000;
    double voxel_size = 0.01;

    // segmentation: points with L' < l_thresh and b' < b_thresh are dropped;
    // of the rest the greener side of a_thresh is plant, the other ground
    LabNormalization lab_norm;
    double l_thresh = 0.0;
    double a_thresh = 2.0;
    double b_thresh = 1.0;

    // ground plane
    double plane_inlier = 0.05;
    int plane_max_iters = 1000;

    // row extraction
    double slice_percentile = 50.0;
    double row_inlier = 0.20;
    int row_max_iters = 1000;
    std::size_t row_stop_min_points = 1000;
    double row_stop_fraction = 0.20;
    double roi_radius = 0.0;  // cylindrical ROI about the box center; 0 disables

    // plant-point density switch (dense canopies use an alternate slice)
    double dense_fraction_trigger = 0.75;
    double dense_slice_percentile = 70.0;
    double dense_row_inlier = 0.25;
    double dense_render_height = 1.25;

    // emitted camera
    double render_height = 1.0;
    int render_width = 994;
    int render_height_px = 738;
    double vfov_deg = 50.0;

    static RowFitConfig soybean_defaults();
    static RowFitConfig maize_defaults();
    void validate() const;
};

nlohmann::json rowfit_config_to_json(const RowFitConfig& cfg);
RowFitConfig rowfit_config_from_json(const nlohmann::json& j);

struct PlaneModel {
    Eigen::Vector3d normal{0, 0, 1};  // unit, oriented toward +z
    double offset = 0.0;              // plane: normal . p = offset

    double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

struct RansacPlaneResult {
    PlaneModel plane;
    std::vector<std::uint32_t> inliers;
    double rms = 0.0;
};

struct LineModel {
    Eigen::Vector3d point{0, 0, 0};      // mean of inlier points
    Eigen::Vector3d direction{1, 0, 0};  // unit, lies in the ground plane
    std::vector<std::uint32_t> inliers;
};

PointCloud crop_to_box(const PointCloud& cloud, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);
PointCloud random_subsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed);
// At most one output point per occupied voxel; the representative is the
// centroid of the voxel members (colors averaged).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

std::pair<PointCloud, PointCloud> segment_cloud(const PointCloud& cloud, const RowFitConfig& cfg);

RansacPlaneResult ransac_plane(const std::vector<Eigen::Vector3d>& points, double inlier_thresh,
                               int max_iters, std::uint64_t seed);

std::vector<LineModel> fit_rows(const std::vector<Eigen::Vector3d>& plant_points,
                                const PlaneModel& plane, const RowFitConfig& cfg,
                                std::uint64_t seed);

PinholeCamera standardized_camera(const PlaneModel& plane, const LineModel& best_row,
                                  const RowFitConfig& cfg);

// Full procedure: crop, subsample, voxelize, segment, plane, rows, camera.
struct RowFitReport {
    PinholeCamera camera;
    PlaneModel plane;
    std::size_t plane_inliers = 0;
    double plane_rms = 0.0;
    std::vector<LineModel> rows;
    std::size_t best_row = 0;
    std::size_t points_used = 0;
    std::size_t ground_points = 0;
    std::size_t plant_points = 0;
    bool dense_mode = false;
    double render_height = 0.0;

    nlohmann::json diagnostics_json() const;
};

RowFitReport run_rowfit(const PointCloud& cloud, const RowFitConfig& cfg, std::uint64_t seed);

}  // namespace canopy
