#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "color.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "rowfit.hpp"

using namespace canopy;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

PointCloud colored(std::vector<Eigen::Vector3d> pts, std::array<std::uint8_t, 3> rgb) {
    PointCloud c;
    c.points = std::move(pts);
    c.colors.assign(c.points.size(), rgb);
    return c;
}

}  // namespace

TEST_CASE("rgb_to_lab reference values") {
    Lab white = rgb_to_lab(255, 255, 255);
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(white.a) < 0.5);
    CHECK(std::abs(white.b) < 0.5);

    Lab black = rgb_to_lab(0, 0, 0);
    CHECK(black.l == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(black.a == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(black.b == doctest::Approx(0.0).epsilon(1e-9));

    // frozen against an independent reference conversion
    Lab green = rgb_to_lab(0, 255, 0);
    CHECK(green.l == doctest::Approx(87.7351).epsilon(1e-3));
    CHECK(green.a == doctest::Approx(-86.183).epsilon(1e-3));
    CHECK(green.a < -60.0);
    CHECK(green.b == doctest::Approx(83.1797).epsilon(1e-3));

    Lab soil = rgb_to_lab(120, 85, 60);
    CHECK(soil.a == doctest::Approx(11.268).epsilon(1e-3));

    CHECK_THROWS_AS(rgb_to_lab(-1, 0, 0), DomainError);
}

TEST_CASE("segment_cloud: green is plant, soil is ground, dark noise dropped") {
    RowFitConfig cfg;
    PointCloud cloud;
    cloud.points = {{0, 0, 1}, {0, 0, 0}, {0, 0, 2}};
    cloud.colors = {{0, 255, 0}, {120, 85, 60}, {5, 5, 5}};
    auto [ground, plant] = segment_cloud(cloud, cfg);
    REQUIRE(plant.size() == 1);
    REQUIRE(ground.size() == 1);
    CHECK(plant.points[0].z() == 1.0);
    CHECK(ground.points[0].z() == 0.0);  // the near-black point was dropped

    auto [g2, p2] = segment_cloud(PointCloud{}, cfg);
    CHECK(g2.size() == 0);
    CHECK(p2.size() == 0);

    PointCloud no_colors;
    no_colors.points = {{0, 0, 0}};
    CHECK_THROWS_AS(segment_cloud(no_colors, cfg), DomainError);
}

TEST_CASE("voxel downsample: one centroid per occupied voxel") {
    PointCloud cloud;
    // two clusters inside distinct 1 cm voxels
    cloud.points = {{0.001, 0.001, 0.001}, {0.002, 0.003, 0.002}, {0.105, 0.001, 0.001}};
    cloud.colors = {{10, 20, 30}, {20, 30, 40}, {100, 100, 100}};
    PointCloud down = voxel_downsample(cloud, 0.01);
    REQUIRE(down.size() == 2);
    CHECK(down.points[0].x() == doctest::Approx(0.0015));
    CHECK(down.points[0].y() == doctest::Approx(0.002));
    CHECK(down.colors[0][0] == 15);
    // at most one point per voxel over a random cloud
    Rng rng(3);
    PointCloud big;
    for (int i = 0; i < 5000; ++i)
        big.points.emplace_back(rng.uniform(0, 0.2), rng.uniform(0, 0.2), rng.uniform(0, 0.2));
    PointCloud d2 = voxel_downsample(big, 0.01);
    std::set<std::tuple<long, long, long>> keys;
    for (const auto& p : d2.points) {
        auto key = std::make_tuple(std::lround(std::floor(p.x() / 0.01)),
                                   std::lround(std::floor(p.y() / 0.01)),
                                   std::lround(std::floor(p.z() / 0.01)));
        CHECK(keys.insert(key).second);
    }
}

TEST_CASE("ransac_plane: recovery under 30% outliers") {
    Rng rng(17);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 700; ++i)
        pts.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.normal(0.0, 0.005));
    for (int i = 0; i < 300; ++i)
        pts.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    RansacPlaneResult r = ransac_plane(pts, 0.02, 500, 99);
    double angle = std::acos(std::min(1.0, std::abs(r.plane.normal.dot(Eigen::Vector3d::UnitZ()))));
    CHECK(angle < 1.0 * kRad);
    CHECK(std::abs(r.plane.offset) < 0.005);
    CHECK(r.rms <= 0.02);
}

TEST_CASE("ransac_plane: three points interpolated exactly; coplanar cloud all inliers") {
    std::vector<Eigen::Vector3d> tri = {{0, 0, 0.1}, {1, 0, 0.1}, {0, 1, 0.1}};
    RansacPlaneResult r = ransac_plane(tri, 0.01, 100, 1);
    CHECK(r.inliers.size() == 3);
    CHECK(std::abs(r.plane.signed_distance({0.3, 0.3, 0.1})) < 1e-12);

    std::vector<Eigen::Vector3d> plane_pts;
    Rng rng(5);
    for (int i = 0; i < 200; ++i)
        plane_pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.25);
    RansacPlaneResult r2 = ransac_plane(plane_pts, 0.001, 200, 2);
    CHECK(r2.inliers.size() == plane_pts.size());
    CHECK_THROWS_AS(ransac_plane({{0, 0, 0}, {1, 1, 1}}, 0.1, 10, 1), DomainError);
}

TEST_CASE("fit_rows: two synthetic rows recovered") {
    Rng rng(31);
    std::vector<Eigen::Vector3d> pts;
    for (int row = 0; row < 2; ++row) {
        double y = row * 0.76;
        for (int i = 0; i < 1500; ++i) {
            pts.emplace_back(rng.uniform(-1.0, 1.0), y + rng.normal(0.0, 0.03),
                             0.3 + rng.uniform(0.0, 0.3));
        }
    }
    PlaneModel plane;  // z = 0
    RowFitConfig cfg;
    cfg.row_stop_min_points = 100;
    cfg.row_inlier = 0.2;
    std::vector<LineModel> rows = fit_rows(pts, plane, cfg, 7);
    REQUIRE(rows.size() == 2);
    std::vector<double> offsets;
    for (const auto& r : rows) {
        double angle = std::acos(std::min(1.0, std::abs(r.direction.dot(Eigen::Vector3d::UnitX()))));
        CHECK(angle < 2.0 * kRad);
        offsets.push_back(r.point.y());
    }
    std::sort(offsets.begin(), offsets.end());
    CHECK(offsets[0] == doctest::Approx(0.0).epsilon(0.03));
    CHECK(offsets[1] == doctest::Approx(0.76).epsilon(0.03));
}

TEST_CASE("fit_rows: single tight row captures nearly all points") {
    Rng rng(13);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 4000; ++i)
        pts.emplace_back(rng.uniform(-1.0, 1.0), rng.normal(0.0, 0.02), 0.4 + rng.uniform(0.0, 0.2));
    PlaneModel plane;
    RowFitConfig cfg;
    cfg.row_stop_min_points = 500;
    std::vector<LineModel> rows = fit_rows(pts, plane, cfg, 3);
    REQUIRE(rows.size() == 1);
    // the slice keeps half the points; the row must contain >= 95% of those
    CHECK(rows[0].inliers.size() >= static_cast<std::size_t>(0.95 * 2000));
}

TEST_CASE("fit_rows: structureless cloud terminates") {
    Rng rng(41);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 3000; ++i)
        pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1));
    PlaneModel plane;
    RowFitConfig cfg;
    cfg.row_stop_min_points = 200;
    cfg.row_inlier = 0.05;
    std::vector<LineModel> rows = fit_rows(pts, plane, cfg, 11);  // must return, not loop
    CHECK(rows.size() < 50);
    CHECK(fit_rows({}, plane, cfg, 1).empty());
}

TEST_CASE("standardized_camera geometry") {
    RowFitConfig cfg;  // render height 1.0
    PlaneModel plane;  // z = 0, normal +z
    LineModel row;
    row.point = {0.2, 0.1, 0.0};
    row.direction = {1, 0, 0};
    PinholeCamera cam = standardized_camera(plane, row, cfg);
    CHECK((cam.center - Eigen::Vector3d(0.2, 0.1, 1.0)).norm() < 1e-12);
    CHECK((cam.rotation.row(2).transpose() + Eigen::Vector3d::UnitZ()).norm() < 1e-12);
    CHECK((cam.rotation.row(0).transpose() - Eigen::Vector3d::UnitX()).norm() < 1e-12);
    CHECK(cam.width == 994);
    CHECK(cam.height == 738);
    CHECK(cam.vfov_deg == 50.0);

    // flipped row direction is normalized toward +x
    row.direction = {-1, 0, 0};
    PinholeCamera cam2 = standardized_camera(plane, row, cfg);
    CHECK((cam2.rotation.row(0).transpose() - Eigen::Vector3d::UnitX()).norm() < 1e-12);

    // tilted plane: optical axis = -normal
    PlaneModel tilted;
    tilted.normal = Eigen::Vector3d(std::sin(5 * kRad), 0, std::cos(5 * kRad));
    tilted.offset = 0.0;
    LineModel trow;
    trow.point = {0, 0, 0};
    trow.direction = Eigen::Vector3d(std::cos(5 * kRad), 0, -std::sin(5 * kRad));  // in-plane
    PinholeCamera cam3 = standardized_camera(tilted, trow, cfg);
    CHECK((cam3.rotation.row(2).transpose() + tilted.normal).norm() < 1e-6);

    // row projects horizontally in the image
    Eigen::Vector3d p0 = cam3.to_camera(trow.point);
    Eigen::Vector3d p1 = cam3.to_camera(trow.point + trow.direction);
    double du = p1.x() / p1.z() - p0.x() / p0.z();
    double dv = p1.y() / p1.z() - p0.y() / p0.z();
    CHECK(std::abs(std::atan2(dv, du)) < 0.1 * kRad);
}

TEST_CASE("run_rowfit end to end on a synthetic two-row scene") {
    Rng rng(2718);
    PointCloud cloud;
    // soil carpet
    for (int i = 0; i < 20000; ++i) {
        cloud.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.normal(0.0, 0.004));
        cloud.colors.push_back({120, 85, 60});
    }
    // two plant rows at y = -0.2 and y = 0.56, the second denser
    for (int row = 0; row < 2; ++row) {
        double y0 = row == 0 ? -0.2 : 0.56;
        int n = row == 0 ? 6000 : 9000;
        for (int i = 0; i < n; ++i) {
            cloud.points.emplace_back(rng.uniform(-1, 1), y0 + rng.normal(0.0, 0.04),
                                      rng.uniform(0.05, 0.45));
            cloud.colors.push_back({45, 110, 35});
        }
    }
    RowFitConfig cfg;
    cfg.sample_count = 200000;
    cfg.row_stop_min_points = 300;
    RowFitReport report = run_rowfit(cloud, cfg, 12);
    CHECK(report.rows.size() >= 2);
    CHECK(std::abs(report.plane.normal.z()) > std::cos(1.0 * kRad));
    // camera above the denser row, 1 m up, x along the row
    CHECK(report.camera.center.y() == doctest::Approx(0.56).epsilon(0.05));
    CHECK(report.camera.center.z() == doctest::Approx(1.0).epsilon(0.05));
    double angle = std::acos(std::min(
        1.0, std::abs(report.camera.rotation.row(0).dot(Eigen::RowVector3d::UnitX()))));
    CHECK(angle < 2.0 * kRad);
    CHECK(report.plane_rms <= cfg.plane_inlier);
}

TEST_CASE("maize preset carries the published constants") {
    RowFitConfig maize = RowFitConfig::maize_defaults();
    CHECK(maize.sample_count == 5000000);
    CHECK(maize.l_thresh == 32.0);
    CHECK(maize.a_thresh == 0.0);
    CHECK(maize.b_thresh == 0.0);
    CHECK(maize.plane_inlier == 0.10);
    CHECK(maize.render_height == 5.0);
    CHECK(maize.roi_radius == 2.0);
}
