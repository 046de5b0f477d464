#include "rowfit.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "color.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace canopy {

using nlohmann::json;

RowFitConfig RowFitConfig::soybean_defaults() { return {}; }

RowFitConfig RowFitConfig::maize_defaults() {
    RowFitConfig cfg;
    cfg.box_min = {-1.0, -1.0, -1.0};
    cfg.box_max = {1.0, 1.0, 1.0};
    cfg.sample_count = 5000000;
    cfg.l_thresh = 32.0;
    cfg.a_thresh = 0.0;
    cfg.b_thresh = 0.0;
    cfg.plane_inlier = 0.10;
    cfg.render_height = 5.0;
    cfg.roi_radius = 2.0;
    return cfg;
}

void RowFitConfig::validate() const {
    if (!(voxel_size > 0.0)) throw ConfigError("rowfit: voxel_size must be > 0");
    if (!(plane_inlier > 0.0)) throw ConfigError("rowfit: plane_inlier must be > 0");
    if (!(row_inlier > 0.0)) throw ConfigError("rowfit: row_inlier must be > 0");
    if (plane_max_iters < 1 || row_max_iters < 1) throw ConfigError("rowfit: max_iters must be >= 1");
    if (!(slice_percentile > 0.0 && slice_percentile < 100.0))
        throw ConfigError("rowfit: slice_percentile must be in (0, 100)");
    if (!(render_height > 0.0)) throw ConfigError("rowfit: render_height must be > 0");
    if (row_stop_fraction < 0.0 || row_stop_fraction > 1.0)
        throw ConfigError("rowfit: row_stop_fraction must be in [0, 1]");
    if (roi_radius < 0.0) throw ConfigError("rowfit: roi_radius must be >= 0");
    if ((box_max - box_min).minCoeff() <= 0.0) throw ConfigError("rowfit: empty sample box");
}

json rowfit_config_to_json(const RowFitConfig& c) {
    return json{
        {"box_min", {c.box_min.x(), c.box_min.y(), c.box_min.z()}},
        {"box_max", {c.box_max.x(), c.box_max.y(), c.box_max.z()}},
        {"sample_count", c.sample_count},
        {"voxel_size", c.voxel_size},
        {"lab_norm", {{"l_offset", c.lab_norm.l_offset}, {"a_scale", c.lab_norm.a_scale}, {"b_scale", c.lab_norm.b_scale}}},
        {"l_thresh", c.l_thresh},
        {"a_thresh", c.a_thresh},
        {"b_thresh", c.b_thresh},
        {"plane_inlier", c.plane_inlier},
        {"plane_max_iters", c.plane_max_iters},
        {"slice_percentile", c.slice_percentile},
        {"row_inlier", c.row_inlier},
        {"row_max_iters", c.row_max_iters},
        {"row_stop_min_points", c.row_stop_min_points},
        {"row_stop_fraction", c.row_stop_fraction},
        {"roi_radius", c.roi_radius},
        {"dense_fraction_trigger", c.dense_fraction_trigger},
        {"dense_slice_percentile", c.dense_slice_percentile},
        {"dense_row_inlier", c.dense_row_inlier},
        {"dense_render_height", c.dense_render_height},
        {"render_height", c.render_height},
        {"render_width", c.render_width},
        {"render_height_px", c.render_height_px},
        {"vfov_deg", c.vfov_deg},
    };
}

RowFitConfig rowfit_config_from_json(const json& j) {
    RowFitConfig c;
    try {
        if (j.contains("species"))
            c = j.at("species").get<std::string>() == "maize" ? RowFitConfig::maize_defaults()
                                                              : RowFitConfig::soybean_defaults();
        auto vec3 = [&](const char* key, Eigen::Vector3d& out) {
            if (!j.contains(key)) return;
            auto v = j.at(key).get<std::vector<double>>();
            if (v.size() != 3) throw DataError(std::string("rowfit config: ") + key + " needs 3 entries");
            out = {v[0], v[1], v[2]};
        };
        vec3("box_min", c.box_min);
        vec3("box_max", c.box_max);
        c.sample_count = j.value("sample_count", c.sample_count);
        c.voxel_size = j.value("voxel_size", c.voxel_size);
        if (j.contains("lab_norm")) {
            const json& n = j.at("lab_norm");
            c.lab_norm.l_offset = n.value("l_offset", c.lab_norm.l_offset);
            c.lab_norm.a_scale = n.value("a_scale", c.lab_norm.a_scale);
            c.lab_norm.b_scale = n.value("b_scale", c.lab_norm.b_scale);
        }
        c.l_thresh = j.value("l_thresh", c.l_thresh);
        c.a_thresh = j.value("a_thresh", c.a_thresh);
        c.b_thresh = j.value("b_thresh", c.b_thresh);
        c.plane_inlier = j.value("plane_inlier", c.plane_inlier);
        c.plane_max_iters = j.value("plane_max_iters", c.plane_max_iters);
        c.slice_percentile = j.value("slice_percentile", c.slice_percentile);
        c.row_inlier = j.value("row_inlier", c.row_inlier);
        c.row_max_iters = j.value("row_max_iters", c.row_max_iters);
        c.row_stop_min_points = j.value("row_stop_min_points", c.row_stop_min_points);
        c.row_stop_fraction = j.value("row_stop_fraction", c.row_stop_fraction);
        c.roi_radius = j.value("roi_radius", c.roi_radius);
        c.dense_fraction_trigger = j.value("dense_fraction_trigger", c.dense_fraction_trigger);
        c.dense_slice_percentile = j.value("dense_slice_percentile", c.dense_slice_percentile);
        c.dense_row_inlier = j.value("dense_row_inlier", c.dense_row_inlier);
        c.dense_render_height = j.value("dense_render_height", c.dense_render_height);
        c.render_height = j.value("render_height", c.render_height);
        c.render_width = j.value("render_width", c.render_width);
        c.render_height_px = j.value("render_height_px", c.render_height_px);
        c.vfov_deg = j.value("vfov_deg", c.vfov_deg);
    } catch (const json::exception& e) {
        throw DataError(std::string("rowfit config JSON: ") + e.what());
    }
    c.validate();
    return c;
}

PointCloud crop_to_box(const PointCloud& cloud, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    PointCloud out;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) {
            out.points.push_back(p);
            if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
        }
    }
    return out;
}

PointCloud random_subsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed) {
    if (cloud.size() <= count) return cloud;
    // partial Fisher-Yates over an index array
    std::vector<std::uint32_t> idx(cloud.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    PointCloud out;
    out.points.reserve(count);
    if (cloud.has_colors()) out.colors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.uniform() * (idx.size() - i));
        if (j >= idx.size()) j = idx.size() - 1;
        std::swap(idx[i], idx[j]);
        out.points.push_back(cloud.points[idx[i]]);
        if (cloud.has_colors()) out.colors.push_back(cloud.colors[idx[i]]);
    }
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
    if (!(voxel_size > 0.0)) throw DomainError("voxel_downsample: voxel_size must be > 0");
    struct Acc {
        Eigen::Vector3d sum{0, 0, 0};
        Eigen::Vector3d color_sum{0, 0, 0};
        std::size_t n = 0;
    };
    std::map<std::tuple<long, long, long>, Acc> grid;  // ordered => deterministic output
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel_size)),
                                   static_cast<long>(std::floor(p.y() / voxel_size)),
                                   static_cast<long>(std::floor(p.z() / voxel_size)));
        Acc& a = grid[key];
        a.sum += p;
        if (cloud.has_colors())
            a.color_sum += Eigen::Vector3d(cloud.colors[i][0], cloud.colors[i][1], cloud.colors[i][2]);
        a.n += 1;
    }
    PointCloud out;
    out.points.reserve(grid.size());
    if (cloud.has_colors()) out.colors.reserve(grid.size());
    for (const auto& [key, acc] : grid) {
        out.points.push_back(acc.sum / static_cast<double>(acc.n));
        if (cloud.has_colors()) {
            Eigen::Vector3d c = acc.color_sum / static_cast<double>(acc.n);
            out.colors.push_back({static_cast<std::uint8_t>(std::lround(std::clamp(c.x(), 0.0, 255.0))),
                                  static_cast<std::uint8_t>(std::lround(std::clamp(c.y(), 0.0, 255.0))),
                                  static_cast<std::uint8_t>(std::lround(std::clamp(c.z(), 0.0, 255.0)))});
        }
    }
    return out;
}

std::pair<PointCloud, PointCloud> segment_cloud(const PointCloud& cloud, const RowFitConfig& cfg) {
    if (!cloud.has_colors() && !cloud.points.empty())
        throw DomainError("segment_cloud: cloud has no colors (property red/green/blue missing)");
    PointCloud ground, plant;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        Lab lab = rgb_to_lab(cloud.colors[i]);
        double lp = lab.l + cfg.lab_norm.l_offset;
        double ap = lab.a * cfg.lab_norm.a_scale;
        double bp = lab.b * cfg.lab_norm.b_scale;
        if (lp < cfg.l_thresh && bp < cfg.b_thresh) continue;  // dark non-yellow noise
        // the greener (low a') side is vegetation; the rest is soil
        PointCloud& dst = (ap < cfg.a_thresh) ? plant : ground;
        dst.points.push_back(cloud.points[i]);
        dst.colors.push_back(cloud.colors[i]);
    }
    return {std::move(ground), std::move(plant)};
}

RansacPlaneResult ransac_plane(const std::vector<Eigen::Vector3d>& points, double inlier_thresh,
                               int max_iters, std::uint64_t seed) {
    if (points.size() < 3) throw DomainError("ransac_plane: need at least 3 points");
    Rng rng(seed);
    const std::size_t n = points.size();

    std::size_t best_count = 0;
    Eigen::Vector3d best_normal{0, 0, 1};
    double best_offset = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        std::size_t i0 = static_cast<std::size_t>(rng.uniform() * n) % n;
        std::size_t i1 = static_cast<std::size_t>(rng.uniform() * n) % n;
        std::size_t i2 = static_cast<std::size_t>(rng.uniform() * n) % n;
        if (i0 == i1 || i1 == i2 || i0 == i2) continue;
        Eigen::Vector3d normal = (points[i1] - points[i0]).cross(points[i2] - points[i0]);
        double len = normal.norm();
        if (len < 1e-12) continue;  // colinear draw
        normal /= len;
        double offset = normal.dot(points[i0]);
        std::size_t count = 0;
        for (const auto& p : points) {
            if (std::abs(normal.dot(p) - offset) <= inlier_thresh) ++count;
        }
        if (count > best_count) {
            best_count = count;
            best_normal = normal;
            best_offset = offset;
        }
    }
    if (best_count < 3) throw NumericError("ransac_plane: no non-degenerate hypothesis found");

    // least-squares refit on the consensus set
    std::vector<std::uint32_t> inliers;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(best_normal.dot(points[i]) - best_offset) <= inlier_thresh)
            inliers.push_back(static_cast<std::uint32_t>(i));
    }
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (auto i : inliers) centroid += points[i];
    centroid /= static_cast<double>(inliers.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto i : inliers) {
        Eigen::Vector3d d = points[i] - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d normal = es.eigenvectors().col(0);  // smallest eigenvalue
    if (normal.z() < 0.0) normal = -normal;

    RansacPlaneResult result;
    result.plane.normal = normal;
    result.plane.offset = normal.dot(centroid);
    double ss = 0.0;
    result.inliers.clear();
    for (std::size_t i = 0; i < n; ++i) {
        double d = result.plane.signed_distance(points[i]);
        if (std::abs(d) <= inlier_thresh) {
            result.inliers.push_back(static_cast<std::uint32_t>(i));
            ss += d * d;
        }
    }
    result.rms = result.inliers.empty() ? 0.0 : std::sqrt(ss / result.inliers.size());
    return result;
}

namespace {

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double rank = pct / 100.0 * (values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double t = rank - lo;
    return values[lo] * (1.0 - t) + values[hi] * t;
}

}  // namespace

std::vector<LineModel> fit_rows(const std::vector<Eigen::Vector3d>& plant_points,
                                const PlaneModel& plane, const RowFitConfig& cfg,
                                std::uint64_t seed) {
    std::vector<LineModel> rows;
    if (plant_points.empty()) return rows;

    // slice: keep points at or above the distance percentile
    std::vector<double> dists(plant_points.size());
    for (std::size_t i = 0; i < plant_points.size(); ++i)
        dists[i] = plane.signed_distance(plant_points[i]);
    double cut = percentile(dists, cfg.slice_percentile);

    // in-plane basis
    Eigen::Vector3d ref = std::abs(plane.normal.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                           : Eigen::Vector3d::UnitY();
    Eigen::Vector3d e1 = (ref - ref.dot(plane.normal) * plane.normal).normalized();
    Eigen::Vector3d e2 = plane.normal.cross(e1);
    Eigen::Vector3d origin = plane.offset * plane.normal;

    struct Slice {
        Eigen::Vector2d uv;
        std::uint32_t src;
    };
    std::vector<Slice> pts;
    for (std::size_t i = 0; i < plant_points.size(); ++i) {
        if (dists[i] < cut) continue;
        Eigen::Vector3d d = plant_points[i] - origin;
        pts.push_back({{e1.dot(d), e2.dot(d)}, static_cast<std::uint32_t>(i)});
    }

    if (cfg.roi_radius > 0.0) {
        Eigen::Vector3d box_center = 0.5 * (cfg.box_min + cfg.box_max);
        Eigen::Vector3d dc = box_center - origin;
        Eigen::Vector2d c(e1.dot(dc), e2.dot(dc));
        std::erase_if(pts, [&](const Slice& s) { return (s.uv - c).norm() > cfg.roi_radius; });
    }

    const std::size_t start = pts.size();
    Rng rng(seed);
    int round = 0;
    while (pts.size() >= 2 && pts.size() >= cfg.row_stop_min_points &&
           static_cast<double>(pts.size()) >= cfg.row_stop_fraction * static_cast<double>(start)) {
        std::size_t best_count = 0;
        Eigen::Vector2d best_p{0, 0}, best_d{1, 0};
        for (int it = 0; it < cfg.row_max_iters; ++it) {
            std::size_t i0 = static_cast<std::size_t>(rng.uniform() * pts.size()) % pts.size();
            std::size_t i1 = static_cast<std::size_t>(rng.uniform() * pts.size()) % pts.size();
            if (i0 == i1) continue;
            Eigen::Vector2d d = pts[i1].uv - pts[i0].uv;
            double len = d.norm();
            if (len < 1e-9) continue;
            d /= len;
            std::size_t count = 0;
            for (const auto& s : pts) {
                Eigen::Vector2d r = s.uv - pts[i0].uv;
                double perp = std::abs(r.x() * d.y() - r.y() * d.x());
                if (perp <= cfg.row_inlier) ++count;
            }
            if (count > best_count) {
                best_count = count;
                best_p = pts[i0].uv;
                best_d = d;
            }
        }
        if (best_count < 2) break;  // nothing line-like found

        std::vector<std::size_t> member;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Eigen::Vector2d r = pts[i].uv - best_p;
            if (std::abs(r.x() * best_d.y() - r.y() * best_d.x()) <= cfg.row_inlier)
                member.push_back(i);
        }

        // least-squares refit: centroid + principal axis of the inliers
        Eigen::Vector2d mean{0, 0};
        for (auto i : member) mean += pts[i].uv;
        mean /= static_cast<double>(member.size());
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (auto i : member) {
            Eigen::Vector2d d = pts[i].uv - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
        Eigen::Vector2d dir2 = es.eigenvectors().col(1);  // largest eigenvalue

        LineModel line;
        Eigen::Vector3d mean3 = Eigen::Vector3d::Zero();
        for (auto i : member) {
            line.inliers.push_back(pts[i].src);
            mean3 += plant_points[pts[i].src];
        }
        line.point = mean3 / static_cast<double>(member.size());
        line.direction = (dir2.x() * e1 + dir2.y() * e2).normalized();
        rows.push_back(std::move(line));

        // remove inliers; the point count strictly decreases every round
        std::vector<Slice> rest;
        rest.reserve(pts.size() - member.size());
        std::size_t mi = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (mi < member.size() && member[mi] == i) {
                ++mi;
                continue;
            }
            rest.push_back(pts[i]);
        }
        pts.swap(rest);
        ++round;
        if (round > 1000) break;  // paranoid upper bound
    }
    return rows;
}

PinholeCamera standardized_camera(const PlaneModel& plane, const LineModel& best_row,
                                  const RowFitConfig& cfg) {
    Eigen::Vector3d x_axis = best_row.direction;
    if (x_axis.x() < 0.0) x_axis = -x_axis;  // sign convention: toward +x
    Eigen::Vector3d z_axis = -plane.normal;  // optical axis looks at the ground
    x_axis = (x_axis - x_axis.dot(z_axis) * z_axis).normalized();
    Eigen::Vector3d y_axis = z_axis.cross(x_axis);

    // above the inlier mean, at render_height from the ground plane
    Eigen::Vector3d on_plane =
        best_row.point - plane.signed_distance(best_row.point) * plane.normal;

    PinholeCamera cam;
    cam.center = on_plane + cfg.render_height * plane.normal;
    cam.rotation.row(0) = x_axis;
    cam.rotation.row(1) = y_axis;
    cam.rotation.row(2) = z_axis;
    cam.width = cfg.render_width;
    cam.height = cfg.render_height_px;
    cam.vfov_deg = cfg.vfov_deg;
    return cam;
}

RowFitReport run_rowfit(const PointCloud& cloud, const RowFitConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (!cloud.has_colors())
        throw DataError("rowfit: cloud has no colors (property red/green/blue missing)");

    PointCloud boxed = crop_to_box(cloud, cfg.box_min, cfg.box_max);
    PointCloud sampled = random_subsample(boxed, cfg.sample_count, derive_seed(seed, {1}));
    PointCloud voxeled = voxel_downsample(sampled, cfg.voxel_size);
    auto [ground, plant] = segment_cloud(voxeled, cfg);
    if (ground.size() < 3)
        throw DataError("rowfit: segmentation produced fewer than 3 ground points");
    if (plant.size() == 0) throw DataError("rowfit: segmentation produced no plant points");

    RowFitReport report;
    report.points_used = voxeled.size();
    report.ground_points = ground.size();
    report.plant_points = plant.size();

    RowFitConfig active = cfg;
    double plant_fraction = static_cast<double>(plant.size()) / static_cast<double>(voxeled.size());
    if (plant_fraction > cfg.dense_fraction_trigger) {
        active.slice_percentile = cfg.dense_slice_percentile;
        active.row_inlier = cfg.dense_row_inlier;
        active.render_height = cfg.dense_render_height;
        report.dense_mode = true;
    }

    RansacPlaneResult pr =
        ransac_plane(ground.points, active.plane_inlier, active.plane_max_iters, derive_seed(seed, {2}));
    report.plane = pr.plane;
    report.plane_inliers = pr.inliers.size();
    report.plane_rms = pr.rms;

    report.rows = fit_rows(plant.points, pr.plane, active, derive_seed(seed, {3}));
    if (report.rows.empty()) throw DataError("rowfit: no rows found in plant points");
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (report.rows[i].inliers.size() > report.rows[best].inliers.size()) best = i;
    }
    report.best_row = best;
    report.camera = standardized_camera(pr.plane, report.rows[best], active);
    report.render_height = active.render_height;
    return report;
}

json RowFitReport::diagnostics_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        rows_j.push_back({{"point", {r.point.x(), r.point.y(), r.point.z()}},
                          {"direction", {r.direction.x(), r.direction.y(), r.direction.z()}},
                          {"inliers", r.inliers.size()}});
    }
    return json{{"plane",
                 {{"normal", {plane.normal.x(), plane.normal.y(), plane.normal.z()}},
                  {"offset", plane.offset},
                  {"inliers", plane_inliers},
                  {"rms", plane_rms}}},
                {"rows", rows_j},
                {"best_row", best_row},
                {"points_used", points_used},
                {"ground_points", ground_points},
                {"plant_points", plant_points},
                {"dense_mode", dense_mode},
                {"render_height", render_height}};
}

}  // namespace canopy
