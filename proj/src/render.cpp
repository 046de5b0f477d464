#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "rng.hpp"

namespace canopy {

namespace {

constexpr double kNearPlane = 1e-4;  // meters in front of the camera

struct ScreenVertex {
    double u, v, invz;
};

ScreenVertex project(const Eigen::Vector3d& pc, const PinholeCamera& cam) {
    double invz = 1.0 / pc.z();
    return {cam.cx() + cam.fx() * pc.x() * invz, cam.cy() + cam.fy() * pc.y() * invz, invz};
}

// Sutherland-Hodgman clip of a camera-space triangle against z >= near.
int clip_near(const Eigen::Vector3d in[3], Eigen::Vector3d out[4]) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d& a = in[i];
        const Eigen::Vector3d& b = in[(i + 1) % 3];
        bool a_in = a.z() >= kNearPlane;
        bool b_in = b.z() >= kNearPlane;
        if (a_in) out[n++] = a;
        if (a_in != b_in) {
            double t = (kNearPlane - a.z()) / (b.z() - a.z());
            out[n++] = a + t * (b - a);
        }
    }
    return n;
}

void raster_triangle(const ScreenVertex& s0, const ScreenVertex& s1, const ScreenVertex& s2,
                     DepthMap& depth) {
    double area = (s1.u - s0.u) * (s2.v - s0.v) - (s2.u - s0.u) * (s1.v - s0.v);
    if (area == 0.0) return;
    const ScreenVertex* a = &s0;
    const ScreenVertex* b = &s1;
    const ScreenVertex* c = &s2;
    if (area < 0.0) {
        std::swap(b, c);
        area = -area;
    }

    int xmin = std::max(0, static_cast<int>(std::floor(std::min({a->u, b->u, c->u}) - 0.5)));
    int xmax = std::min(depth.width - 1, static_cast<int>(std::ceil(std::max({a->u, b->u, c->u}))));
    int ymin = std::max(0, static_cast<int>(std::floor(std::min({a->v, b->v, c->v}) - 0.5)));
    int ymax = std::min(depth.height - 1, static_cast<int>(std::ceil(std::max({a->v, b->v, c->v}))));
    if (xmin > xmax || ymin > ymax) return;

    const double inv_area = 1.0 / area;
    for (int y = ymin; y <= ymax; ++y) {
        double py = y + 0.5;
        for (int x = xmin; x <= xmax; ++x) {
            double px = x + 0.5;
            double w0 = (b->u - a->u) * (py - a->v) - (px - a->u) * (b->v - a->v);
            double w1 = (c->u - b->u) * (py - b->v) - (px - b->u) * (c->v - b->v);
            double w2 = (a->u - c->u) * (py - c->v) - (px - c->u) * (a->v - c->v);
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
            // 1/z is affine in screen space, so this interpolation is exact
            double invz = (w1 * a->invz + w2 * b->invz + w0 * c->invz) * inv_area;
            if (invz <= 0.0) continue;
            float d = static_cast<float>(1.0 / invz);
            float& cell = depth.at(x, y);
            if (!(cell <= d)) cell = d;  // NaN compares false -> first write wins ties
        }
    }
}

}  // namespace

std::pair<DepthMap, ForegroundMask> render_depth(const LabeledMesh& mesh,
                                                 const PinholeCamera& camera) {
    camera.validate();
    mesh.validate();

    DepthMap depth = make_depth(camera);

    std::vector<Eigen::Vector3d> cam_verts(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        cam_verts[i] = camera.to_camera(mesh.vertices[i]);

    Eigen::Vector3d tri[3];
    Eigen::Vector3d clipped[4];
    for (const auto& t : mesh.triangles) {
        tri[0] = cam_verts[t[0]];
        tri[1] = cam_verts[t[1]];
        tri[2] = cam_verts[t[2]];
        if (tri[0].z() < kNearPlane || tri[1].z() < kNearPlane || tri[2].z() < kNearPlane) {
            int n = clip_near(tri, clipped);
            for (int k = 2; k < n; ++k) {
                raster_triangle(project(clipped[0], camera), project(clipped[k - 1], camera),
                                project(clipped[k], camera), depth);
            }
        } else {
            raster_triangle(project(tri[0], camera), project(tri[1], camera),
                            project(tri[2], camera), depth);
        }
    }

    ForegroundMask mask = make_mask(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.depth.size(); ++i)
        mask.mask[i] = std::isfinite(depth.depth[i]) ? 255 : 0;
    return {std::move(depth), std::move(mask)};
}

PointCloud unproject(const DepthMap& depth, const ForegroundMask& mask) {
    if (mask.width != depth.width || mask.height != depth.height)
        throw DomainError("unproject: mask dimensions do not match depth map");
    PointCloud cloud;
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y)) continue;
            float d = depth.at(x, y);
            if (!std::isfinite(d)) continue;
            cloud.points.push_back(depth.camera.unproject_pixel(x, y, d));
        }
    }
    return cloud;
}

const std::array<std::uint8_t, 3>& OrganColors::for_organ(Organ o) const {
    switch (o) {
        case Organ::Leaf: return leaf;
        case Organ::Stem: return stem;
        case Organ::Petiole: return petiole;
        case Organ::Ground: return ground;
    }
    return leaf;
}

PointCloud sample_surface_points(const LabeledMesh& mesh, std::size_t count, std::uint64_t seed,
                                 const OrganColors& colors) {
    if (mesh.empty()) throw DomainError("sample_surface_points: empty mesh");
    if (count == 0) throw DomainError("sample_surface_points: count must be > 0");

    std::vector<double> cumulative(mesh.triangles.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
        total += mesh.face_area(f);
        cumulative[f] = total;
    }
    if (total <= 0.0) throw DomainError("sample_surface_points: mesh has zero surface area");

    PointCloud cloud;
    cloud.points.reserve(count);
    cloud.colors.reserve(count);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        double r = rng.uniform() * total;
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
        std::size_t f = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
        if (f >= mesh.triangles.size()) f = mesh.triangles.size() - 1;
        const auto& t = mesh.triangles[f];
        double u1 = rng.uniform();
        double u2 = rng.uniform();
        double su1 = std::sqrt(u1);
        double wa = 1.0 - su1;
        double wb = su1 * (1.0 - u2);
        double wc = su1 * u2;
        cloud.points.push_back(wa * mesh.vertices[t[0]] + wb * mesh.vertices[t[1]] +
                               wc * mesh.vertices[t[2]]);
        cloud.colors.push_back(colors.for_organ(mesh.labels[f].organ));
    }
    return cloud;
}

}  // namespace canopy
