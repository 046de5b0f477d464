#include "morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "rng.hpp"

namespace canopy {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// sub-stream tags
enum : std::uint64_t { kTagNode = 1, kTagBranch = 2, kTagBranchNode = 3, kTagPlant = 4, kTagJitter = 5 };

constexpr ParamBound kSoybeanBounds[] = {
    {"leaf_length_mult", 0.5, 1.5},   {"petiole_length_mult", 0.5, 2.0},
    {"petiole_angle_mult", 0.5, 4.0}, {"internode_length_mult", 0.5, 2.0},
    {"num_nodes", 1.0, 14.0},
};

constexpr ParamBound kMaizeBounds[] = {
    {"leaf_length_mult", 0.8, 1.2},
    {"leaf_order_shift", -4.0, 4.0},
    {"internode_length_mult", 0.8, 1.2},
    {"num_nodes", 1.0, 18.0},
};

Eigen::Vector3d direction_from_angles(double zenith_rad, double azimuth_rad) {
    return {std::sin(zenith_rad) * std::cos(azimuth_rad),
            std::sin(zenith_rad) * std::sin(azimuth_rad), std::cos(zenith_rad)};
}

// Open-ended tube between two points; `sides` * 2 triangles.
void add_cylinder(LabeledMesh& mesh, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  double radius, int sides, const FaceLabel& label) {
    Eigen::Vector3d axis = b - a;
    double len = axis.norm();
    if (len <= 0.0) return;
    axis /= len;
    Eigen::Vector3d ref = std::abs(axis.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    Eigen::Vector3d u = axis.cross(ref).normalized();
    Eigen::Vector3d v = axis.cross(u);

    const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int i = 0; i < sides; ++i) {
        double ang = 2.0 * std::numbers::pi * i / sides;
        Eigen::Vector3d r = radius * (std::cos(ang) * u + std::sin(ang) * v);
        mesh.vertices.push_back(a + r);
        mesh.vertices.push_back(b + r);
    }
    for (int i = 0; i < sides; ++i) {
        std::uint32_t a0 = base + 2 * i;
        std::uint32_t a1 = base + 2 * i + 1;
        std::uint32_t b0 = base + 2 * ((i + 1) % sides);
        std::uint32_t b1 = base + 2 * ((i + 1) % sides) + 1;
        mesh.triangles.push_back({a0, b0, a1});
        mesh.labels.push_back(label);
        mesh.triangles.push_back({a1, b0, b1});
        mesh.labels.push_back(label);
    }
}

// Flat elliptic blade in the plane spanned by (dir, side); fan around the center.
void add_blade(LabeledMesh& mesh, const Eigen::Vector3d& base, const Eigen::Vector3d& dir,
               const Eigen::Vector3d& side, double length, double width, int segments,
               const FaceLabel& label) {
    const double a = 0.5 * length;
    const double b = 0.5 * width;
    Eigen::Vector3d center = base + a * dir;
    const std::uint32_t ci = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(center);
    for (int i = 0; i < segments; ++i) {
        double ang = 2.0 * std::numbers::pi * i / segments;
        mesh.vertices.push_back(center + a * std::cos(ang) * dir + b * std::sin(ang) * side);
    }
    for (int i = 0; i < segments; ++i) {
        std::uint32_t v0 = ci + 1 + i;
        std::uint32_t v1 = ci + 1 + (i + 1) % segments;
        mesh.triangles.push_back({ci, v0, v1});
        mesh.labels.push_back(label);
    }
}

struct OrganCounters {
    std::int32_t leaf = 0;
    std::int32_t stem = 0;
    std::int32_t petiole = 0;
};

// One trifoliate unit: petiole from the attachment point, then three coplanar
// blades (middle one on a short petiolule). The blade plane contains the
// petiole direction, so coplanarity is exact by construction.
void add_trifoliate(LabeledMesh& mesh, const MorphologyProfile& prof, const Eigen::Vector3d& attach,
                    double azimuth_deg, double zenith_deg, double petiole_len, double leaf_len,
                    double leaf_wid, OrganCounters& counters) {
    const double az = azimuth_deg * kDegToRad;
    const double zen = std::clamp(zenith_deg, 1.0, 179.0) * kDegToRad;
    Eigen::Vector3d u = direction_from_angles(zen, az);
    Eigen::Vector3d v(-std::sin(az), std::cos(az), 0.0);  // horizontal, perpendicular to u

    Eigen::Vector3d tip = attach + petiole_len * u;
    add_cylinder(mesh, attach, tip, prof.petiole_radius_m, 5, {Organ::Petiole, 0, counters.petiole++});

    const double petiolule = prof.petiolule_fraction * leaf_len;
    add_cylinder(mesh, tip, tip + petiolule * u, prof.petiole_radius_m * 0.7, 4,
                 {Organ::Petiole, 0, counters.petiole++});

    const double lat = prof.lateral_leaflet_angle_deg * kDegToRad;
    const double gammas[3] = {0.0, lat, -lat};
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d d = std::cos(gammas[i]) * u + std::sin(gammas[i]) * v;
        Eigen::Vector3d s = -std::sin(gammas[i]) * u + std::cos(gammas[i]) * v;
        Eigen::Vector3d base = (i == 0) ? tip + petiolule * u : tip;
        add_blade(mesh, base, d, s, leaf_len, leaf_wid, prof.blade_segments,
                  {Organ::Leaf, 0, counters.leaf++});
    }
}

}  // namespace

const char* species_name(Species s) { return s == Species::Soybean ? "soybean" : "maize"; }

Species species_from_name(const std::string& name) {
    if (name == "soybean") return Species::Soybean;
    if (name == "maize") return Species::Maize;
    throw UsageError("unknown species '" + name + "' (expected soybean or maize)");
}

std::span<const ParamBound> param_bounds(Species s) {
    if (s == Species::Soybean) return {kSoybeanBounds, std::size(kSoybeanBounds)};
    return {kMaizeBounds, std::size(kMaizeBounds)};
}

std::size_t param_dim(Species s) { return param_bounds(s).size(); }

void PlantParams::validate() const {
    auto bounds = param_bounds(species);
    if (values.size() != bounds.size())
        throw DomainError("parameter vector has dimension " + std::to_string(values.size()) +
                          ", expected " + std::to_string(bounds.size()) + " for " +
                          species_name(species));
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!(values[i] >= bounds[i].lo && values[i] <= bounds[i].hi))
            throw DomainError(std::string(bounds[i].name) + " = " + std::to_string(values[i]) +
                              " outside [" + std::to_string(bounds[i].lo) + ", " +
                              std::to_string(bounds[i].hi) + "]");
    }
}

PlantParams make_params(Species s, std::span<const double> raw) {
    PlantParams p{s, {raw.begin(), raw.end()}};
    p.validate();
    return p;
}

PlantParams clamp_params(std::span<const double> raw, Species s) {
    auto bounds = param_bounds(s);
    if (raw.size() != bounds.size())
        throw DomainError("parameter vector has dimension " + std::to_string(raw.size()) +
                          ", expected " + std::to_string(bounds.size()) + " for " + species_name(s));
    PlantParams p{s, {raw.begin(), raw.end()}};
    for (std::size_t i = 0; i < bounds.size(); ++i)
        p.values[i] = std::clamp(p.values[i], bounds[i].lo, bounds[i].hi);
    return p;
}

SoybeanParams soybean_params(const PlantParams& p) {
    if (p.species != Species::Soybean) throw DomainError("expected soybean parameters");
    p.validate();
    return {p[0], p[1], p[2], p[3], p[4]};
}

MaizeParams maize_params(const PlantParams& p) {
    if (p.species != Species::Maize) throw DomainError("expected maize parameters");
    p.validate();
    return {p[0], p[1], p[2], p[3]};
}

void CanopyLayout::validate() const {
    if (!(row_spacing > 0.0)) throw DomainError("row_spacing must be > 0");
    if (!(plant_spacing > 0.0)) throw DomainError("plant_spacing must be > 0");
    if (num_rows < 1) throw DomainError("num_rows must be >= 1");
    if (plants_per_row < 1) throw DomainError("plants_per_row must be >= 1");
    if (position_jitter_std < 0.0) throw DomainError("position_jitter_std must be >= 0");
}

int soybean_branch_count(double num_nodes) {
    if (num_nodes < 8.0) return 0;
    return std::clamp(static_cast<int>(std::floor(num_nodes)) - 7, 0, 6);
}

LabeledMesh generate_soybean_plant(const SoybeanParams& params, const MorphologyProfile& profile,
                                   std::uint64_t seed) {
    PlantParams check{Species::Soybean,
                      {params.leaf_length_mult, params.petiole_length_mult, params.petiole_angle_mult,
                       params.internode_length_mult, params.num_nodes}};
    check.validate();

    const int n_nodes = static_cast<int>(std::ceil(params.num_nodes));
    profile.validate(static_cast<std::size_t>(n_nodes));
    const double frac = params.num_nodes - std::floor(params.num_nodes);
    const double top_scale = frac > 0.0 ? frac : 1.0;

    LabeledMesh mesh;
    OrganCounters counters;

    // node heights along the main stem; the topmost internode shares the
    // fractional-node scale
    std::vector<double> heights(n_nodes + 1, 0.0);
    for (int k = 1; k <= n_nodes; ++k) {
        double scale = (k == n_nodes) ? top_scale : 1.0;
        heights[k] = heights[k - 1] +
                     profile.internode_length_m[k - 1] * params.internode_length_mult * scale;
    }
    add_cylinder(mesh, {0, 0, 0}, {0, 0, heights[n_nodes]}, profile.stem_radius_m, 6,
                 {Organ::Stem, 0, counters.stem++});

    for (int k = 1; k <= n_nodes; ++k) {
        Rng node_rng(derive_seed(seed, {kTagNode, static_cast<std::uint64_t>(k)}));
        double azimuth = (k % 2 == 1 ? 0.0 : 180.0) + node_rng.normal(0.0, profile.azimuth_noise_std_deg);
        double mean_angle = profile.petiole_angle_deg[k - 1] * params.petiole_angle_mult;
        double angle = mean_angle + node_rng.normal(0.0, profile.angle_noise_std_deg);
        double scale = (k == n_nodes) ? top_scale : 1.0;
        add_trifoliate(mesh, profile, {0, 0, heights[k]}, azimuth, angle,
                       profile.petiole_length_m[k - 1] * params.petiole_length_mult * scale,
                       profile.leaf_length_m[k - 1] * params.leaf_length_mult * scale,
                       profile.leaf_width_m[k - 1] * params.leaf_length_mult * scale, counters);
    }

    const int n_branches = soybean_branch_count(params.num_nodes);
    for (int b = 1; b <= n_branches; ++b) {
        Rng branch_rng(derive_seed(seed, {kTagBranch, static_cast<std::uint64_t>(b)}));
        int branch_nodes = 1 + static_cast<int>(branch_rng.categorical(profile.branch_node_count_weights));
        double azimuth = (b % 2 == 1 ? 90.0 : 270.0) + branch_rng.normal(0.0, profile.azimuth_noise_std_deg);
        double pitch = profile.branch_pitch_deg + branch_rng.normal(0.0, profile.angle_noise_std_deg);
        Eigen::Vector3d dir = direction_from_angles(std::clamp(pitch, 1.0, 179.0) * kDegToRad,
                                                    azimuth * kDegToRad);
        Eigen::Vector3d origin(0, 0, heights[std::min(b, n_nodes)]);
        double internode = profile.branch_internode_length_m * params.internode_length_mult;
        Eigen::Vector3d tip = origin + dir * (internode * branch_nodes);
        add_cylinder(mesh, origin, tip, profile.stem_radius_m * 0.7, 5, {Organ::Stem, 0, counters.stem++});

        for (int j = 1; j <= branch_nodes; ++j) {
            Rng bn_rng(derive_seed(seed, {kTagBranchNode, static_cast<std::uint64_t>(b),
                                          static_cast<std::uint64_t>(j)}));
            Eigen::Vector3d attach = origin + dir * (internode * j);
            double node_az = azimuth + (j % 2 == 1 ? 90.0 : -90.0) +
                             bn_rng.normal(0.0, profile.azimuth_noise_std_deg);
            double mean_angle = profile.branch_petiole_angle_deg * params.petiole_angle_mult;
            double angle = mean_angle + bn_rng.normal(0.0, profile.angle_noise_std_deg);
            add_trifoliate(mesh, profile, attach, node_az, angle,
                           profile.branch_petiole_length_m * params.petiole_length_mult,
                           profile.branch_leaf_length_m * params.leaf_length_mult,
                           profile.branch_leaf_width_m * params.leaf_length_mult, counters);
        }
    }
    return mesh;
}

LabeledMesh generate_maize_plant(const MaizeParams& params, const MorphologyProfile& profile,
                                 std::uint64_t seed) {
    PlantParams check{Species::Maize,
                      {params.leaf_length_mult, params.leaf_order_shift, params.internode_length_mult,
                       params.num_nodes}};
    check.validate();

    const int n_nodes = static_cast<int>(std::ceil(params.num_nodes));
    profile.validate(static_cast<std::size_t>(n_nodes));
    const double frac = params.num_nodes - std::floor(params.num_nodes);
    const double top_scale = frac > 0.0 ? frac : 1.0;

    LabeledMesh mesh;
    OrganCounters counters;

    std::vector<double> heights(n_nodes + 1, 0.0);
    for (int k = 1; k <= n_nodes; ++k) {
        double scale = (k == n_nodes) ? top_scale : 1.0;
        heights[k] = heights[k - 1] +
                     profile.internode_length_m[k - 1] * params.internode_length_mult * scale;
    }
    add_cylinder(mesh, {0, 0, 0}, {0, 0, heights[n_nodes]}, profile.stem_radius_m, 8,
                 {Organ::Stem, 0, counters.stem++});

    const int segs = profile.leaf_segments;
    for (int k = 1; k <= n_nodes; ++k) {
        Rng node_rng(derive_seed(seed, {kTagNode, static_cast<std::uint64_t>(k)}));
        double azimuth = ((k % 2 == 1 ? 0.0 : 180.0) +
                          node_rng.normal(0.0, profile.azimuth_noise_std_deg)) *
                         kDegToRad;
        double scale = (k == n_nodes) ? top_scale : 1.0;
        double length = profile.leaf_length_m[k - 1] * params.leaf_length_mult * scale;
        double base_width = profile.leaf_width_m[k - 1] * params.leaf_length_mult * scale;

        // droop grows with the shifted leaf order; elevation falls with t^2
        double order_eff = static_cast<double>(k) + params.leaf_order_shift;
        double bend = profile.bend_base_deg + profile.bend_gain_deg * order_eff;

        Eigen::Vector3d side(-std::sin(azimuth), std::cos(azimuth), 0.0);
        Eigen::Vector3d p = Eigen::Vector3d(0, 0, heights[k]);
        FaceLabel label{Organ::Leaf, 0, counters.leaf++};
        double seg_len = length / segs;
        for (int i = 0; i < segs; ++i) {
            double t0 = static_cast<double>(i) / segs;
            double t1 = static_cast<double>(i + 1) / segs;
            double tm = 0.5 * (t0 + t1);
            double elevation = (profile.base_elevation_deg - bend * tm * tm) * kDegToRad;
            Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth),
                                std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
            Eigen::Vector3d q = p + seg_len * dir;
            double w0 = base_width * (1.0 - (1.0 - profile.tip_width_fraction) * t0);
            double w1 = base_width * (1.0 - (1.0 - profile.tip_width_fraction) * t1);

            const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
            mesh.vertices.push_back(p - 0.5 * w0 * side);
            mesh.vertices.push_back(p + 0.5 * w0 * side);
            mesh.vertices.push_back(q - 0.5 * w1 * side);
            mesh.vertices.push_back(q + 0.5 * w1 * side);
            mesh.triangles.push_back({base, base + 1, base + 2});
            mesh.labels.push_back(label);
            mesh.triangles.push_back({base + 1, base + 3, base + 2});
            mesh.labels.push_back(label);
            p = q;
        }
    }
    return mesh;
}

LabeledMesh generate_plant(const PlantParams& params, const MorphologyProfile& profile,
                           std::uint64_t seed) {
    if (params.species == Species::Soybean)
        return generate_soybean_plant(soybean_params(params), profile, seed);
    return generate_maize_plant(maize_params(params), profile, seed);
}

std::uint64_t canopy_plant_seed(std::uint64_t canopy_seed, int row, int slot) {
    return derive_seed(canopy_seed, {kTagPlant, static_cast<std::uint64_t>(row),
                                     static_cast<std::uint64_t>(slot)});
}

LabeledMesh build_canopy(const PlantParams& params, const CanopyLayout& layout,
                         const MorphologyProfile& profile, std::uint64_t seed) {
    params.validate();
    layout.validate();

    LabeledMesh scene;
    for (int i = 0; i < layout.num_rows; ++i) {
        double y = (i - 0.5 * (layout.num_rows - 1)) * layout.row_spacing;
        for (int j = 0; j < layout.plants_per_row; ++j) {
            double x = (j - 0.5 * (layout.plants_per_row - 1)) * layout.plant_spacing;
            Eigen::Vector3d pos(x, y, 0.0);
            if (layout.position_jitter_std > 0.0) {
                Rng jr(derive_seed(seed, {kTagJitter, static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(j)}));
                pos.x() += jr.normal(0.0, layout.position_jitter_std);
                pos.y() += jr.normal(0.0, layout.position_jitter_std);
            }
            LabeledMesh plant = generate_plant(params, profile, canopy_plant_seed(seed, i, j));
            plant.set_plant_index(i * layout.plants_per_row + j);
            plant.translate(pos);
            scene.append(plant);
        }
    }
    return scene;
}

void add_ground_quad(LabeledMesh& mesh, double half_x, double half_y, double z) {
    const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back({-half_x, -half_y, z});
    mesh.vertices.push_back({half_x, -half_y, z});
    mesh.vertices.push_back({half_x, half_y, z});
    mesh.vertices.push_back({-half_x, half_y, z});
    FaceLabel label{Organ::Ground, -1, 0};
    mesh.triangles.push_back({base, base + 1, base + 2});
    mesh.labels.push_back(label);
    mesh.triangles.push_back({base, base + 2, base + 3});
    mesh.labels.push_back(label);
}

}  // namespace canopy
