#include "profile.hpp"

#include <algorithm>
#include <fstream>

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

std::size_t MorphologyProfile::max_nodes() const {
    std::size_t n = leaf_length_m.size();
    n = std::min(n, leaf_width_m.size());
    n = std::min(n, petiole_length_m.size());
    n = std::min(n, petiole_angle_deg.size());
    n = std::min(n, internode_length_m.size());
    return n;
}

void MorphologyProfile::validate(std::size_t required_nodes) const {
    if (max_nodes() == 0) throw ConfigError("profile: empty node tables");
    if (max_nodes() < required_nodes)
        throw ConfigError("profile: node tables shorter than requested node count (" +
                          std::to_string(max_nodes()) + " < " + std::to_string(required_nodes) + ")");
    auto positive = [](const std::vector<double>& v, const char* name) {
        for (double x : v) {
            if (!(x > 0.0)) throw ConfigError(std::string("profile: non-positive entry in ") + name);
        }
    };
    positive(leaf_length_m, "leaf_length_m");
    positive(leaf_width_m, "leaf_width_m");
    positive(petiole_length_m, "petiole_length_m");
    positive(internode_length_m, "internode_length_m");
    if (branch_node_count_weights.empty() || branch_node_count_weights.size() > 2)
        throw ConfigError("profile: branch_node_count_weights must have 1 or 2 entries");
    double wsum = 0.0;
    for (double w : branch_node_count_weights) {
        if (w < 0.0) throw ConfigError("profile: negative branch node weight");
        wsum += w;
    }
    if (wsum <= 0.0) throw ConfigError("profile: branch node weights sum to zero");
    if (blade_segments < 3) throw ConfigError("profile: blade_segments must be >= 3");
    if (leaf_segments < 1) throw ConfigError("profile: leaf_segments must be >= 1");
    if (!(stem_radius_m > 0.0) || !(petiole_radius_m > 0.0))
        throw ConfigError("profile: radii must be positive");
    if (angle_noise_std_deg < 0.0 || azimuth_noise_std_deg < 0.0)
        throw ConfigError("profile: noise std must be >= 0");
}

MorphologyProfile default_soybean_profile() {
    MorphologyProfile p;
    p.leaf_length_m = {0.060, 0.080, 0.100, 0.110, 0.120, 0.125, 0.125,
                       0.120, 0.115, 0.110, 0.100, 0.090, 0.080, 0.070};
    p.leaf_width_m.resize(p.leaf_length_m.size());
    for (std::size_t i = 0; i < p.leaf_length_m.size(); ++i)
        p.leaf_width_m[i] = 0.7 * p.leaf_length_m[i];
    p.petiole_length_m = {0.100, 0.130, 0.160, 0.180, 0.200, 0.210, 0.210,
                          0.200, 0.190, 0.170, 0.150, 0.130, 0.110, 0.090};
    p.petiole_angle_deg = {55.0, 52.0, 50.0, 48.0, 46.0, 44.0, 42.0,
                           40.0, 38.0, 36.0, 34.0, 32.0, 30.0, 28.0};
    // heights sized so box-extreme internode multipliers keep the canopy
    // below the 1 m standardized camera
    p.internode_length_m = {0.020, 0.025, 0.030, 0.035, 0.040, 0.040, 0.040,
                            0.040, 0.035, 0.035, 0.030, 0.030, 0.025, 0.020};
    p.branch_leaf_length_m = 0.090;
    p.branch_leaf_width_m = 0.063;
    p.branch_petiole_length_m = 0.120;
    p.branch_petiole_angle_deg = 50.0;
    p.branch_internode_length_m = 0.030;
    return p;
}

MorphologyProfile default_maize_profile() {
    MorphologyProfile p;
    p.leaf_length_m = {0.35, 0.45, 0.55, 0.65, 0.75, 0.82, 0.88, 0.92, 0.95,
                       0.95, 0.92, 0.88, 0.82, 0.75, 0.68, 0.60, 0.52, 0.45};
    p.leaf_width_m = {0.050, 0.060, 0.070, 0.075, 0.080, 0.085, 0.090, 0.095, 0.095,
                      0.095, 0.090, 0.090, 0.085, 0.080, 0.075, 0.070, 0.065, 0.060};
    p.internode_length_m = {0.08, 0.09, 0.10, 0.11, 0.12, 0.12, 0.13, 0.13, 0.13,
                            0.13, 0.12, 0.12, 0.11, 0.11, 0.10, 0.10, 0.09, 0.09};
    // maize has no petioles; keep tables filled so max_nodes() is uniform
    p.petiole_length_m.assign(p.leaf_length_m.size(), 0.001);
    p.petiole_angle_deg.assign(p.leaf_length_m.size(), 0.0);
    p.stem_radius_m = 0.012;
    p.angle_noise_std_deg = 0.0;
    return p;
}

namespace {

std::vector<double> read_table(const json& j, const std::string& key) {
    const json& t = j.at(key);
    if (!t.contains("count") || !t.contains("values"))
        throw DataError("profile table '" + key + "' needs {count, values}");
    auto values = t.at("values").get<std::vector<double>>();
    if (t.at("count").get<std::size_t>() != values.size())
        throw DataError("profile table '" + key + "': count does not match values length");
    return values;
}

json write_table(const std::vector<double>& v) {
    return json{{"count", v.size()}, {"values", v}};
}

}  // namespace

MorphologyProfile profile_from_json(const json& j) {
    MorphologyProfile p;
    try {
        p.leaf_length_m = read_table(j, "leaf_length_m");
        p.leaf_width_m = read_table(j, "leaf_width_m");
        p.petiole_length_m = read_table(j, "petiole_length_m");
        p.petiole_angle_deg = read_table(j, "petiole_angle_deg");
        p.internode_length_m = read_table(j, "internode_length_m");
        if (j.contains("branch")) {
            const json& b = j.at("branch");
            p.branch_leaf_length_m = b.value("leaf_length_m", p.branch_leaf_length_m);
            p.branch_leaf_width_m = b.value("leaf_width_m", p.branch_leaf_width_m);
            p.branch_petiole_length_m = b.value("petiole_length_m", p.branch_petiole_length_m);
            p.branch_petiole_angle_deg = b.value("petiole_angle_deg", p.branch_petiole_angle_deg);
            p.branch_internode_length_m = b.value("internode_length_m", p.branch_internode_length_m);
            if (b.contains("node_count_weights"))
                p.branch_node_count_weights = b.at("node_count_weights").get<std::vector<double>>();
        }
        p.angle_noise_std_deg = j.value("angle_noise_std_deg", p.angle_noise_std_deg);
        p.azimuth_noise_std_deg = j.value("azimuth_noise_std_deg", p.azimuth_noise_std_deg);
        p.stem_radius_m = j.value("stem_radius_m", p.stem_radius_m);
        p.petiole_radius_m = j.value("petiole_radius_m", p.petiole_radius_m);
        p.petiolule_fraction = j.value("petiolule_fraction", p.petiolule_fraction);
        p.lateral_leaflet_angle_deg = j.value("lateral_leaflet_angle_deg", p.lateral_leaflet_angle_deg);
        p.blade_segments = j.value("blade_segments", p.blade_segments);
        p.branch_pitch_deg = j.value("branch_pitch_deg", p.branch_pitch_deg);
        p.base_elevation_deg = j.value("base_elevation_deg", p.base_elevation_deg);
        p.bend_base_deg = j.value("bend_base_deg", p.bend_base_deg);
        p.bend_gain_deg = j.value("bend_gain_deg", p.bend_gain_deg);
        p.tip_width_fraction = j.value("tip_width_fraction", p.tip_width_fraction);
        p.leaf_segments = j.value("leaf_segments", p.leaf_segments);
    } catch (const json::exception& e) {
        throw DataError(std::string("profile JSON: ") + e.what());
    }
    return p;
}

json profile_to_json(const MorphologyProfile& p) {
    return json{
        {"leaf_length_m", write_table(p.leaf_length_m)},
        {"leaf_width_m", write_table(p.leaf_width_m)},
        {"petiole_length_m", write_table(p.petiole_length_m)},
        {"petiole_angle_deg", write_table(p.petiole_angle_deg)},
        {"internode_length_m", write_table(p.internode_length_m)},
        {"branch",
         {{"leaf_length_m", p.branch_leaf_length_m},
          {"leaf_width_m", p.branch_leaf_width_m},
          {"petiole_length_m", p.branch_petiole_length_m},
          {"petiole_angle_deg", p.branch_petiole_angle_deg},
          {"internode_length_m", p.branch_internode_length_m},
          {"node_count_weights", p.branch_node_count_weights}}},
        {"angle_noise_std_deg", p.angle_noise_std_deg},
        {"azimuth_noise_std_deg", p.azimuth_noise_std_deg},
        {"stem_radius_m", p.stem_radius_m},
        {"petiole_radius_m", p.petiole_radius_m},
        {"petiolule_fraction", p.petiolule_fraction},
        {"lateral_leaflet_angle_deg", p.lateral_leaflet_angle_deg},
        {"blade_segments", p.blade_segments},
        {"branch_pitch_deg", p.branch_pitch_deg},
        {"base_elevation_deg", p.base_elevation_deg},
        {"bend_base_deg", p.bend_base_deg},
        {"bend_gain_deg", p.bend_gain_deg},
        {"tip_width_fraction", p.tip_width_fraction},
        {"leaf_segments", p.leaf_segments},
    };
}

MorphologyProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("profile '" + path + "': " + e.what());
    }
    return profile_from_json(j);
}

}  // namespace canopy
