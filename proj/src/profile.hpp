#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace canopy {

// Per-node-rank variable tables for one species, rank 1 = bottom node.
// The shipped defaults are plausible field-shaped values, not published
// measurements; everything here is overridable through JSON profiles.
struct MorphologyProfile {
    // main stem, indexed by node rank - 1
    std::vector<double> leaf_length_m;
    std::vector<double> leaf_width_m;
    std::vector<double> petiole_length_m;
    std::vector<double> petiole_angle_deg;  // from the vertical stem axis
    std::vector<double> internode_length_m;

    // soybean branch nodes share one variable set
    double branch_leaf_length_m = 0.0;
    double branch_leaf_width_m = 0.0;
    double branch_petiole_length_m = 0.0;
    double branch_petiole_angle_deg = 0.0;
    double branch_internode_length_m = 0.0;
    // weight for drawing k+1 nodes per branch (index k); at most 2 entries
    std::vector<double> branch_node_count_weights{0.5, 0.5};

    double angle_noise_std_deg = 5.0;
    double azimuth_noise_std_deg = 60.0;

    // geometry constants
    double stem_radius_m = 0.004;
    double petiole_radius_m = 0.0015;
    double petiolule_fraction = 0.15;   // middle-leaflet stalk, fraction of leaf length
    double lateral_leaflet_angle_deg = 60.0;
    int blade_segments = 12;            // fan segments per leaflet outline
    double branch_pitch_deg = 40.0;     // branch stem angle from vertical

    // maize leaf bending: elevation(t) = base_elevation - (bend_base + bend_gain * order_eff) * t^2
    double base_elevation_deg = 60.0;
    double bend_base_deg = 35.0;
    double bend_gain_deg = 5.0;
    double tip_width_fraction = 0.1;
    int leaf_segments = 10;

    std::size_t max_nodes() const;
    void validate(std::size_t required_nodes) const;
};

MorphologyProfile default_soybean_profile();
MorphologyProfile default_maize_profile();

MorphologyProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const MorphologyProfile& p);
MorphologyProfile load_profile(const std::string& path);

}  // namespace canopy
