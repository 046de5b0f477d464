#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "profile.hpp"

namespace canopy {

enum class Species { Soybean, Maize };

const char* species_name(Species s);
Species species_from_name(const std::string& name);  // throws UsageError

struct ParamBound {
    const char* name;
    double lo;
    double hi;
};

// Optimized morphology parameters, one vector per species.
// soybean: leaf_length_mult, petiole_length_mult, petiole_angle_mult,
//          internode_length_mult, num_nodes
// maize:   leaf_length_mult, leaf_order_shift, internode_length_mult, num_nodes
std::span<const ParamBound> param_bounds(Species s);
std::size_t param_dim(Species s);

struct PlantParams {
    Species species = Species::Soybean;
    std::vector<double> values;

    double operator[](std::size_t i) const { return values[i]; }
    // Throws DomainError naming the offending field.
    void validate() const;
};

PlantParams make_params(Species s, std::span<const double> raw);       // validated
PlantParams clamp_params(std::span<const double> raw, Species s);       // clamped to bounds

struct SoybeanParams {
    double leaf_length_mult = 1.0;
    double petiole_length_mult = 1.0;
    double petiole_angle_mult = 1.0;
    double internode_length_mult = 1.0;
    double num_nodes = 14.0;
};

struct MaizeParams {
    double leaf_length_mult = 1.0;
    double leaf_order_shift = 0.0;
    double internode_length_mult = 1.0;
    double num_nodes = 18.0;
};

SoybeanParams soybean_params(const PlantParams& p);
MaizeParams maize_params(const PlantParams& p);

struct CanopyLayout {
    double row_spacing = 0.76;       // m
    double plant_spacing = 0.15;     // m
    int num_rows = 3;
    int plants_per_row = 10;
    double position_jitter_std = 0.0;  // m

    void validate() const;
    // footprint used as the default LAI ground area
    double footprint_area() const { return num_rows * row_spacing * plants_per_row * plant_spacing; }
};

LabeledMesh generate_soybean_plant(const SoybeanParams& params, const MorphologyProfile& profile,
                                   std::uint64_t seed);
LabeledMesh generate_maize_plant(const MaizeParams& params, const MorphologyProfile& profile,
                                 std::uint64_t seed);
LabeledMesh generate_plant(const PlantParams& params, const MorphologyProfile& profile,
                           std::uint64_t seed);

// Row-planted scene: rows parallel to +x, ground plane z = 0, plant index
// row * plants_per_row + slot recorded in the face labels.
LabeledMesh build_canopy(const PlantParams& params, const CanopyLayout& layout,
                         const MorphologyProfile& profile, std::uint64_t seed);

// Sub-seed a canopy hands to the plant at (row, slot); exposed so single-plant
// output can be reproduced exactly.
std::uint64_t canopy_plant_seed(std::uint64_t canopy_seed, int row, int slot);

// Soybean branch count rule: none below 8 nodes, then one per full node, capped at 6.
int soybean_branch_count(double num_nodes);

// Appends a soil quad at z=0 covering the layout footprint plus margin.
void add_ground_quad(LabeledMesh& mesh, double half_x, double half_y, double z = 0.0);

}  // namespace canopy
