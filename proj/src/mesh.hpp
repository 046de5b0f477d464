#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace canopy {

enum class Organ : std::uint8_t { Leaf = 0, Stem = 1, Petiole = 2, Ground = 3 };

const char* organ_name(Organ o);
Organ organ_from_name(const std::string& name);

struct FaceLabel {
    Organ organ = Organ::Leaf;
    std::int32_t plant = 0;  // -1 for scene-level geometry (ground quad)
    std::int32_t index = 0;  // per (plant, organ class) counter

    bool operator==(const FaceLabel&) const = default;
};

// Triangle mesh in meters with one label per face.
struct LabeledMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<FaceLabel> labels;

    bool empty() const { return triangles.empty(); }
    double face_area(std::size_t f) const;
    double total_area() const;
    Eigen::Vector3d face_normal(std::size_t f) const;  // unit, or zero for degenerate

    void append(const LabeledMesh& other);
    void translate(const Eigen::Vector3d& t);
    void set_plant_index(std::int32_t plant);

    // Index sanity + label count; throws DataError on violation.
    void validate() const;
};

// Wavefront OBJ with one `g p<plant>_<organ><index>` group per organ plus a
// JSON sidecar mapping each group name to {plant, class, index}.
void save_obj(const LabeledMesh& mesh, const std::string& obj_path, const std::string& sidecar_path);
LabeledMesh load_obj(const std::string& obj_path, const std::string& sidecar_path);

std::string group_name(const FaceLabel& label);

}  // namespace canopy
