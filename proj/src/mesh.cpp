#include "mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

const char* organ_name(Organ o) {
    switch (o) {
        case Organ::Leaf: return "leaf";
        case Organ::Stem: return "stem";
        case Organ::Petiole: return "petiole";
        case Organ::Ground: return "ground";
    }
    return "unknown";
}

Organ organ_from_name(const std::string& name) {
    if (name == "leaf") return Organ::Leaf;
    if (name == "stem") return Organ::Stem;
    if (name == "petiole") return Organ::Petiole;
    if (name == "ground") return Organ::Ground;
    throw DataError("unknown organ class '" + name + "'");
}

double LabeledMesh::face_area(std::size_t f) const {
    const auto& t = triangles[f];
    const Eigen::Vector3d& a = vertices[t[0]];
    const Eigen::Vector3d& b = vertices[t[1]];
    const Eigen::Vector3d& c = vertices[t[2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

double LabeledMesh::total_area() const {
    double s = 0.0;
    for (std::size_t f = 0; f < triangles.size(); ++f) s += face_area(f);
    return s;
}

Eigen::Vector3d LabeledMesh::face_normal(std::size_t f) const {
    const auto& t = triangles[f];
    Eigen::Vector3d n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    double len = n.norm();
    if (len <= 0.0) return Eigen::Vector3d::Zero();
    return n / len;
}

void LabeledMesh::append(const LabeledMesh& other) {
    const std::uint32_t base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    triangles.reserve(triangles.size() + other.triangles.size());
    for (const auto& t : other.triangles) {
        triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

void LabeledMesh::translate(const Eigen::Vector3d& t) {
    for (auto& v : vertices) v += t;
}

void LabeledMesh::set_plant_index(std::int32_t plant) {
    for (auto& l : labels) {
        if (l.organ != Organ::Ground) l.plant = plant;
    }
}

void LabeledMesh::validate() const {
    if (labels.size() != triangles.size())
        throw DataError("mesh: face label count does not match triangle count");
    for (const auto& t : triangles) {
        for (std::uint32_t idx : t) {
            if (idx >= vertices.size()) throw DataError("mesh: vertex index out of range");
        }
    }
}

std::string group_name(const FaceLabel& label) {
    if (label.organ == Organ::Ground) return "ground";
    std::ostringstream os;
    os << "p" << label.plant << "_" << organ_name(label.organ) << label.index;
    return os.str();
}

void save_obj(const LabeledMesh& mesh, const std::string& obj_path, const std::string& sidecar_path) {
    mesh.validate();
    std::ofstream obj(obj_path);
    if (!obj) throw IoError("cannot open '" + obj_path + "' for writing");

    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
        obj << buf;
    }

    json groups = json::object();
    std::string current;
    for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
        const FaceLabel& l = mesh.labels[f];
        std::string g = group_name(l);
        if (g != current) {
            obj << "g " << g << "\n";
            current = g;
            if (!groups.contains(g)) {
                groups[g] = {{"plant", l.plant}, {"class", organ_name(l.organ)}, {"index", l.index}};
            }
        }
        const auto& t = mesh.triangles[f];
        obj << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
    if (!obj) throw IoError("write failure on '" + obj_path + "'");
    obj.close();

    std::ofstream side(sidecar_path);
    if (!side) throw IoError("cannot open '" + sidecar_path + "' for writing");
    side << json{{"groups", groups}}.dump(2) << "\n";
}

LabeledMesh load_obj(const std::string& obj_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw IoError("cannot open sidecar '" + sidecar_path + "'");
    json sj;
    try {
        side >> sj;
    } catch (const json::exception& e) {
        throw DataError("sidecar '" + sidecar_path + "': " + e.what());
    }
    if (!sj.contains("groups")) throw DataError("sidecar '" + sidecar_path + "' missing 'groups'");
    std::map<std::string, FaceLabel> group_labels;
    for (auto& [name, g] : sj["groups"].items()) {
        FaceLabel l;
        l.organ = organ_from_name(g.at("class").get<std::string>());
        l.plant = g.at("plant").get<std::int32_t>();
        l.index = g.at("index").get<std::int32_t>();
        group_labels[name] = l;
    }

    std::ifstream obj(obj_path);
    if (!obj) throw IoError("cannot open '" + obj_path + "'");
    LabeledMesh mesh;
    FaceLabel current;
    bool have_group = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(obj, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string tok;
        is >> tok;
        if (tok == "v") {
            Eigen::Vector3d v;
            if (!(is >> v.x() >> v.y() >> v.z()))
                throw DataError(obj_path + ":" + std::to_string(lineno) + ": bad vertex");
            mesh.vertices.push_back(v);
        } else if (tok == "g") {
            std::string name;
            is >> name;
            auto it = group_labels.find(name);
            if (it == group_labels.end())
                throw DataError(obj_path + ":" + std::to_string(lineno) + ": group '" + name +
                                "' not in sidecar");
            current = it->second;
            have_group = true;
        } else if (tok == "f") {
            if (!have_group)
                throw DataError(obj_path + ":" + std::to_string(lineno) + ": face before any group");
            std::array<std::uint32_t, 3> t{};
            for (int k = 0; k < 3; ++k) {
                long idx = 0;
                if (!(is >> idx) || idx < 1)
                    throw DataError(obj_path + ":" + std::to_string(lineno) + ": bad face index");
                t[k] = static_cast<std::uint32_t>(idx - 1);
            }
            mesh.triangles.push_back(t);
            mesh.labels.push_back(current);
        }
    }
    mesh.validate();
    return mesh;
}

}  // namespace canopy
