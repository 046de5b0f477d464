#include "ply_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace canopy {

void save_ply(const PointCloud& cloud, const std::string& path) {
    if (cloud.has_colors() && cloud.colors.size() != cloud.points.size())
        throw DomainError("point cloud: color count does not match point count");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_colors())
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                        static_cast<float>(cloud.points[i].y()),
                        static_cast<float>(cloud.points[i].z())};
        out.write(reinterpret_cast<const char*>(xyz), 12);
        if (cloud.has_colors())
            out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

namespace {

struct PlyProperty {
    std::string name;
    std::string type;
};

std::size_t type_size(const std::string& t, const std::string& path) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw DataError(path + ": unsupported PLY property type '" + t + "'");
}

}  // namespace

PointCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
        throw DataError(path + ": not a PLY file");

    bool binary_le = false;
    std::size_t vertex_count = 0;
    std::vector<PlyProperty> props;
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream is(line);
        std::string tok;
        is >> tok;
        if (tok == "format") {
            std::string fmt;
            is >> fmt;
            binary_le = (fmt == "binary_little_endian");
            if (!binary_le) throw DataError(path + ": only binary_little_endian PLY is supported");
        } else if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            is >> name >> count;
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) vertex_count = count;
            else if (count > 0) throw DataError(path + ": unsupported PLY element '" + name + "'");
        } else if (tok == "property" && in_vertex_element) {
            PlyProperty p;
            is >> p.type >> p.name;
            if (p.type == "list") throw DataError(path + ": list properties are not supported");
            props.push_back(p);
        } else if (tok == "end_header") {
            break;
        }
    }

    std::size_t stride = 0;
    long off_x = -1, off_y = -1, off_z = -1, off_r = -1, off_g = -1, off_b = -1;
    std::string type_x, type_r;
    for (const auto& p : props) {
        if (p.name == "x") { off_x = static_cast<long>(stride); type_x = p.type; }
        if (p.name == "y") off_y = static_cast<long>(stride);
        if (p.name == "z") off_z = static_cast<long>(stride);
        if (p.name == "red") { off_r = static_cast<long>(stride); type_r = p.type; }
        if (p.name == "green") off_g = static_cast<long>(stride);
        if (p.name == "blue") off_b = static_cast<long>(stride);
        stride += type_size(p.type, path);
    }
    if (off_x < 0 || off_y < 0 || off_z < 0)
        throw DataError(path + ": missing vertex property x/y/z");
    const bool doubles = (type_x == "double" || type_x == "float64");
    const bool has_rgb = off_r >= 0 && off_g >= 0 && off_b >= 0;
    if (has_rgb && !(type_r == "uchar" || type_r == "uint8"))
        throw DataError(path + ": color properties must be uchar");

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    if (has_rgb) cloud.colors.reserve(vertex_count);
    std::vector<char> row(stride);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        if (!in.read(row.data(), static_cast<std::streamsize>(stride)))
            throw DataError(path + ": truncated vertex data at vertex " + std::to_string(i));
        auto read_coord = [&](long off) -> double {
            if (doubles) {
                double v;
                std::memcpy(&v, row.data() + off, 8);
                return v;
            }
            float v;
            std::memcpy(&v, row.data() + off, 4);
            return v;
        };
        cloud.points.emplace_back(read_coord(off_x), read_coord(off_y), read_coord(off_z));
        if (has_rgb) {
            cloud.colors.push_back({static_cast<std::uint8_t>(row[off_r]),
                                    static_cast<std::uint8_t>(row[off_g]),
                                    static_cast<std::uint8_t>(row[off_b])});
        }
    }
    return cloud;
}

}  // namespace canopy
