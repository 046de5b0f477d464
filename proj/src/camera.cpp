#include "camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

double PinholeCamera::fy() const {
    return 0.5 * height / std::tan(0.5 * vfov_deg * std::numbers::pi / 180.0);
}

Eigen::Vector3d PinholeCamera::unproject_pixel(int ix, int iy, double depth) const {
    double u = ix + 0.5;
    double v = iy + 0.5;
    Eigen::Vector3d pc((u - cx()) / fx() * depth, (v - cy()) / fy() * depth, depth);
    return to_world(pc);
}

void PinholeCamera::validate() const {
    if (width <= 0 || height <= 0) throw DomainError("camera resolution must be positive");
    if (!(vfov_deg > 0.0 && vfov_deg < 180.0)) throw DomainError("camera vfov must be in (0, 180)");
    Eigen::Matrix3d rtr = rotation * rotation.transpose();
    if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
        throw DomainError("camera rotation is not orthonormal");
}

PinholeCamera overhead_camera(double x, double y, double ground_z, double height, int width,
                              int height_px, double vfov_deg) {
    PinholeCamera cam;
    cam.center = {x, y, ground_z + height};
    cam.rotation.row(0) = Eigen::RowVector3d(1, 0, 0);   // x_cam = +x (row direction)
    cam.rotation.row(1) = Eigen::RowVector3d(0, -1, 0);  // y_cam completes right-handed frame
    cam.rotation.row(2) = Eigen::RowVector3d(0, 0, -1);  // looking straight down
    cam.width = width;
    cam.height = height_px;
    cam.vfov_deg = vfov_deg;
    return cam;
}

json camera_to_json(const PinholeCamera& cam) {
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(cam.rotation(r, c));
    return json{{"center", {cam.center.x(), cam.center.y(), cam.center.z()}},
                {"rotation", rot},
                {"width", cam.width},
                {"height", cam.height},
                {"vfov_deg", cam.vfov_deg}};
}

PinholeCamera camera_from_json(const json& j) {
    PinholeCamera cam;
    try {
        auto c = j.at("center").get<std::vector<double>>();
        auto r = j.at("rotation").get<std::vector<double>>();
        if (c.size() != 3) throw DataError("camera: center must have 3 entries");
        if (r.size() != 9) throw DataError("camera: rotation must have 9 entries (row-major)");
        cam.center = {c[0], c[1], c[2]};
        for (int i = 0; i < 9; ++i) cam.rotation(i / 3, i % 3) = r[i];
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.vfov_deg = j.at("vfov_deg").get<double>();
    } catch (const json::exception& e) {
        throw DataError(std::string("camera JSON: ") + e.what());
    }
    cam.validate();
    return cam;
}

PinholeCamera load_camera(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("camera '" + path + "': " + e.what());
    }
    return camera_from_json(j);
}

void save_camera(const PinholeCamera& cam, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << camera_to_json(cam).dump(2) << "\n";
}

}  // namespace canopy
