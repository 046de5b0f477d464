#include "metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

CanopyMetrics compute_metrics(const LabeledMesh& mesh, double ground_area) {
    if (!(ground_area > 0.0)) throw DomainError("compute_metrics: ground_area must be > 0");
    mesh.validate();

    double area_sum = 0.0;
    double angle_sum = 0.0;
    double angle_sq_sum = 0.0;
    for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
        if (mesh.labels[f].organ != Organ::Leaf) continue;
        double a = mesh.face_area(f);
        if (a <= 0.0) continue;
        Eigen::Vector3d n = mesh.face_normal(f);
        double cosz = std::min(std::abs(n.z()), 1.0);
        double angle = std::acos(cosz) * 180.0 / std::numbers::pi;
        area_sum += a;
        angle_sum += a * angle;
        angle_sq_sum += a * angle * angle;
    }

    CanopyMetrics m;
    m.ground_area = ground_area;
    m.total_leaf_area = area_sum;
    m.lai = area_sum / ground_area;
    if (area_sum > 0.0) {
        m.angles_defined = true;
        m.angle_mean_deg = angle_sum / area_sum;
        double var = angle_sq_sum / area_sum - m.angle_mean_deg * m.angle_mean_deg;
        m.angle_std_deg = std::sqrt(std::max(var, 0.0));
    }
    return m;
}

EvaluationReport score(std::span<const CanopyMetrics> predicted,
                       std::span<const CanopyMetrics> truth) {
    if (predicted.size() != truth.size())
        throw DomainError("score: predicted and truth lists have different lengths");
    if (predicted.empty()) throw DomainError("score: need at least one scene");

    double lai_sq = 0.0, pct = 0.0, mean_sq = 0.0, std_sq = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        double dl = predicted[i].lai - truth[i].lai;
        lai_sq += dl * dl;
        if (truth[i].lai == 0.0)
            throw DomainError("score: true LAI is zero, percent error undefined");
        pct += std::abs(dl) / truth[i].lai;
        double dm = predicted[i].angle_mean_deg - truth[i].angle_mean_deg;
        double ds = predicted[i].angle_std_deg - truth[i].angle_std_deg;
        mean_sq += dm * dm;
        std_sq += ds * ds;
    }
    const double n = static_cast<double>(predicted.size());
    EvaluationReport r;
    r.laie = std::sqrt(lai_sq / n);
    r.laipe = pct / n;
    r.ame = std::sqrt(mean_sq / n);
    r.asde = std::sqrt(std_sq / n);
    r.scenes = predicted.size();
    return r;
}

json metrics_to_json(const CanopyMetrics& m) {
    return json{{"lai", m.lai},
                {"angle_mean_deg", m.angle_mean_deg},
                {"angle_std_deg", m.angle_std_deg},
                {"total_leaf_area", m.total_leaf_area},
                {"ground_area", m.ground_area},
                {"angles_defined", m.angles_defined}};
}

CanopyMetrics metrics_from_json(const json& j) {
    CanopyMetrics m;
    try {
        m.lai = j.at("lai").get<double>();
        m.angle_mean_deg = j.value("angle_mean_deg", 0.0);
        m.angle_std_deg = j.value("angle_std_deg", 0.0);
        m.total_leaf_area = j.value("total_leaf_area", 0.0);
        m.ground_area = j.value("ground_area", 0.0);
        m.angles_defined = j.value("angles_defined", true);
    } catch (const json::exception& e) {
        throw DataError(std::string("metrics JSON: ") + e.what());
    }
    return m;
}

json report_to_json(const EvaluationReport& r) {
    return json{{"LAIE", r.laie}, {"LAIPE", r.laipe}, {"AME", r.ame}, {"ASDE", r.asde},
                {"scenes", r.scenes}};
}

std::string report_table(const EvaluationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%-8s %8s %8s %8s %8s\n"
                  "%-8s %8.3f %8.3f %8.2f %8.2f\n",
                  "scenes", "LAIE", "LAIPE", "AME", "ASDE",
                  std::to_string(r.scenes).c_str(), r.laie, r.laipe, r.ame, r.asde);
    return buf;
}

}  // namespace canopy
