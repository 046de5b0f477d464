#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mesh.hpp"

namespace canopy {

struct CanopyMetrics {
    double lai = 0.0;             // leaf area / ground area
    double angle_mean_deg = 0.0;  // area-weighted inclination from zenith
    double angle_std_deg = 0.0;
    double total_leaf_area = 0.0;
    double ground_area = 0.0;
    bool angles_defined = false;  // false when the mesh has no leaf area
};

// Leaf faces only; per-face angle = arccos(|n . z|), statistics weighted by
// face area so tessellation density cannot bias them.
CanopyMetrics compute_metrics(const LabeledMesh& mesh, double ground_area);

struct EvaluationReport {
    double laie = 0.0;   // RMSE of LAI
    double laipe = 0.0;  // mean |pred - true| / true
    double ame = 0.0;    // RMSE of angle means
    double asde = 0.0;   // RMSE of angle stds
    std::size_t scenes = 0;
};

EvaluationReport score(std::span<const CanopyMetrics> predicted,
                       std::span<const CanopyMetrics> truth);

nlohmann::json metrics_to_json(const CanopyMetrics& m);
CanopyMetrics metrics_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const EvaluationReport& r);
std::string report_table(const EvaluationReport& r);

}  // namespace canopy
