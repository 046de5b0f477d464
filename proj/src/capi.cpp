#include "canopyfit/canopyfit.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "camera.hpp"
#include "errors.hpp"
#include "histograms.hpp"
#include "image_io.hpp"
#include "loss.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "morphology.hpp"
#include "pipeline.hpp"
#include "ply_io.hpp"
#include "pointcloud.hpp"
#include "render.hpp"
#include "rowfit.hpp"

using nlohmann::json;

struct cf_mesh {
    canopy::LabeledMesh mesh;
};
struct cf_cloud {
    canopy::PointCloud cloud;
};
struct cf_camera {
    canopy::PinholeCamera camera;
};
struct cf_depth {
    canopy::DepthMap depth;
    canopy::ForegroundMask mask;
};
struct cf_stats {
    canopy::HistogramSet stats;
};

namespace {

thread_local std::string g_last_error;

cf_status status_for(const canopy::Error& e) {
    using Kind = canopy::Error::Kind;
    switch (e.kind()) {
        case Kind::Usage:
        case Kind::Domain: return CF_E_INVALID;
        case Kind::Config: return CF_E_CONFIG;
        case Kind::Data: return CF_E_DATA;
        case Kind::Numeric: return CF_E_NUMERIC;
        case Kind::Io: return CF_E_IO;
    }
    return CF_E_INVALID;
}

template <typename Fn>
cf_status guarded(Fn&& fn) {
    try {
        fn();
        return CF_OK;
    } catch (const canopy::Error& e) {
        g_last_error = e.what();
        return status_for(e);
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return CF_E_DATA;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CF_E_NUMERIC;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool cond, const char* what) {
    if (!cond) throw canopy::DomainError(what);
}

json parse_json(const char* text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw canopy::DataError(std::string(what) + ": " + e.what());
    }
}

canopy::CanopyLayout layout_from_json_text(const char* text) {
    canopy::CanopyLayout layout;
    if (!text) return layout;
    json j = parse_json(text, "layout JSON");
    layout.row_spacing = j.value("row_spacing", layout.row_spacing);
    layout.plant_spacing = j.value("plant_spacing", layout.plant_spacing);
    layout.num_rows = j.value("num_rows", layout.num_rows);
    layout.plants_per_row = j.value("plants_per_row", layout.plants_per_row);
    layout.position_jitter_std = j.value("position_jitter_std", layout.position_jitter_std);
    layout.validate();
    return layout;
}

canopy::MorphologyProfile profile_for(canopy::Species species, const char* profile_json) {
    if (profile_json) return canopy::profile_from_json(parse_json(profile_json, "profile JSON"));
    return species == canopy::Species::Maize ? canopy::default_maize_profile()
                                             : canopy::default_soybean_profile();
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "0.1.0"; }

const char* cf_last_error(void) { return g_last_error.c_str(); }

void cf_string_free(char* s) { delete[] s; }

cf_status cf_plant_generate(const char* species, const double* values, size_t dim,
                            const char* profile_json, uint64_t seed, cf_mesh** out) {
    return guarded([&] {
        require(species && values && out, "null argument");
        canopy::Species s = canopy::species_from_name(species);
        canopy::PlantParams params = canopy::make_params(s, {values, dim});
        *out = new cf_mesh{canopy::generate_plant(params, profile_for(s, profile_json), seed)};
    });
}

cf_status cf_canopy_generate(const char* species, const double* values, size_t dim,
                             const char* layout_json, const char* profile_json, uint64_t seed,
                             cf_mesh** out) {
    return guarded([&] {
        require(species && values && out, "null argument");
        canopy::Species s = canopy::species_from_name(species);
        canopy::PlantParams params = canopy::make_params(s, {values, dim});
        *out = new cf_mesh{canopy::build_canopy(params, layout_from_json_text(layout_json),
                                                profile_for(s, profile_json), seed)};
    });
}

cf_status cf_params_clamp(const char* species, double* values, size_t dim) {
    return guarded([&] {
        require(species && values, "null argument");
        canopy::Species s = canopy::species_from_name(species);
        canopy::PlantParams p = canopy::clamp_params({values, dim}, s);
        for (size_t i = 0; i < dim; ++i) values[i] = p.values[i];
    });
}

cf_status cf_default_profile_json(const char* species, char** out_json) {
    return guarded([&] {
        require(species && out_json, "null argument");
        canopy::Species s = canopy::species_from_name(species);
        *out_json = dup_string(canopy::profile_to_json(profile_for(s, nullptr)).dump(2));
    });
}

cf_status cf_mesh_save_obj(const cf_mesh* mesh, const char* obj_path, const char* sidecar_path) {
    return guarded([&] {
        require(mesh && obj_path && sidecar_path, "null argument");
        canopy::save_obj(mesh->mesh, obj_path, sidecar_path);
    });
}

cf_status cf_mesh_load_obj(const char* obj_path, const char* sidecar_path, cf_mesh** out) {
    return guarded([&] {
        require(obj_path && sidecar_path && out, "null argument");
        *out = new cf_mesh{canopy::load_obj(obj_path, sidecar_path)};
    });
}

cf_status cf_mesh_counts(const cf_mesh* mesh, size_t* vertices, size_t* triangles) {
    return guarded([&] {
        require(mesh, "null argument");
        if (vertices) *vertices = mesh->mesh.vertices.size();
        if (triangles) *triangles = mesh->mesh.triangles.size();
    });
}

cf_status cf_mesh_add_ground(cf_mesh* mesh, double half_x, double half_y) {
    return guarded([&] {
        require(mesh, "null argument");
        require(half_x > 0.0 && half_y > 0.0, "ground extents must be positive");
        canopy::add_ground_quad(mesh->mesh, half_x, half_y);
    });
}

void cf_mesh_free(cf_mesh* mesh) { delete mesh; }

cf_status cf_camera_from_json(const char* json_text, cf_camera** out) {
    return guarded([&] {
        require(json_text && out, "null argument");
        *out = new cf_camera{canopy::camera_from_json(parse_json(json_text, "camera JSON"))};
    });
}

cf_status cf_camera_to_json(const cf_camera* cam, char** out_json) {
    return guarded([&] {
        require(cam && out_json, "null argument");
        *out_json = dup_string(canopy::camera_to_json(cam->camera).dump(2));
    });
}

cf_status cf_camera_load(const char* path, cf_camera** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new cf_camera{canopy::load_camera(path)};
    });
}

cf_status cf_camera_save(const cf_camera* cam, const char* path) {
    return guarded([&] {
        require(cam && path, "null argument");
        canopy::save_camera(cam->camera, path);
    });
}

cf_status cf_camera_overhead(double x, double y, double ground_z, double height, int width,
                             int height_px, double vfov_deg, cf_camera** out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        canopy::PinholeCamera cam =
            canopy::overhead_camera(x, y, ground_z, height, width, height_px, vfov_deg);
        cam.validate();
        *out = new cf_camera{cam};
    });
}

void cf_camera_free(cf_camera* cam) { delete cam; }

cf_status cf_render_depth(const cf_mesh* mesh, const cf_camera* cam, cf_depth** out) {
    return guarded([&] {
        require(mesh && cam && out, "null argument");
        auto [depth, mask] = canopy::render_depth(mesh->mesh, cam->camera);
        *out = new cf_depth{std::move(depth), std::move(mask)};
    });
}

cf_status cf_depth_save(const cf_depth* depth, const char* cdm_path, const char* pgm_path) {
    return guarded([&] {
        require(depth && cdm_path, "null argument");
        canopy::save_cdm(depth->depth, cdm_path);
        if (pgm_path) canopy::save_pgm(depth->mask, pgm_path);
    });
}

cf_status cf_depth_load(const char* cdm_path, const char* mask_path, const cf_camera* cam,
                        cf_depth** out) {
    return guarded([&] {
        require(cdm_path && cam && out, "null argument");
        canopy::DepthMap depth = canopy::load_cdm(cdm_path);
        if (cam->camera.width != depth.width || cam->camera.height != depth.height)
            throw canopy::DataError("camera resolution does not match depth file");
        depth.camera = cam->camera;
        canopy::ForegroundMask mask;
        if (mask_path) {
            mask = canopy::load_pgm(mask_path);
            if (mask.width != depth.width || mask.height != depth.height)
                throw canopy::DataError("mask dimensions do not match depth file");
        } else {
            mask = canopy::make_mask(depth.width, depth.height);
            for (std::size_t i = 0; i < depth.depth.size(); ++i)
                mask.mask[i] = std::isfinite(depth.depth[i]) ? 255 : 0;
        }
        *out = new cf_depth{std::move(depth), std::move(mask)};
    });
}

cf_status cf_depth_mask_from_rgb(cf_depth* depth, const char* ppm_path, const char* species,
                                 double render_height, const char* rules_json) {
    return guarded([&] {
        require(depth && ppm_path, "null argument");
        canopy::MaskRules rules = canopy::MaskRules::soybean_defaults();
        if (species && canopy::species_from_name(species) == canopy::Species::Maize)
            rules = canopy::MaskRules::maize_defaults();
        if (rules_json) {
            json merged = canopy::mask_rules_to_json(rules);
            merged.update(parse_json(rules_json, "mask rules JSON"));
            rules = canopy::mask_rules_from_json(merged);
        }
        canopy::RgbImage rgb = canopy::load_ppm(ppm_path);
        depth->mask = canopy::mask_from_rgb(depth->depth, rgb, render_height, rules);
    });
}

cf_status cf_depth_unproject(const cf_depth* depth, cf_cloud** out) {
    return guarded([&] {
        require(depth && out, "null argument");
        *out = new cf_cloud{canopy::unproject(depth->depth, depth->mask)};
    });
}

void cf_depth_free(cf_depth* depth) { delete depth; }

cf_status cf_mesh_sample_points(const cf_mesh* mesh, size_t count, uint64_t seed,
                                const char* colors_json, cf_cloud** out) {
    return guarded([&] {
        require(mesh && out, "null argument");
        canopy::OrganColors colors;
        if (colors_json) {
            json j = parse_json(colors_json, "organ colors JSON");
            auto read = [&](const char* key, std::array<std::uint8_t, 3>& dst) {
                if (!j.contains(key)) return;
                auto v = j.at(key).get<std::vector<int>>();
                if (v.size() != 3) throw canopy::DataError("organ color needs 3 channels");
                for (int c = 0; c < 3; ++c) dst[c] = static_cast<std::uint8_t>(v[c]);
            };
            read("leaf", colors.leaf);
            read("stem", colors.stem);
            read("petiole", colors.petiole);
            read("ground", colors.ground);
        }
        *out = new cf_cloud{canopy::sample_surface_points(mesh->mesh, count, seed, colors)};
    });
}

cf_status cf_cloud_save_ply(const cf_cloud* cloud, const char* path) {
    return guarded([&] {
        require(cloud && path, "null argument");
        canopy::save_ply(cloud->cloud, path);
    });
}

cf_status cf_cloud_load_ply(const char* path, cf_cloud** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new cf_cloud{canopy::load_ply(path)};
    });
}

cf_status cf_cloud_size(const cf_cloud* cloud, size_t* count) {
    return guarded([&] {
        require(cloud && count, "null argument");
        *count = cloud->cloud.size();
    });
}

void cf_cloud_free(cf_cloud* cloud) { delete cloud; }

cf_status cf_rowfit(const cf_cloud* cloud, const char* config_json, uint64_t seed,
                    char** camera_json_out, char** diagnostics_json_out) {
    return guarded([&] {
        require(cloud && camera_json_out, "null argument");
        canopy::RowFitConfig cfg;
        if (config_json) cfg = canopy::rowfit_config_from_json(parse_json(config_json, "rowfit JSON"));
        canopy::RowFitReport report = canopy::run_rowfit(cloud->cloud, cfg, seed);
        *camera_json_out = dup_string(canopy::camera_to_json(report.camera).dump(2));
        if (diagnostics_json_out)
            *diagnostics_json_out = dup_string(report.diagnostics_json().dump(2));
    });
}

cf_status cf_stats_compute(const cf_depth* depth, const char* spec_json, cf_stats** out) {
    return guarded([&] {
        require(depth && out, "null argument");
        canopy::StatsConfig cfg;
        if (spec_json) cfg = canopy::stats_config_from_json(parse_json(spec_json, "stats JSON"));
        *out = new cf_stats{canopy::compute_stats(depth->depth, depth->mask, cfg)};
    });
}

cf_status cf_stats_to_json(const cf_stats* stats, char** out_json) {
    return guarded([&] {
        require(stats && out_json, "null argument");
        *out_json = dup_string(canopy::histogram_set_to_json(stats->stats).dump(2));
    });
}

cf_status cf_stats_from_json(const char* json_text, cf_stats** out) {
    return guarded([&] {
        require(json_text && out, "null argument");
        *out = new cf_stats{canopy::histogram_set_from_json(parse_json(json_text, "stats JSON"))};
    });
}

cf_status cf_loss(const cf_stats* obs, const cf_stats* pred, const char* weights_json,
                  char** breakdown_json_out) {
    return guarded([&] {
        require(obs && pred && breakdown_json_out, "null argument");
        canopy::LossWeights w;
        if (weights_json) w = canopy::loss_weights_from_json(parse_json(weights_json, "weights JSON"));
        canopy::LossBreakdown b = canopy::total_loss(obs->stats, pred->stats, w);
        *breakdown_json_out = dup_string(canopy::loss_breakdown_to_json(b).dump(2));
    });
}

void cf_stats_free(cf_stats* stats) { delete stats; }

cf_status cf_metrics_compute(const cf_mesh* mesh, double ground_area, char** metrics_json_out) {
    return guarded([&] {
        require(mesh && metrics_json_out, "null argument");
        canopy::CanopyMetrics m = canopy::compute_metrics(mesh->mesh, ground_area);
        *metrics_json_out = dup_string(canopy::metrics_to_json(m).dump(2));
    });
}

cf_status cf_metrics_score(const char* predicted_json, const char* truth_json,
                           char** report_json_out) {
    return guarded([&] {
        require(predicted_json && truth_json && report_json_out, "null argument");
        auto parse_list = [](const char* text, const char* what) {
            json j = parse_json(text, what);
            if (!j.is_array()) throw canopy::DataError(std::string(what) + ": expected a JSON array");
            std::vector<canopy::CanopyMetrics> out;
            for (const auto& item : j) out.push_back(canopy::metrics_from_json(item));
            return out;
        };
        auto pred = parse_list(predicted_json, "predicted metrics");
        auto truth = parse_list(truth_json, "truth metrics");
        canopy::EvaluationReport r = canopy::score(pred, truth);
        json out = canopy::report_to_json(r);
        out["table"] = canopy::report_table(r);
        *report_json_out = dup_string(out.dump(2));
    });
}

cf_status cf_default_scene_config_json(const char* species, const char* preset, char** out_json) {
    return guarded([&] {
        require(species && out_json, "null argument");
        canopy::SceneConfig cfg = canopy::SceneConfig::defaults(canopy::species_from_name(species));
        if (preset) cfg.apply_preset(preset);
        *out_json = dup_string(canopy::scene_config_to_json(cfg).dump(2));
    });
}

cf_status cf_fit_run(const char* scene_config_json, const char* output_dir,
                     char** fit_result_json_out) {
    return guarded([&] {
        require(scene_config_json != nullptr, "null argument");
        canopy::SceneConfig cfg =
            canopy::scene_config_from_json(parse_json(scene_config_json, "scene config JSON"));
        if (output_dir) cfg.output_dir = output_dir;
        canopy::FitResult result = canopy::run_fit(cfg);
        if (fit_result_json_out) *fit_result_json_out = dup_string(result.to_json(cfg).dump(2));
    });
}

}  // extern "C"
