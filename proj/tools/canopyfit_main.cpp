// canopyfit command-line tool. Links the C API only; JSON plumbing for
// config merging is done locally.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "canopyfit/canopyfit.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(cf_status s) {
    switch (s) {
        case CF_OK: return kExitOk;
        case CF_E_INVALID: return kExitUsage;
        case CF_E_CONFIG:
        case CF_E_DATA:
        case CF_E_IO: return kExitData;
        case CF_E_NUMERIC: return kExitNumeric;
    }
    return kExitNumeric;
}

[[noreturn]] void fail(cf_status s) {
    std::cerr << "error: " << cf_last_error() << "\n";
    std::exit(exit_code_for(s));
}

void check(cf_status s) {
    if (s != CF_OK) fail(s);
}

std::string take(char* s) {
    std::string out = s ? s : "";
    cf_string_free(s);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        std::exit(kExitData);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write '" << path << "'\n";
        std::exit(kExitData);
    }
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            std::cerr << "error: bad parameter value '" << item << "'\n";
            std::exit(kExitUsage);
        }
    }
    return values;
}

// --a.b.c=value override applied to a JSON document
void apply_overrides(json& cfg, const std::vector<std::string>& extras) {
    for (const auto& raw : extras) {
        if (raw.rfind("--", 0) != 0 || raw.find('=') == std::string::npos) {
            std::cerr << "error: unrecognized argument '" << raw << "' (overrides look like --key=value)\n";
            std::exit(kExitUsage);
        }
        std::string key = raw.substr(2, raw.find('=') - 2);
        std::string value = raw.substr(raw.find('=') + 1);
        json* node = &cfg;
        std::size_t start = 0;
        while (true) {
            std::size_t dot = key.find('.', start);
            std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
            if (part.empty()) {
                std::cerr << "error: empty key segment in override '" << raw << "'\n";
                std::exit(kExitUsage);
            }
            if (dot == std::string::npos) {
                try {
                    (*node)[part] = json::parse(value);
                } catch (const json::exception&) {
                    (*node)[part] = value;
                }
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
}

struct GenerateArgs {
    std::string species = "soybean";
    std::string params_csv;
    std::string params_file;
    std::string profile_file;
    std::string layout_json;
    bool single_plant = false;
    std::uint64_t seed = 7;
    std::string out_obj = "canopy.obj";
    std::string out_labels;
    std::string out_params;
};

int cmd_generate(const GenerateArgs& a) {
    std::string species = a.species;
    std::vector<double> values;
    std::uint64_t seed = a.seed;
    if (!a.params_file.empty()) {
        json pj = json::parse(read_file(a.params_file), nullptr, false);
        if (pj.is_discarded() || !pj.contains("species") || !pj.contains("values")) {
            std::cerr << "error: params file must be {species, values[], seed}\n";
            return kExitData;
        }
        species = pj["species"].get<std::string>();
        values = pj["values"].get<std::vector<double>>();
        if (pj.contains("seed")) seed = pj["seed"].get<std::uint64_t>();
    } else if (!a.params_csv.empty()) {
        values = parse_values(a.params_csv);
    } else {
        values = species == "maize" ? std::vector<double>{1.0, 0.0, 1.0, 12.0}
                                    : std::vector<double>{1.0, 1.0, 1.0, 1.0, 10.0};
    }

    std::string profile_json;
    if (!a.profile_file.empty()) profile_json = read_file(a.profile_file);

    cf_mesh* mesh = nullptr;
    if (a.single_plant) {
        check(cf_plant_generate(species.c_str(), values.data(), values.size(),
                                a.profile_file.empty() ? nullptr : profile_json.c_str(), seed, &mesh));
    } else {
        check(cf_canopy_generate(species.c_str(), values.data(), values.size(),
                                 a.layout_json.empty() ? nullptr : a.layout_json.c_str(),
                                 a.profile_file.empty() ? nullptr : profile_json.c_str(), seed, &mesh));
    }

    std::string labels = a.out_labels.empty() ? a.out_obj + ".labels.json" : a.out_labels;
    check(cf_mesh_save_obj(mesh, a.out_obj.c_str(), labels.c_str()));
    cf_mesh_free(mesh);

    std::string params_path = a.out_params.empty() ? a.out_obj + ".params.json" : a.out_params;
    write_file(params_path, json{{"species", species}, {"values", values}, {"seed", seed}}.dump(2));
    std::cout << "wrote " << a.out_obj << ", " << labels << ", " << params_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"canopyfit: crop canopy reconstruction by procedural model fitting"};
    app.require_subcommand(1);

    // generate
    GenerateArgs gen;
    auto* sub_gen = app.add_subcommand("generate", "generate a plant or canopy mesh");
    sub_gen->add_option("--species", gen.species, "soybean or maize");
    sub_gen->add_option("--params", gen.params_csv, "comma-separated parameter values");
    sub_gen->add_option("--params-file", gen.params_file, "params JSON {species, values[], seed}");
    sub_gen->add_option("--profile", gen.profile_file, "morphology profile JSON");
    sub_gen->add_option("--layout", gen.layout_json, "canopy layout JSON (inline)");
    sub_gen->add_flag("--single", gen.single_plant, "generate a single plant at the origin");
    sub_gen->add_option("--seed", gen.seed, "generation seed");
    sub_gen->add_option("--out", gen.out_obj, "output OBJ path");
    sub_gen->add_option("--out-labels", gen.out_labels, "output sidecar path");
    sub_gen->add_option("--out-params", gen.out_params, "output params JSON path");

    // render
    std::string r_obj, r_labels, r_camera, r_depth = "depth.cdm", r_mask = "mask.pgm";
    auto* sub_render = app.add_subcommand("render", "rasterize a mesh into a depth map + mask");
    sub_render->add_option("--obj", r_obj, "input OBJ")->required();
    sub_render->add_option("--labels", r_labels, "input sidecar (default OBJ + .labels.json)");
    sub_render->add_option("--camera", r_camera, "camera JSON file")->required();
    sub_render->add_option("--out-depth", r_depth, "output CDM1 depth file");
    sub_render->add_option("--out-mask", r_mask, "output PGM mask file");

    // rowfit
    std::string rf_cloud, rf_config, rf_species = "soybean";
    std::string rf_out_cam = "camera.json", rf_out_diag;
    std::uint64_t rf_seed = 1;
    auto* sub_rowfit = app.add_subcommand("rowfit", "fit ground plane + rows, emit the render camera");
    sub_rowfit->add_option("--cloud", rf_cloud, "input PLY point cloud")->required();
    sub_rowfit->add_option("--config", rf_config, "rowfit config JSON file");
    sub_rowfit->add_option("--species", rf_species, "species preset when no config given");
    sub_rowfit->add_option("--seed", rf_seed, "RANSAC seed");
    sub_rowfit->add_option("--out-camera", rf_out_cam, "output camera JSON");
    sub_rowfit->add_option("--out-diagnostics", rf_out_diag, "output diagnostics JSON");

    // stats
    std::string st_depth, st_mask, st_rgb, st_camera, st_species = "soybean", st_out;
    double st_render_height = 0.0;
    auto* sub_stats = app.add_subcommand("stats", "histogram statistics of a depth map");
    sub_stats->add_option("--depth", st_depth, "CDM1 depth file")->required();
    sub_stats->add_option("--mask", st_mask, "PGM foreground mask");
    sub_stats->add_option("--rgb", st_rgb, "PPM render (mask derived by thresholding)");
    sub_stats->add_option("--camera", st_camera, "camera JSON file")->required();
    sub_stats->add_option("--species", st_species, "histogram preset: soybean or maize");
    sub_stats->add_option("--render-height", st_render_height, "render height override (m)");
    sub_stats->add_option("--out", st_out, "output JSON (default stdout)");

    // fit
    std::string fit_config, fit_out_dir;
    auto* sub_fit = app.add_subcommand("fit", "fit morphology parameters to an observation");
    sub_fit->add_option("--config", fit_config, "scene config JSON file")->required();
    sub_fit->add_option("--out-dir", fit_out_dir, "output directory override");
    sub_fit->allow_extras();

    // metrics
    std::string m_obj, m_labels, m_out, m_pred, m_truth;
    double m_ground_area = 0.0;
    auto* sub_metrics = app.add_subcommand("metrics", "canopy structure metrics / scene scoring");
    sub_metrics->add_option("--obj", m_obj, "input OBJ");
    sub_metrics->add_option("--labels", m_labels, "input sidecar");
    sub_metrics->add_option("--ground-area", m_ground_area, "ground area in m^2");
    sub_metrics->add_option("--pred", m_pred, "predicted metrics JSON array (scoring mode)");
    sub_metrics->add_option("--truth", m_truth, "ground-truth metrics JSON array (scoring mode)");
    sub_metrics->add_option("--out", m_out, "output JSON (default stdout)");

    // export
    std::string e_from = "mesh", e_obj, e_labels, e_depth, e_mask, e_camera, e_out = "cloud.ply";
    std::size_t e_points = 100000;
    std::uint64_t e_seed = 1;
    double e_ground_x = 0.0, e_ground_y = 0.0;
    auto* sub_export = app.add_subcommand("export", "export point clouds from meshes or depth maps");
    sub_export->add_option("--from", e_from, "mesh | depth");
    sub_export->add_option("--obj", e_obj, "input OBJ (from=mesh)");
    sub_export->add_option("--labels", e_labels, "input sidecar (from=mesh)");
    sub_export->add_option("--points", e_points, "sample count (from=mesh)");
    sub_export->add_option("--seed", e_seed, "sampling seed");
    sub_export->add_option("--ground-x", e_ground_x, "add soil quad: half extent x (m)");
    sub_export->add_option("--ground-y", e_ground_y, "add soil quad: half extent y (m)");
    sub_export->add_option("--depth", e_depth, "input CDM1 (from=depth)");
    sub_export->add_option("--mask", e_mask, "input PGM (from=depth)");
    sub_export->add_option("--camera", e_camera, "camera JSON (from=depth)");
    sub_export->add_option("--out", e_out, "output PLY path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (sub_gen->parsed()) return cmd_generate(gen);

    if (sub_render->parsed()) {
        if (r_labels.empty()) r_labels = r_obj + ".labels.json";
        cf_mesh* mesh = nullptr;
        check(cf_mesh_load_obj(r_obj.c_str(), r_labels.c_str(), &mesh));
        cf_camera* cam = nullptr;
        check(cf_camera_load(r_camera.c_str(), &cam));
        cf_depth* depth = nullptr;
        check(cf_render_depth(mesh, cam, &depth));
        check(cf_depth_save(depth, r_depth.c_str(), r_mask.c_str()));
        cf_depth_free(depth);
        cf_camera_free(cam);
        cf_mesh_free(mesh);
        std::cout << "wrote " << r_depth << ", " << r_mask << "\n";
        return kExitOk;
    }

    if (sub_rowfit->parsed()) {
        cf_cloud* cloud = nullptr;
        check(cf_cloud_load_ply(rf_cloud.c_str(), &cloud));
        std::string config = rf_config.empty() ? json{{"species", rf_species}}.dump()
                                               : read_file(rf_config);
        char* cam_json = nullptr;
        char* diag_json = nullptr;
        check(cf_rowfit(cloud, config.c_str(), rf_seed, &cam_json, &diag_json));
        cf_cloud_free(cloud);
        write_file(rf_out_cam, take(cam_json));
        std::string diag = take(diag_json);
        if (!rf_out_diag.empty()) write_file(rf_out_diag, diag);
        else std::cout << diag << "\n";
        std::cout << "wrote " << rf_out_cam << "\n";
        return kExitOk;
    }

    if (sub_stats->parsed()) {
        cf_camera* cam = nullptr;
        check(cf_camera_load(st_camera.c_str(), &cam));
        cf_depth* depth = nullptr;
        check(cf_depth_load(st_depth.c_str(), st_mask.empty() ? nullptr : st_mask.c_str(), cam,
                            &depth));
        json spec{{"species", st_species}};
        if (st_render_height > 0.0) spec["render_height"] = st_render_height;
        if (!st_rgb.empty()) {
            double rh = st_render_height > 0.0 ? st_render_height
                                               : (st_species == "maize" ? 5.0 : 1.0);
            check(cf_depth_mask_from_rgb(depth, st_rgb.c_str(), st_species.c_str(), rh, nullptr));
        }
        cf_stats* stats = nullptr;
        check(cf_stats_compute(depth, spec.dump().c_str(), &stats));
        char* out_json = nullptr;
        check(cf_stats_to_json(stats, &out_json));
        std::string text = take(out_json);
        cf_stats_free(stats);
        cf_depth_free(depth);
        cf_camera_free(cam);
        if (!st_out.empty()) write_file(st_out, text);
        else std::cout << text << "\n";
        return kExitOk;
    }

    if (sub_fit->parsed()) {
        json cfg = json::parse(read_file(fit_config), nullptr, false);
        if (cfg.is_discarded()) {
            std::cerr << "error: config '" << fit_config << "' is not valid JSON\n";
            return kExitData;
        }
        apply_overrides(cfg, sub_fit->remaining());
        char* result_json = nullptr;
        check(cf_fit_run(cfg.dump().c_str(), fit_out_dir.empty() ? nullptr : fit_out_dir.c_str(),
                         &result_json));
        std::string text = take(result_json);
        json result = json::parse(text);
        std::cout << "averaged parameters: " << result["averaged_params"].dump() << "\n";
        std::cout << "loss at solution: " << result["loss_at_solution"] << "\n";
        std::cout << "metrics: " << result["metrics"].dump() << "\n";
        return kExitOk;
    }

    if (sub_metrics->parsed()) {
        if (!m_pred.empty() || !m_truth.empty()) {
            if (m_pred.empty() || m_truth.empty()) {
                std::cerr << "error: scoring mode needs both --pred and --truth\n";
                return kExitUsage;
            }
            char* report = nullptr;
            check(cf_metrics_score(read_file(m_pred).c_str(), read_file(m_truth).c_str(), &report));
            std::string text = take(report);
            json rj = json::parse(text);
            std::cout << rj["table"].get<std::string>();
            if (!m_out.empty()) write_file(m_out, text);
            return kExitOk;
        }
        if (m_obj.empty()) {
            std::cerr << "error: metrics needs --obj (or --pred/--truth)\n";
            return kExitUsage;
        }
        if (m_ground_area <= 0.0) {
            std::cerr << "error: metrics needs --ground-area > 0\n";
            return kExitUsage;
        }
        if (m_labels.empty()) m_labels = m_obj + ".labels.json";
        cf_mesh* mesh = nullptr;
        check(cf_mesh_load_obj(m_obj.c_str(), m_labels.c_str(), &mesh));
        char* metrics = nullptr;
        check(cf_metrics_compute(mesh, m_ground_area, &metrics));
        cf_mesh_free(mesh);
        std::string text = take(metrics);
        if (!m_out.empty()) write_file(m_out, text);
        else std::cout << text << "\n";
        return kExitOk;
    }

    if (sub_export->parsed()) {
        cf_cloud* cloud = nullptr;
        if (e_from == "mesh") {
            if (e_obj.empty()) {
                std::cerr << "error: export --from mesh needs --obj\n";
                return kExitUsage;
            }
            if (e_labels.empty()) e_labels = e_obj + ".labels.json";
            cf_mesh* mesh = nullptr;
            check(cf_mesh_load_obj(e_obj.c_str(), e_labels.c_str(), &mesh));
            if (e_ground_x > 0.0 && e_ground_y > 0.0)
                check(cf_mesh_add_ground(mesh, e_ground_x, e_ground_y));
            check(cf_mesh_sample_points(mesh, e_points, e_seed, nullptr, &cloud));
            cf_mesh_free(mesh);
        } else if (e_from == "depth") {
            if (e_depth.empty() || e_camera.empty()) {
                std::cerr << "error: export --from depth needs --depth and --camera\n";
                return kExitUsage;
            }
            cf_camera* cam = nullptr;
            check(cf_camera_load(e_camera.c_str(), &cam));
            cf_depth* depth = nullptr;
            check(cf_depth_load(e_depth.c_str(), e_mask.empty() ? nullptr : e_mask.c_str(), cam,
                                &depth));
            check(cf_depth_unproject(depth, &cloud));
            cf_depth_free(depth);
            cf_camera_free(cam);
        } else {
            std::cerr << "error: --from must be mesh or depth\n";
            return kExitUsage;
        }
        check(cf_cloud_save_ply(cloud, e_out.c_str()));
        size_t n = 0;
        cf_cloud_size(cloud, &n);
        cf_cloud_free(cloud);
        std::cout << "wrote " << e_out << " (" << n << " points)\n";
        return kExitOk;
    }

    return kExitUsage;
}
