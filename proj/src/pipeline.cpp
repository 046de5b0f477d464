#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "color.hpp"
#include "errors.hpp"
#include "render.hpp"
#include "rng.hpp"

namespace canopy {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum : std::uint64_t { kTagObservation = 201, kTagRun = 202 };

}  // namespace

ForegroundMask mask_from_rgb(const DepthMap& depth, const RgbImage& rgb, double render_height,
                             const MaskRules& rules) {
    if (rgb.width != depth.width || rgb.height != depth.height)
        throw DataError("mask_from_rgb: RGB dimensions do not match depth map");
    ForegroundMask mask = make_mask(depth.width, depth.height);
    const double cy = depth.camera.cy();
    const double fy = depth.camera.fy();
    for (int y = 0; y < depth.height; ++y) {
        double ny = (y + 0.5 - cy) / fy;
        for (int x = 0; x < depth.width; ++x) {
            float d = depth.at(x, y);
            if (!std::isfinite(d)) continue;
            double height = render_height - d;
            double lateral = std::abs(ny * d);
            Lab lab = rgb_to_lab(rgb.at(x, y));
            bool color_cut = lab.a < rules.a_thresh && (!rules.use_l || lab.l > rules.l_thresh) &&
                             height > render_height - rules.top_margin;
            bool background = color_cut || height < rules.z_min || lateral >= rules.y_max;
            mask.set(x, y, !background);
        }
    }
    return mask;
}

json mask_rules_to_json(const MaskRules& r) {
    return json{{"a_thresh", r.a_thresh}, {"use_l", r.use_l},         {"l_thresh", r.l_thresh},
                {"top_margin", r.top_margin}, {"z_min", r.z_min},     {"y_max", r.y_max}};
}

MaskRules mask_rules_from_json(const json& j) {
    MaskRules r;
    r.a_thresh = j.value("a_thresh", r.a_thresh);
    r.use_l = j.value("use_l", r.use_l);
    r.l_thresh = j.value("l_thresh", r.l_thresh);
    r.top_margin = j.value("top_margin", r.top_margin);
    r.z_min = j.value("z_min", r.z_min);
    r.y_max = j.value("y_max", r.y_max);
    return r;
}

SceneConfig SceneConfig::defaults(Species s) {
    SceneConfig cfg;
    cfg.species = s;
    if (s == Species::Maize) {
        cfg.render_height = 5.0;
        cfg.stats = StatsConfig::maize_defaults(5.0);
        cfg.weights = LossWeights::maize_defaults();
        cfg.mask_rules = MaskRules::maize_defaults();
        cfg.layout.row_spacing = 0.76;
        cfg.layout.plant_spacing = 0.25;
        cfg.hidden_params = {1.0, 0.0, 1.0, 12.0};
    } else {
        cfg.render_height = 1.0;
        cfg.stats = StatsConfig::soybean_defaults(1.0);
        cfg.weights = LossWeights::soybean_defaults();
        cfg.mask_rules = MaskRules::soybean_defaults();
        cfg.hidden_params = {1.0, 1.0, 1.0, 1.0, 10.0};
    }
    cfg.apply_preset("desk");
    return cfg;
}

void SceneConfig::apply_preset(const std::string& name) {
    if (name == "desk") {
        opt.n_initial = 100;
        opt.n_total = 200;
        opt.n_runs = 5;
    } else if (name == "paper") {
        opt.n_initial = 200;
        opt.n_total = 500;
        opt.n_runs = 10;
    } else {
        throw ConfigError("unknown optimizer preset '" + name + "' (expected desk or paper)");
    }
}

void SceneConfig::validate() const {
    layout.validate();
    stats.validate();
    weights.validate();
    opt.validate();
    if (!(render_height > 0.0)) throw ConfigError("scene: render_height must be > 0");
    if (render_width <= 0 || render_height_px <= 0) throw ConfigError("scene: bad render resolution");
    if (source == ObsSource::Synthetic) {
        if (hidden_params.size() != param_dim(species))
            throw ConfigError("scene: hidden_params dimension does not match species");
    } else {
        if (depth_path.empty()) throw ConfigError("scene: files observation needs a depth path");
        if (mask_path.empty() && rgb_path.empty())
            throw ConfigError("scene: files observation needs a mask or an RGB render");
        if (camera_path.empty()) throw ConfigError("scene: files observation needs a camera");
    }
    if (ground_area < 0.0) throw ConfigError("scene: ground_area must be >= 0");
    if (eval_average < 1) throw ConfigError("scene: eval_average must be >= 1");
}

MorphologyProfile SceneConfig::profile() const {
    if (!profile_path.empty()) return load_profile(profile_path);
    return species == Species::Maize ? default_maize_profile() : default_soybean_profile();
}

double SceneConfig::effective_ground_area() const {
    return ground_area > 0.0 ? ground_area : layout.footprint_area();
}

json scene_config_to_json(const SceneConfig& c) {
    json obs;
    if (c.source == SceneConfig::ObsSource::Synthetic) {
        obs = json{{"source", "synthetic"}, {"hidden_params", c.hidden_params}, {"seed", c.observation_seed}};
    } else {
        obs = json{{"source", "files"},
                   {"depth", c.depth_path},
                   {"mask", c.mask_path},
                   {"rgb", c.rgb_path},
                   {"camera", c.camera_path},
                   {"mask_rules", mask_rules_to_json(c.mask_rules)}};
    }
    return json{
        {"species", species_name(c.species)},
        {"observation", obs},
        {"layout",
         {{"row_spacing", c.layout.row_spacing},
          {"plant_spacing", c.layout.plant_spacing},
          {"num_rows", c.layout.num_rows},
          {"plants_per_row", c.layout.plants_per_row},
          {"position_jitter_std", c.layout.position_jitter_std}}},
        {"profile", c.profile_path},
        {"render",
         {{"width", c.render_width},
          {"height", c.render_height_px},
          {"vfov_deg", c.vfov_deg},
          {"render_height", c.render_height}}},
        {"stats", stats_config_to_json(c.stats)},
        {"weights", loss_weights_to_json(c.weights)},
        {"opt",
         {{"n_initial", c.opt.n_initial},
          {"n_total", c.opt.n_total},
          {"n_runs", c.opt.n_runs},
          {"candidate_count", c.opt.candidate_count},
          {"seed", c.opt.seed},
          {"hyper_refit_period", c.opt.hyper_refit_period},
          {"eval_average", c.eval_average}}},
        {"ground_area", c.ground_area},
        {"report_seed", c.report_seed},
        {"workers", c.workers},
        {"output_dir", c.output_dir},
    };
}

SceneConfig scene_config_from_json(const json& j) {
    SceneConfig c;
    try {
        Species s = species_from_name(j.at("species").get<std::string>());
        c = SceneConfig::defaults(s);
        if (j.contains("observation")) {
            const json& o = j.at("observation");
            std::string src = o.value("source", "synthetic");
            if (src == "synthetic") {
                c.source = SceneConfig::ObsSource::Synthetic;
                if (o.contains("hidden_params"))
                    c.hidden_params = o.at("hidden_params").get<std::vector<double>>();
                c.observation_seed = o.value("seed", c.observation_seed);
            } else if (src == "files") {
                c.source = SceneConfig::ObsSource::Files;
                c.depth_path = o.value("depth", "");
                c.mask_path = o.value("mask", "");
                c.rgb_path = o.value("rgb", "");
                c.camera_path = o.value("camera", "");
                if (o.contains("mask_rules")) c.mask_rules = mask_rules_from_json(o.at("mask_rules"));
            } else {
                throw ConfigError("scene: unknown observation source '" + src + "'");
            }
        }
        if (j.contains("layout")) {
            const json& l = j.at("layout");
            c.layout.row_spacing = l.value("row_spacing", c.layout.row_spacing);
            c.layout.plant_spacing = l.value("plant_spacing", c.layout.plant_spacing);
            c.layout.num_rows = l.value("num_rows", c.layout.num_rows);
            c.layout.plants_per_row = l.value("plants_per_row", c.layout.plants_per_row);
            c.layout.position_jitter_std = l.value("position_jitter_std", c.layout.position_jitter_std);
        }
        c.profile_path = j.value("profile", c.profile_path);
        if (j.contains("render")) {
            const json& r = j.at("render");
            c.render_width = r.value("width", c.render_width);
            c.render_height_px = r.value("height", c.render_height_px);
            c.vfov_deg = r.value("vfov_deg", c.vfov_deg);
            double rh = r.value("render_height", c.render_height);
            if (rh != c.render_height) {
                c.render_height = rh;
                c.stats = c.species == Species::Maize ? StatsConfig::maize_defaults(rh)
                                                      : StatsConfig::soybean_defaults(rh);
            }
        }
        if (j.contains("stats")) {
            json merged = stats_config_to_json(c.stats);
            merged.update(j.at("stats"));
            c.stats = stats_config_from_json(merged);
        }
        if (j.contains("weights")) {
            json merged = loss_weights_to_json(c.weights);
            merged.update(j.at("weights"));
            c.weights = loss_weights_from_json(merged);
        }
        if (j.contains("opt")) {
            const json& o = j.at("opt");
            if (o.contains("preset")) c.apply_preset(o.at("preset").get<std::string>());
            c.opt.n_initial = o.value("n_initial", c.opt.n_initial);
            c.opt.n_total = o.value("n_total", c.opt.n_total);
            c.opt.n_runs = o.value("n_runs", c.opt.n_runs);
            c.opt.candidate_count = o.value("candidate_count", c.opt.candidate_count);
            c.opt.seed = o.value("seed", c.opt.seed);
            c.opt.hyper_refit_period = o.value("hyper_refit_period", c.opt.hyper_refit_period);
            c.eval_average = o.value("eval_average", c.eval_average);
        }
        c.ground_area = j.value("ground_area", c.ground_area);
        c.report_seed = j.value("report_seed", c.report_seed);
        c.workers = j.value("workers", c.workers);
        c.output_dir = j.value("output_dir", c.output_dir);
    } catch (const json::exception& e) {
        throw DataError(std::string("scene config JSON: ") + e.what());
    }
    c.validate();
    return c;
}

SceneConfig load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("config '" + path + "': " + e.what());
    }
    return scene_config_from_json(j);
}

void apply_override(json& j, const std::string& key, const std::string& value) {
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw UsageError("override: empty key segment in '" + key + "'");
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::exception&) {
                parsed = value;  // fall back to bare string
            }
            (*node)[part] = parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

bo::SearchSpace search_space(Species s) {
    bo::SearchSpace space;
    for (const auto& b : param_bounds(s)) {
        space.names.push_back(b.name);
        space.bounds.emplace_back(b.lo, b.hi);
    }
    return space;
}

namespace {

PinholeCamera scene_camera(const SceneConfig& cfg) {
    return overhead_camera(0.0, 0.0, 0.0, cfg.render_height, cfg.render_width, cfg.render_height_px,
                           cfg.vfov_deg);
}

HistogramSet stats_for_mesh(const SceneConfig& cfg, const LabeledMesh& mesh,
                            const PinholeCamera& camera) {
    auto [depth, mask] = render_depth(mesh, camera);
    return compute_stats(depth, mask, cfg.stats);
}

}  // namespace

LabeledMesh observed_canopy(const SceneConfig& cfg) {
    if (cfg.source != SceneConfig::ObsSource::Synthetic)
        throw ConfigError("observed_canopy: observation source is not synthetic");
    PlantParams hidden = make_params(cfg.species, cfg.hidden_params);
    // independent seed lineage: the optimizer can match statistics, not the
    // observation's noise realization
    std::uint64_t seed = derive_seed(cfg.observation_seed, {kTagObservation});
    return build_canopy(hidden, cfg.layout, cfg.profile(), seed);
}

Observation observe(const SceneConfig& cfg) {
    cfg.validate();
    if (cfg.source == SceneConfig::ObsSource::Synthetic) {
        PinholeCamera camera = scene_camera(cfg);
        return {stats_for_mesh(cfg, observed_canopy(cfg), camera), camera};
    }

    PinholeCamera camera = load_camera(cfg.camera_path);
    DepthMap depth = load_cdm(cfg.depth_path);
    if (camera.width != depth.width || camera.height != depth.height)
        throw DataError("observation: camera resolution does not match depth file");
    depth.camera = camera;
    ForegroundMask mask;
    if (!cfg.mask_path.empty()) {
        mask = load_pgm(cfg.mask_path);
        if (mask.width != depth.width || mask.height != depth.height)
            throw DataError("observation: mask dimensions do not match depth file");
    } else {
        RgbImage rgb = load_ppm(cfg.rgb_path);
        mask = mask_from_rgb(depth, rgb, cfg.render_height, cfg.mask_rules);
    }
    return {compute_stats(depth, mask, cfg.stats), camera};
}

double evaluate_candidate(const SceneConfig& cfg, const Observation& obs,
                          std::span<const double> raw_params, std::uint64_t eval_seed) {
    PlantParams p = clamp_params(raw_params, cfg.species);
    LabeledMesh mesh = build_canopy(p, cfg.layout, cfg.profile(), eval_seed);
    HistogramSet pred = stats_for_mesh(cfg, mesh, obs.camera);
    return total_loss(obs.stats, pred, cfg.weights).total;
}

int worker_count(int configured, int n_runs) {
    int workers = configured;
    if (const char* env = std::getenv("CANOPYFIT_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) workers = workers > 0 ? std::min(workers, cap) : cap;
    }
    if (workers <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        workers = hw > 0 ? static_cast<int>(hw) : 1;
    }
    return std::max(1, std::min(workers, n_runs));
}

FitResult run_fit(const SceneConfig& cfg) {
    cfg.validate();
    Observation obs = observe(cfg);  // computed exactly once, shared by every run
    const MorphologyProfile profile = cfg.profile();
    const bo::SearchSpace space = search_space(cfg.species);

    const bool writing = !cfg.output_dir.empty();
    if (writing) fs::create_directories(cfg.output_dir);

    auto trace_path = [&](int r) {
        return (fs::path(cfg.output_dir) / ("run_" + std::to_string(r) + ".jsonl")).string();
    };

    // objective shared by all runs; profile captured by value so each thread
    // avoids re-reading profile files
    auto objective = [&cfg, &obs, &profile](std::span<const double> x, std::uint64_t eval_seed) {
        PlantParams p = clamp_params(x, cfg.species);
        double acc = 0.0;
        for (int j = 0; j < cfg.eval_average; ++j) {
            std::uint64_t seed = cfg.eval_average == 1
                                     ? eval_seed
                                     : derive_seed(eval_seed, {static_cast<std::uint64_t>(j)});
            LabeledMesh mesh = build_canopy(p, cfg.layout, profile, seed);
            auto [depth, mask] = render_depth(mesh, obs.camera);
            HistogramSet pred = compute_stats(depth, mask, cfg.stats);
            acc += total_loss(obs.stats, pred, cfg.weights).total;
        }
        return acc / cfg.eval_average;
    };

    std::vector<bo::OptRunResult> results(cfg.opt.n_runs);
    const int workers = worker_count(cfg.workers, cfg.opt.n_runs);

    std::vector<int> run_ids(cfg.opt.n_runs);
    for (int r = 0; r < cfg.opt.n_runs; ++r) run_ids[r] = r;

    auto execute_run = [&](int r) {
        bo::OptConfig run_cfg = cfg.opt;
        run_cfg.seed = derive_seed(cfg.opt.seed, {kTagRun, static_cast<std::uint64_t>(r)});
        std::vector<bo::Evaluation> resume;
        if (writing && fs::exists(trace_path(r))) {
            resume = bo::read_trace(trace_path(r));
            if (resume.size() > static_cast<std::size_t>(run_cfg.n_total)) resume.clear();
        }
        results[r] = bo::optimize(objective, space, run_cfg, std::move(resume));
        if (writing) bo::write_trace(results[r].trace, trace_path(r));
    };

    if (workers <= 1) {
        for (int r : run_ids) execute_run(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= run_ids.size()) break;
                    execute_run(run_ids[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<bo::OptRunResult> successful;
    for (const auto& r : results) {
        if (r.ok()) successful.push_back(r);
    }
    if (successful.empty()) {
        std::string detail = results.empty() ? "" : results.front().error;
        throw NumericError("fit: every optimization run failed (" + detail + ")");
    }

    FitResult fit;
    fit.runs = std::move(results);
    fit.averaged = bo::average_solutions(successful, space);
    fit.obs_stats = obs.stats;

    PlantParams solution = clamp_params(fit.averaged, cfg.species);
    LabeledMesh mesh = build_canopy(solution, cfg.layout, profile, cfg.report_seed);
    fit.metrics = compute_metrics(mesh, cfg.effective_ground_area());
    auto [depth, mask] = render_depth(mesh, obs.camera);
    fit.pred_stats = compute_stats(depth, mask, cfg.stats);
    fit.loss_at_solution = total_loss(obs.stats, fit.pred_stats, cfg.weights).total;

    if (writing) {
        fs::path out(cfg.output_dir);
        save_obj(mesh, (out / "solution_mesh.obj").string(), (out / "solution_mesh_labels.json").string());
        save_cdm(depth, (out / "solution_depth.cdm").string());
        save_pgm(mask, (out / "solution_mask.pgm").string());
        std::ofstream(out / "solution_params.json")
            << params_to_json(solution, cfg.report_seed).dump(2) << "\n";
        std::ofstream(out / "observation_stats.json")
            << histogram_set_to_json(obs.stats).dump(2) << "\n";
        std::ofstream(out / "fit_result.json") << fit.to_json(cfg).dump(2) << "\n";
    }
    return fit;
}

json FitResult::to_json(const SceneConfig& cfg) const {
    json runs_j = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
        json rj{{"run", r},
                {"best_loss", runs[r].best_loss},
                {"best_x", runs[r].best_x},
                {"evaluations", runs[r].trace.size()}};
        if (!runs[r].ok()) rj["error"] = runs[r].error;
        runs_j.push_back(rj);
    }
    return json{{"species", species_name(cfg.species)},
                {"averaged_params", averaged},
                {"loss_at_solution", loss_at_solution},
                {"runs", runs_j},
                {"observation_stats", histogram_set_to_json(obs_stats)},
                {"predicted_stats", histogram_set_to_json(pred_stats)},
                {"metrics", metrics_to_json(metrics)}};
}

json params_to_json(const PlantParams& p, std::uint64_t seed) {
    return json{{"species", species_name(p.species)}, {"values", p.values}, {"seed", seed}};
}

std::pair<PlantParams, std::uint64_t> params_from_json(const json& j) {
    try {
        Species s = species_from_name(j.at("species").get<std::string>());
        auto values = j.at("values").get<std::vector<double>>();
        std::uint64_t seed = j.value("seed", 0ULL);
        return {make_params(s, values), seed};
    } catch (const json::exception& e) {
        throw DataError(std::string("params JSON: ") + e.what());
    }
}

}  // namespace canopy
