#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesopt.hpp"
#include "camera.hpp"
#include "histograms.hpp"
#include "image_io.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "morphology.hpp"
#include "rowfit.hpp"

namespace canopy {

// Color + coordinate thresholds that mark ingested depth pixels as
// background when only an RGB render (not a mask) accompanies the depth.
struct MaskRules {
    double a_thresh = -8.0;    // background candidates have a* below this...
    bool use_l = false;        // ...optionally combined with L* above l_thresh
    double l_thresh = 40.0;
    double top_margin = 0.25;  // ...and height above render_height - top_margin
    double z_min = 0.1;        // anything below this height is background
    double y_max = 0.5;        // anything at least this far off-row is background

    static MaskRules soybean_defaults() { return {}; }
    static MaskRules maize_defaults() { return {-8.0, true, 40.0, 2.0, 0.1, 3.0}; }
};

ForegroundMask mask_from_rgb(const DepthMap& depth, const RgbImage& rgb, double render_height,
                             const MaskRules& rules);

nlohmann::json mask_rules_to_json(const MaskRules& r);
MaskRules mask_rules_from_json(const nlohmann::json& j);

struct SceneConfig {
    Species species = Species::Soybean;

    enum class ObsSource { Synthetic, Files };
    ObsSource source = ObsSource::Synthetic;

    // synthetic observation
    std::vector<double> hidden_params;
    std::uint64_t observation_seed = 1;

    // file observation
    std::string depth_path;
    std::string mask_path;   // or rgb_path + mask_rules
    std::string rgb_path;
    std::string camera_path;
    MaskRules mask_rules;

    CanopyLayout layout;
    std::string profile_path;  // empty = species default
    double render_height = 1.0;
    int render_width = 994;
    int render_height_px = 738;
    double vfov_deg = 50.0;

    StatsConfig stats;
    LossWeights weights;
    bo::OptConfig opt;
    // generation seeds averaged per objective evaluation (tames the
    // stochastic-generator noise the optimizer sees)
    int eval_average = 2;

    double ground_area = 0.0;  // 0 = layout footprint
    std::uint64_t report_seed = 9001;
    int workers = 0;           // 0 = min(hardware, n_runs); CANOPYFIT_THREADS caps
    std::string output_dir;

    static SceneConfig defaults(Species s);
    // named optimizer presets: "desk" = 100+200x5, "paper" = 200+500x10
    void apply_preset(const std::string& name);
    void validate() const;

    MorphologyProfile profile() const;
    double effective_ground_area() const;
};

nlohmann::json scene_config_to_json(const SceneConfig& cfg);
SceneConfig scene_config_from_json(const nlohmann::json& j);
SceneConfig load_scene_config(const std::string& path);

// Dotted-path override, e.g. "opt.n_runs=3" or "layout.num_rows=1".
void apply_override(nlohmann::json& j, const std::string& key, const std::string& value);

bo::SearchSpace search_space(Species s);

struct Observation {
    HistogramSet stats;
    PinholeCamera camera;
};

// Loads or synthesizes the observation; computed once per fit and reused
// across all optimizer evaluations.
Observation observe(const SceneConfig& cfg);

// The hidden canopy behind a synthetic observation (its seed lineage is
// independent of the optimizer's evaluation seeds).
LabeledMesh observed_canopy(const SceneConfig& cfg);

struct FitResult {
    std::vector<double> averaged;
    std::vector<bo::OptRunResult> runs;
    HistogramSet obs_stats;
    HistogramSet pred_stats;
    CanopyMetrics metrics;
    double loss_at_solution = 0.0;

    nlohmann::json to_json(const SceneConfig& cfg) const;
};

// The per-evaluation loss the optimizer minimizes; exposed for tests and
// for evaluating the loss at arbitrary parameter vectors.
double evaluate_candidate(const SceneConfig& cfg, const Observation& obs,
                          std::span<const double> raw_params, std::uint64_t eval_seed);

// Runs n_runs optimizations (concurrently), averages the solutions,
// regenerates the mesh at the average, and writes artifacts when
// output_dir is set. Fails only if every run fails.
FitResult run_fit(const SceneConfig& cfg);

nlohmann::json params_to_json(const PlantParams& p, std::uint64_t seed);
std::pair<PlantParams, std::uint64_t> params_from_json(const nlohmann::json& j);

int worker_count(int configured, int n_runs);

}  // namespace canopy
