/* canopyfit C API: crop-canopy reconstruction by inverse procedural
 * modeling. All functions return cf_status; on failure cf_last_error()
 * holds a thread-local message. Objects are opaque handles released with
 * the matching *_free function; strings returned through char** must be
 * released with cf_string_free. */

#ifndef CANOPYFIT_H
#define CANOPYFIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
    CF_OK = 0,
    CF_E_INVALID = 1, /* bad argument or value outside its domain */
    CF_E_CONFIG = 2,  /* invalid configuration */
    CF_E_DATA = 3,    /* malformed input data or file format */
    CF_E_NUMERIC = 4, /* numerical failure */
    CF_E_IO = 5       /* file system failure */
} cf_status;

typedef struct cf_mesh cf_mesh;     /* labeled triangle mesh */
typedef struct cf_cloud cf_cloud;   /* colored point cloud */
typedef struct cf_camera cf_camera; /* pinhole camera */
typedef struct cf_depth cf_depth;   /* depth map + foreground mask + camera */
typedef struct cf_stats cf_stats;   /* histogram statistics of one depth map */

const char* cf_version(void);
const char* cf_last_error(void);
void cf_string_free(char* s);

/* ---- morphology ------------------------------------------------------- */

/* species: "soybean" (5 values) or "maize" (4 values). profile_json may be
 * NULL for the built-in defaults. */
cf_status cf_plant_generate(const char* species, const double* values, size_t dim,
                            const char* profile_json, uint64_t seed, cf_mesh** out);

/* layout_json: {row_spacing, plant_spacing, num_rows, plants_per_row,
 * position_jitter_std}; NULL for defaults. */
cf_status cf_canopy_generate(const char* species, const double* values, size_t dim,
                             const char* layout_json, const char* profile_json, uint64_t seed,
                             cf_mesh** out);

/* Clamps values in place to the per-species parameter box. */
cf_status cf_params_clamp(const char* species, double* values, size_t dim);

cf_status cf_default_profile_json(const char* species, char** out_json);

cf_status cf_mesh_save_obj(const cf_mesh* mesh, const char* obj_path, const char* sidecar_path);
cf_status cf_mesh_load_obj(const char* obj_path, const char* sidecar_path, cf_mesh** out);
cf_status cf_mesh_counts(const cf_mesh* mesh, size_t* vertices, size_t* triangles);
/* Adds a soil quad at z = 0 spanning +-half_x, +-half_y. */
cf_status cf_mesh_add_ground(cf_mesh* mesh, double half_x, double half_y);
void cf_mesh_free(cf_mesh* mesh);

/* ---- camera ------------------------------------------------------------ */

cf_status cf_camera_from_json(const char* json_text, cf_camera** out);
cf_status cf_camera_to_json(const cf_camera* cam, char** out_json);
cf_status cf_camera_load(const char* path, cf_camera** out);
cf_status cf_camera_save(const cf_camera* cam, const char* path);
/* Straight-down camera at `height` above (x, y, ground_z). */
cf_status cf_camera_overhead(double x, double y, double ground_z, double height, int width,
                             int height_px, double vfov_deg, cf_camera** out);
void cf_camera_free(cf_camera* cam);

/* ---- rendering and point clouds ---------------------------------------- */

cf_status cf_render_depth(const cf_mesh* mesh, const cf_camera* cam, cf_depth** out);
/* Writes the CDM1 depth file and, when pgm_path is non-NULL, the P5 mask. */
cf_status cf_depth_save(const cf_depth* depth, const char* cdm_path, const char* pgm_path);
/* mask_path may be NULL: every finite depth pixel becomes foreground. */
cf_status cf_depth_load(const char* cdm_path, const char* mask_path, const cf_camera* cam,
                        cf_depth** out);
/* Replaces the mask using color+coordinate rules on an RGB render (PPM).
 * rules_json may be NULL for per-species defaults ("soybean"/"maize"). */
cf_status cf_depth_mask_from_rgb(cf_depth* depth, const char* ppm_path, const char* species,
                                 double render_height, const char* rules_json);
cf_status cf_depth_unproject(const cf_depth* depth, cf_cloud** out);
void cf_depth_free(cf_depth* depth);

/* colors_json may be NULL; otherwise {"leaf":[r,g,b],"stem":...,"petiole":...,
 * "ground":...} */
cf_status cf_mesh_sample_points(const cf_mesh* mesh, size_t count, uint64_t seed,
                                const char* colors_json, cf_cloud** out);
cf_status cf_cloud_save_ply(const cf_cloud* cloud, const char* path);
cf_status cf_cloud_load_ply(const char* path, cf_cloud** out);
cf_status cf_cloud_size(const cf_cloud* cloud, size_t* count);
void cf_cloud_free(cf_cloud* cloud);

/* ---- row fitting -------------------------------------------------------- */

/* config_json may be NULL or {"species": "..."} plus overrides. On success
 * returns the standardized camera JSON and a diagnostics JSON. */
cf_status cf_rowfit(const cf_cloud* cloud, const char* config_json, uint64_t seed,
                    char** camera_json_out, char** diagnostics_json_out);

/* ---- statistics and loss ------------------------------------------------ */

/* spec_json may be NULL (soybean defaults) or {"species": ...,
 * "render_height": ...} plus per-histogram overrides. */
cf_status cf_stats_compute(const cf_depth* depth, const char* spec_json, cf_stats** out);
cf_status cf_stats_to_json(const cf_stats* stats, char** out_json);
cf_status cf_stats_from_json(const char* json_text, cf_stats** out);
/* weights_json may be NULL (soybean defaults) or {"species": ...} plus
 * {lateral, sobel, mask} overrides. Returns the per-term breakdown. */
cf_status cf_loss(const cf_stats* obs, const cf_stats* pred, const char* weights_json,
                  char** breakdown_json_out);
void cf_stats_free(cf_stats* stats);

/* ---- canopy metrics ------------------------------------------------------ */

cf_status cf_metrics_compute(const cf_mesh* mesh, double ground_area, char** metrics_json_out);
/* Both arguments are JSON arrays of metrics objects of equal length. */
cf_status cf_metrics_score(const char* predicted_json, const char* truth_json,
                           char** report_json_out);

/* ---- end-to-end fitting -------------------------------------------------- */

cf_status cf_default_scene_config_json(const char* species, const char* preset, char** out_json);
/* Runs the full fit described by the scene config; output_dir (optional)
 * overrides the config's output directory. Returns the fit result JSON. */
cf_status cf_fit_run(const char* scene_config_json, const char* output_dir,
                     char** fit_result_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CANOPYFIT_H */
