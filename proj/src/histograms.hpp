#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthmap.hpp"

namespace canopy {

struct HistogramSpec {
    int bins = 20;
    double lower = 0.0;
    double upper = 1.0;

    void validate() const;
    bool operator==(const HistogramSpec&) const = default;
};

// Histogram bin specs and preprocessing for one depth-map statistics pass.
struct StatsConfig {
    HistogramSpec depth{20, 0.1, 1.0};
    HistogramSpec lateral{10, 0.0, 0.5};
    HistogramSpec sobel{10, 0.0, 0.004};
    int blur_kernel = 25;          // odd; 1 disables blurring
    double render_height = 1.0;    // also the background fill depth for Sobel

    static StatsConfig soybean_defaults(double render_height = 1.0);
    static StatsConfig maize_defaults(double render_height = 5.0);
    void validate() const;
};

// The histogram statistics of one depth map. Histograms are normalized to
// sum 1 (all-zero when the mask is empty); absolute size lives in mask_area.
struct HistogramSet {
    std::vector<double> depth_hist;
    std::vector<double> lateral_hist;
    std::vector<double> sobel_hist;
    double mask_area = 0.0;     // foreground pixel count
    std::size_t total_pixels = 0;
    double render_height = 0.0;
    HistogramSpec depth_spec, lateral_spec, sobel_spec;
};

std::vector<double> depth_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                    const HistogramSpec& spec);
// |y| of unprojected foreground pixels in the camera (row-aligned) frame.
std::vector<double> lateral_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                      const PinholeCamera& camera, const HistogramSpec& spec);
// Background filled with `background_fill`, Gaussian blur, 3x3 Sobel,
// magnitude |gx| + |gy| histogrammed over the mask.
std::vector<double> sobel_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                    const HistogramSpec& spec, int blur_kernel_size,
                                    double background_fill);

HistogramSet compute_stats(const DepthMap& depth, const ForegroundMask& mask,
                           const StatsConfig& cfg);

// Conventional kernel-size-to-sigma rule.
double gaussian_sigma_for_kernel(int kernel_size);
// In-place separable Gaussian blur with replicated borders.
void gaussian_blur(std::vector<double>& grid, int width, int height, int kernel_size);
// 3x3 Sobel; border pixels use replicated neighbors.
void sobel3(const std::vector<double>& grid, int width, int height, std::vector<double>& gx,
            std::vector<double>& gy);

nlohmann::json stats_config_to_json(const StatsConfig& cfg);
StatsConfig stats_config_from_json(const nlohmann::json& j);
nlohmann::json histogram_set_to_json(const HistogramSet& h);
HistogramSet histogram_set_from_json(const nlohmann::json& j);

}  // namespace canopy
