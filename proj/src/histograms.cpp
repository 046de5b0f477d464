#include "histograms.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

void HistogramSpec::validate() const {
    if (bins < 1) throw ConfigError("histogram spec: bins must be >= 1");
    if (!(lower < upper)) throw ConfigError("histogram spec: lower must be < upper");
}

StatsConfig StatsConfig::soybean_defaults(double render_height) {
    StatsConfig cfg;
    cfg.depth = {20, 0.1, render_height};
    cfg.lateral = {10, 0.0, 0.5 * render_height};
    cfg.sobel = {10, 0.0, 0.004};
    cfg.blur_kernel = 25;
    cfg.render_height = render_height;
    return cfg;
}

StatsConfig StatsConfig::maize_defaults(double render_height) {
    StatsConfig cfg;
    cfg.depth = {10, 2.0, render_height};
    cfg.lateral = {10, 0.0, 0.5 * render_height};
    cfg.sobel = {10, 0.0, 0.004};
    cfg.blur_kernel = 55;
    cfg.render_height = render_height;
    return cfg;
}

void StatsConfig::validate() const {
    depth.validate();
    lateral.validate();
    sobel.validate();
    if (blur_kernel < 1 || blur_kernel % 2 == 0)
        throw DomainError("blur kernel size must be odd and >= 1");
    if (!(render_height > 0.0)) throw ConfigError("render_height must be > 0");
}

namespace {

void accumulate(std::vector<double>& hist, const HistogramSpec& spec, double value) {
    // out-of-range values are clamped into the end bins
    double t = (value - spec.lower) / (spec.upper - spec.lower);
    int b = static_cast<int>(std::floor(t * spec.bins));
    b = std::clamp(b, 0, spec.bins - 1);
    hist[static_cast<std::size_t>(b)] += 1.0;
}

void normalize(std::vector<double>& hist) {
    double total = 0.0;
    for (double v : hist) total += v;
    if (total > 0.0) {
        for (double& v : hist) v /= total;
    }
}

}  // namespace

std::vector<double> depth_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                    const HistogramSpec& spec) {
    spec.validate();
    if (mask.width != depth.width || mask.height != depth.height)
        throw DomainError("depth_histogram: mask dimensions do not match depth map");
    std::vector<double> hist(spec.bins, 0.0);
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y)) continue;
            float d = depth.at(x, y);
            if (!std::isfinite(d)) continue;
            accumulate(hist, spec, d);
        }
    }
    normalize(hist);
    return hist;
}

std::vector<double> lateral_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                      const PinholeCamera& camera, const HistogramSpec& spec) {
    spec.validate();
    if (mask.width != depth.width || mask.height != depth.height)
        throw DomainError("lateral_histogram: mask dimensions do not match depth map");
    if (camera.width != depth.width || camera.height != depth.height)
        throw DomainError("lateral_histogram: camera resolution does not match depth map");
    std::vector<double> hist(spec.bins, 0.0);
    const double cy = camera.cy();
    const double fy = camera.fy();
    for (int y = 0; y < depth.height; ++y) {
        double ny = (y + 0.5 - cy) / fy;
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y)) continue;
            float d = depth.at(x, y);
            if (!std::isfinite(d)) continue;
            accumulate(hist, spec, std::abs(ny * d));
        }
    }
    normalize(hist);
    return hist;
}

double gaussian_sigma_for_kernel(int kernel_size) {
    return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
}

void gaussian_blur(std::vector<double>& grid, int width, int height, int kernel_size) {
    if (kernel_size <= 1) return;
    const int radius = kernel_size / 2;
    const double sigma = gaussian_sigma_for_kernel(kernel_size);
    std::vector<double> kernel(kernel_size);
    double sum = 0.0;
    for (int i = 0; i < kernel_size; ++i) {
        double d = i - radius;
        kernel[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += kernel[i];
    }
    for (double& k : kernel) k /= sum;

    std::vector<double> tmp(grid.size());
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    // horizontal
    for (int y = 0; y < height; ++y) {
        const double* row = grid.data() + static_cast<std::size_t>(y) * width;
        double* out = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * row[clampi(x + k, width - 1)];
            out[x] = acc;
        }
    }
    // vertical
    for (int y = 0; y < height; ++y) {
        double* out = grid.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp[static_cast<std::size_t>(clampi(y + k, height - 1)) * width + x];
            out[x] = acc;
        }
    }
}

void sobel3(const std::vector<double>& grid, int width, int height, std::vector<double>& gx,
            std::vector<double>& gy) {
    gx.assign(grid.size(), 0.0);
    gy.assign(grid.size(), 0.0);
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    auto at = [&](int x, int y) {
        return grid[static_cast<std::size_t>(clampi(y, height - 1)) * width + clampi(x, width - 1)];
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double p00 = at(x - 1, y - 1), p10 = at(x, y - 1), p20 = at(x + 1, y - 1);
            double p01 = at(x - 1, y), p21 = at(x + 1, y);
            double p02 = at(x - 1, y + 1), p12 = at(x, y + 1), p22 = at(x + 1, y + 1);
            std::size_t idx = static_cast<std::size_t>(y) * width + x;
            gx[idx] = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
            gy[idx] = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
        }
    }
}

std::vector<double> sobel_histogram(const DepthMap& depth, const ForegroundMask& mask,
                                    const HistogramSpec& spec, int blur_kernel_size,
                                    double background_fill) {
    spec.validate();
    if (blur_kernel_size < 1 || blur_kernel_size % 2 == 0)
        throw DomainError("sobel_histogram: blur kernel size must be odd");
    if (mask.width != depth.width || mask.height != depth.height)
        throw DomainError("sobel_histogram: mask dimensions do not match depth map");

    std::vector<double> grid(depth.pixel_count());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        float d = depth.depth[i];
        grid[i] = std::isfinite(d) ? static_cast<double>(d) : background_fill;
    }
    gaussian_blur(grid, depth.width, depth.height, blur_kernel_size);
    std::vector<double> gx, gy;
    sobel3(grid, depth.width, depth.height, gx, gy);

    std::vector<double> hist(spec.bins, 0.0);
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y)) continue;
            std::size_t idx = static_cast<std::size_t>(y) * depth.width + x;
            accumulate(hist, spec, std::abs(gx[idx]) + std::abs(gy[idx]));
        }
    }
    normalize(hist);
    return hist;
}

HistogramSet compute_stats(const DepthMap& depth, const ForegroundMask& mask,
                           const StatsConfig& cfg) {
    cfg.validate();
    HistogramSet out;
    out.depth_hist = depth_histogram(depth, mask, cfg.depth);
    out.lateral_hist = lateral_histogram(depth, mask, depth.camera, cfg.lateral);
    out.sobel_hist = sobel_histogram(depth, mask, cfg.sobel, cfg.blur_kernel, cfg.render_height);
    out.mask_area = static_cast<double>(mask.count());
    out.total_pixels = depth.pixel_count();
    out.render_height = cfg.render_height;
    out.depth_spec = cfg.depth;
    out.lateral_spec = cfg.lateral;
    out.sobel_spec = cfg.sobel;
    return out;
}

namespace {

json spec_to_json(const HistogramSpec& s) {
    return json{{"bins", s.bins}, {"lower", s.lower}, {"upper", s.upper}};
}

HistogramSpec spec_from_json(const json& j) {
    HistogramSpec s;
    s.bins = j.at("bins").get<int>();
    s.lower = j.at("lower").get<double>();
    s.upper = j.at("upper").get<double>();
    s.validate();
    return s;
}

}  // namespace

json stats_config_to_json(const StatsConfig& cfg) {
    return json{{"depth", spec_to_json(cfg.depth)},
                {"lateral", spec_to_json(cfg.lateral)},
                {"sobel", spec_to_json(cfg.sobel)},
                {"blur_kernel", cfg.blur_kernel},
                {"render_height", cfg.render_height}};
}

StatsConfig stats_config_from_json(const json& j) {
    StatsConfig cfg;
    try {
        if (j.contains("species")) {
            double rh = j.value("render_height", j.at("species").get<std::string>() == "maize" ? 5.0 : 1.0);
            cfg = j.at("species").get<std::string>() == "maize" ? StatsConfig::maize_defaults(rh)
                                                                : StatsConfig::soybean_defaults(rh);
        }
        if (j.contains("depth")) cfg.depth = spec_from_json(j.at("depth"));
        if (j.contains("lateral")) cfg.lateral = spec_from_json(j.at("lateral"));
        if (j.contains("sobel")) cfg.sobel = spec_from_json(j.at("sobel"));
        cfg.blur_kernel = j.value("blur_kernel", cfg.blur_kernel);
        cfg.render_height = j.value("render_height", cfg.render_height);
    } catch (const json::exception& e) {
        throw DataError(std::string("stats config JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json histogram_set_to_json(const HistogramSet& h) {
    return json{{"depth_hist", h.depth_hist},
                {"lateral_hist", h.lateral_hist},
                {"sobel_hist", h.sobel_hist},
                {"mask_area", h.mask_area},
                {"total_pixels", h.total_pixels},
                {"render_height", h.render_height},
                {"depth_spec", spec_to_json(h.depth_spec)},
                {"lateral_spec", spec_to_json(h.lateral_spec)},
                {"sobel_spec", spec_to_json(h.sobel_spec)}};
}

HistogramSet histogram_set_from_json(const json& j) {
    HistogramSet h;
    try {
        h.depth_hist = j.at("depth_hist").get<std::vector<double>>();
        h.lateral_hist = j.at("lateral_hist").get<std::vector<double>>();
        h.sobel_hist = j.at("sobel_hist").get<std::vector<double>>();
        h.mask_area = j.at("mask_area").get<double>();
        h.total_pixels = j.at("total_pixels").get<std::size_t>();
        h.render_height = j.at("render_height").get<double>();
        h.depth_spec = spec_from_json(j.at("depth_spec"));
        h.lateral_spec = spec_from_json(j.at("lateral_spec"));
        h.sobel_spec = spec_from_json(j.at("sobel_spec"));
    } catch (const json::exception& e) {
        throw DataError(std::string("histogram set JSON: ") + e.what());
    }
    return h;
}

}  // namespace canopy
