#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "histograms.hpp"
#include "loss.hpp"
#include "morphology.hpp"
#include "render.hpp"
#include "rng.hpp"

using namespace canopy;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

DepthMap flat_depth(const PinholeCamera& cam, float value) {
    DepthMap d = make_depth(cam);
    std::fill(d.depth.begin(), d.depth.end(), value);
    return d;
}

ForegroundMask full_mask(int w, int h) {
    ForegroundMask m = make_mask(w, h);
    std::fill(m.mask.begin(), m.mask.end(), std::uint8_t{255});
    return m;
}

HistogramSet stats_of(const DepthMap& d, const ForegroundMask& m, const StatsConfig& cfg) {
    return compute_stats(d, m, cfg);
}

}  // namespace

TEST_CASE("depth_histogram: one-hot at the bin of a constant depth") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 40, 30, 50.0);
    HistogramSpec spec{20, 0.1, 1.0};
    // midpoint of bin 7 spans [0.1 + 7*0.045, 0.1 + 8*0.045)
    double bin_width = (spec.upper - spec.lower) / spec.bins;
    float mid = static_cast<float>(spec.lower + (7 + 0.5) * bin_width);
    DepthMap d = flat_depth(cam, mid);
    ForegroundMask m = full_mask(40, 30);
    auto hist = depth_histogram(d, m, spec);
    CHECK(hist[7] == doctest::Approx(1.0));
    CHECK(sum(hist) == doctest::Approx(1.0).epsilon(1e-9));

    // empty mask -> zero vector
    ForegroundMask none = make_mask(40, 30);
    auto empty = depth_histogram(d, none, spec);
    CHECK(sum(empty) == 0.0);
}

TEST_CASE("depth_histogram: two-layer scene splits 50/50 and matches a count oracle") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 40, 30, 50.0);
    DepthMap d = make_depth(cam);
    ForegroundMask m = full_mask(40, 30);
    for (int y = 0; y < 30; ++y) {
        for (int x = 0; x < 40; ++x) d.at(x, y) = (x < 20) ? 0.3f : 0.8f;
    }
    HistogramSpec spec{20, 0.1, 1.0};
    auto hist = depth_histogram(d, m, spec);

    // brute-force oracle
    std::vector<double> oracle(spec.bins, 0.0);
    for (float v : d.depth) {
        int b = std::clamp(static_cast<int>(std::floor((v - spec.lower) / (spec.upper - spec.lower) *
                                                       spec.bins)),
                           0, spec.bins - 1);
        oracle[b] += 1.0;
    }
    for (double& v : oracle) v /= 1200.0;
    for (int b = 0; b < spec.bins; ++b) CHECK(hist[b] == doctest::Approx(oracle[b]).epsilon(1e-12));
    double half_1 = hist[static_cast<int>((0.3 - 0.1) / 0.045)];
    double half_2 = hist[static_cast<int>((0.8 - 0.1) / 0.045)];
    CHECK(half_1 == doctest::Approx(0.5));
    CHECK(half_2 == doctest::Approx(0.5));
}

TEST_CASE("depth_histogram: out-of-range values clamp into the end bins") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 10, 10, 50.0);
    DepthMap d = make_depth(cam);
    ForegroundMask m = full_mask(10, 10);
    for (int i = 0; i < 100; ++i) d.depth[i] = (i % 2 == 0) ? 0.01f : 5.0f;
    auto hist = depth_histogram(d, m, {20, 0.1, 1.0});
    CHECK(hist[0] == doctest::Approx(0.5));
    CHECK(hist[19] == doctest::Approx(0.5));
}

TEST_CASE("lateral_histogram: on-row mass lands in bin 0, symmetric strips fold") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 100, 100, 50.0);
    DepthMap d = make_depth(cam);
    ForegroundMask m = make_mask(100, 100);
    HistogramSpec spec{10, 0.0, 0.5};

    // thin horizontal strip through the image center: y ~ 0
    for (int x = 0; x < 100; ++x) {
        d.at(x, 50) = 0.5f;
        m.set(x, 50, true);
    }
    auto center_hist = lateral_histogram(d, m, cam, spec);
    CHECK(center_hist[0] == doctest::Approx(1.0));

    // two strips at +-0.2 m: pixel row where |y| = 0.2 at depth 0.5
    DepthMap d2 = make_depth(cam);
    ForegroundMask m2 = make_mask(100, 100);
    double fy = cam.fy();
    int row_hi = static_cast<int>(std::floor(cam.cy() + 0.2 / 0.5 * fy - 0.5));
    int row_lo = static_cast<int>(std::floor(cam.cy() - 0.2 / 0.5 * fy - 0.5));
    for (int x = 0; x < 100; ++x) {
        d2.at(x, row_hi) = 0.5f;
        m2.set(x, row_hi, true);
        d2.at(x, row_lo) = 0.5f;
        m2.set(x, row_lo, true);
    }
    auto strip_hist = lateral_histogram(d2, m2, cam, spec);
    int expected_bin = static_cast<int>(0.2 / 0.05);
    double mass = strip_hist[expected_bin] + strip_hist[expected_bin - 1];  // quantization
    CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("lateral_histogram matches a per-pixel unprojection oracle on a random canopy") {
    auto profile = default_soybean_profile();
    PlantParams params = make_params(Species::Soybean, std::vector<double>{1, 1, 1, 1, 7});
    LabeledMesh mesh = build_canopy(params, {0.76, 0.2, 1, 4, 0.0}, profile, 21);
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 160, 120, 50.0);
    auto [depth, mask] = render_depth(mesh, cam);
    HistogramSpec spec{10, 0.0, 0.5};
    auto hist = lateral_histogram(depth, mask, cam, spec);

    std::vector<double> oracle(spec.bins, 0.0);
    double count = 0.0;
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y)) continue;
            Eigen::Vector3d world = cam.unproject_pixel(x, y, depth.at(x, y));
            double ay = std::abs(world.y());  // camera y == -world y here
            int b = std::clamp(static_cast<int>(std::floor(ay / 0.05)), 0, 9);
            oracle[b] += 1.0;
            count += 1.0;
        }
    }
    REQUIRE(count > 100);
    for (double& v : oracle) v /= count;
    for (int b = 0; b < spec.bins; ++b) CHECK(hist[b] == doctest::Approx(oracle[b]).epsilon(1e-9));
}

TEST_CASE("sobel_histogram: constant depth is one-hot at bin 0") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 64, 48, 50.0);
    DepthMap d = flat_depth(cam, 0.6f);
    ForegroundMask m = full_mask(64, 48);
    auto hist = sobel_histogram(d, m, {10, 0.0, 0.004}, 25, 0.6);
    CHECK(hist[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(sobel_histogram(d, m, {10, 0.0, 0.004}, 24, 0.6), DomainError);
}

TEST_CASE("sobel_histogram: linear ramp has |gx| = 8a everywhere inside") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 64, 48, 50.0);
    const double a = 0.00017;  // meters per pixel; 8a sits inside bin 3
    DepthMap d = make_depth(cam);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) d.at(x, y) = static_cast<float>(0.3 + a * x);
    }
    // interior mask (Sobel borders use replication)
    ForegroundMask m = make_mask(64, 48);
    for (int y = 1; y < 47; ++y) {
        for (int x = 1; x < 63; ++x) m.set(x, y, true);
    }
    // no blur so the stencil value is exact
    std::vector<double> grid(d.depth.begin(), d.depth.end());
    std::vector<double> gx, gy;
    sobel3(grid, 64, 48, gx, gy);
    for (int y = 1; y < 47; ++y) {
        for (int x = 1; x < 63; ++x) {
            CHECK(gx[y * 64 + x] == doctest::Approx(8.0 * a).epsilon(1e-4));
            CHECK(std::abs(gy[y * 64 + x]) < 1e-9);
        }
    }
    auto hist = sobel_histogram(d, m, {10, 0.0, 0.004}, 1, 1.0);
    int expected_bin = static_cast<int>(8.0 * a / 0.0004);
    CHECK(hist[expected_bin] == doctest::Approx(1.0));
}

TEST_CASE("gaussian blur preserves the mean of a smooth field") {
    int w = 80, h = 60;
    std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.7);
    std::vector<double> before = grid;
    gaussian_blur(grid, w, h, 25);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(grid[i] == doctest::Approx(before[i]).epsilon(1e-6));
    CHECK(gaussian_sigma_for_kernel(25) == doctest::Approx(0.3 * 11 + 0.8));
}

TEST_CASE("histograms are invariant to pixel permutations") {
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 30, 20, 50.0);
    Rng rng(55);
    DepthMap d = make_depth(cam);
    ForegroundMask m = make_mask(30, 20);
    for (int i = 0; i < 600; ++i) {
        if (rng.uniform() < 0.6) {
            d.depth[i] = static_cast<float>(rng.uniform(0.2, 0.9));
            m.mask[i] = 255;
        }
    }
    HistogramSpec spec{20, 0.1, 1.0};
    auto h1 = depth_histogram(d, m, spec);

    // shuffle pixels jointly
    std::vector<int> perm(600);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 599; i > 0; --i) {
        int j = static_cast<int>(rng.uniform() * (i + 1));
        std::swap(perm[i], perm[j]);
    }
    DepthMap d2 = make_depth(cam);
    ForegroundMask m2 = make_mask(30, 20);
    for (int i = 0; i < 600; ++i) {
        d2.depth[perm[i]] = d.depth[i];
        m2.mask[perm[i]] = m.mask[i];
    }
    auto h2 = depth_histogram(d2, m2, spec);
    for (int b = 0; b < spec.bins; ++b) CHECK(h1[b] == h2[b]);
}

TEST_CASE("total_loss: identities, symmetry, bounds, oracle") {
    StatsConfig cfg = StatsConfig::soybean_defaults(1.0);
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 50, 40, 50.0);
    DepthMap d = flat_depth(cam, 0.5f);
    ForegroundMask m = full_mask(50, 40);
    HistogramSet s = stats_of(d, m, cfg);

    LossWeights w = LossWeights::soybean_defaults();
    LossBreakdown zero = total_loss(s, s, w);
    CHECK(zero.total == 0.0);
    CHECK(zero.depth == 0.0);
    CHECK(zero.mask == 0.0);

    // disjoint one-hot depth histograms force L_depth = 2
    HistogramSet a = s, b = s;
    a.depth_hist.assign(20, 0.0);
    b.depth_hist.assign(20, 0.0);
    a.depth_hist[0] = 1.0;
    b.depth_hist[1] = 1.0;
    LossWeights no_extras{0.0, 0.0, 0.0, 0.0};
    CHECK(total_loss(a, b, no_extras).total == doctest::Approx(2.0));

    // symmetry and non-negativity on random histogram pairs + summation oracle
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        HistogramSet p = s, q = s;
        auto randomize = [&](std::vector<double>& hist) {
            double total = 0.0;
            for (double& v : hist) {
                v = rng.uniform();
                total += v;
            }
            for (double& v : hist) v /= total;
        };
        randomize(p.depth_hist);
        randomize(q.depth_hist);
        randomize(p.lateral_hist);
        randomize(q.lateral_hist);
        randomize(p.sobel_hist);
        randomize(q.sobel_hist);
        p.mask_area = std::floor(rng.uniform(0, 2000));
        q.mask_area = std::floor(rng.uniform(0, 2000));

        LossBreakdown fwd = total_loss(p, q, w);
        LossBreakdown rev = total_loss(q, p, w);
        CHECK(fwd.total == doctest::Approx(rev.total).epsilon(1e-15));
        CHECK(fwd.total >= 0.0);
        CHECK(fwd.depth <= 2.0 + 1e-12);
        CHECK(fwd.lateral <= 2.0 + 1e-12);
        CHECK(fwd.sobel <= 2.0 + 1e-12);

        // naive elementwise oracle
        double oracle = 0.0;
        for (int i = 0; i < 20; ++i)
            oracle += (p.depth_hist[i] - q.depth_hist[i]) * (p.depth_hist[i] - q.depth_hist[i]);
        double lat = 0.0, sob = 0.0;
        for (int i = 0; i < 10; ++i) {
            lat += (p.lateral_hist[i] - q.lateral_hist[i]) * (p.lateral_hist[i] - q.lateral_hist[i]);
            sob += (p.sobel_hist[i] - q.sobel_hist[i]) * (p.sobel_hist[i] - q.sobel_hist[i]);
        }
        double md = p.mask_area / 2000.0 - q.mask_area / 2000.0;
        oracle += w.lateral * lat + w.sobel * sob + w.mask * md * md;
        CHECK(fwd.total == doctest::Approx(oracle).epsilon(1e-12));
    }

    // mismatched specs must be rejected
    HistogramSet other = s;
    other.depth_spec.bins = 10;
    other.depth_hist.assign(10, 0.1);
    CHECK_THROWS_AS(total_loss(s, other, w), DomainError);
}

TEST_CASE("normalization: every non-empty histogram sums to one") {
    auto profile = default_soybean_profile();
    PlantParams params = make_params(Species::Soybean, std::vector<double>{1.2, 0.7, 2.0, 1.0, 11});
    LabeledMesh mesh = build_canopy(params, {0.76, 0.2, 1, 4, 0.0}, profile, 8);
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 120, 90, 50.0);
    auto [depth, mask] = render_depth(mesh, cam);
    StatsConfig cfg = StatsConfig::soybean_defaults(1.0);
    HistogramSet s = compute_stats(depth, mask, cfg);
    CHECK(sum(s.depth_hist) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum(s.lateral_hist) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum(s.sobel_hist) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.mask_area == static_cast<double>(mask.count()));
    CHECK(s.total_pixels == 120u * 90u);
}

TEST_CASE("histogram set JSON round trip") {
    StatsConfig cfg = StatsConfig::maize_defaults(5.0);
    CHECK(cfg.depth.bins == 10);
    CHECK(cfg.depth.lower == 2.0);
    CHECK(cfg.blur_kernel == 55);
    PinholeCamera cam = overhead_camera(0, 0, 0, 5.0, 40, 30, 50.0);
    DepthMap d = flat_depth(cam, 3.0f);
    ForegroundMask m = full_mask(40, 30);
    HistogramSet s = compute_stats(d, m, cfg);
    HistogramSet back = histogram_set_from_json(histogram_set_to_json(s));
    CHECK(back.depth_hist == s.depth_hist);
    CHECK(back.mask_area == s.mask_area);
    CHECK(back.depth_spec == s.depth_spec);
}
