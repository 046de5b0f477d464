// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier than the unit tests; the synthetic round-trip fits five
// scenes end to end at full render resolution.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bayesopt.hpp"
#include "gp.hpp"
#include "histograms.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "morphology.hpp"
#include "pipeline.hpp"
#include "render.hpp"
#include "rng.hpp"
#include "rowfit.hpp"

using namespace canopy;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, bool pass, const std::string& text) {
    std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", number, text.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SceneOutcome {
    SceneConfig cfg;
    Observation obs;
    double truth_lai = 0.0;
    double truth_angle_mean = 0.0;
    FitResult fit;
    double fit_laipe = 0.0;
    double fit_angle_err = 0.0;
    std::vector<double> run_laipes;
};

SceneConfig scene_config(int index, const std::vector<double>& hidden) {
    SceneConfig cfg = SceneConfig::defaults(Species::Soybean);  // desk preset
    cfg.hidden_params = hidden;
    cfg.observation_seed = 1000 + index;
    cfg.layout = CanopyLayout{0.76, 0.14, 1, 8, 0.0};
    cfg.render_width = 994;
    cfg.render_height_px = 738;
    cfg.vfov_deg = 50.0;
    cfg.render_height = 1.0;
    cfg.opt.seed = 500 + index;
    cfg.report_seed = 42;
    return cfg;
}

// ---------------------------------------------------------------- 1 + 2 ---

std::vector<SceneOutcome> run_round_trip(double* wall_seconds) {
    auto t0 = Clock::now();
    Rng rng(20250808);
    auto bounds = param_bounds(Species::Soybean);

    std::vector<SceneOutcome> outcomes;
    for (int s = 0; s < 5; ++s) {
        std::vector<double> hidden;
        for (const auto& b : bounds) hidden.push_back(rng.uniform(b.lo, b.hi));
        SceneOutcome oc;
        oc.cfg = scene_config(s, hidden);
        oc.obs = observe(oc.cfg);

        CanopyMetrics truth =
            compute_metrics(observed_canopy(oc.cfg), oc.cfg.effective_ground_area());
        oc.truth_lai = truth.lai;
        oc.truth_angle_mean = truth.angle_mean_deg;

        oc.fit = run_fit(oc.cfg);
        oc.fit_laipe = std::abs(oc.fit.metrics.lai - truth.lai) / truth.lai;
        oc.fit_angle_err = std::abs(oc.fit.metrics.angle_mean_deg - truth.angle_mean_deg);

        const MorphologyProfile profile = oc.cfg.profile();
        for (const auto& run : oc.fit.runs) {
            if (!run.ok()) continue;
            PlantParams p = clamp_params(run.best_x, Species::Soybean);
            LabeledMesh mesh = build_canopy(p, oc.cfg.layout, profile, oc.cfg.report_seed);
            CanopyMetrics m = compute_metrics(mesh, oc.cfg.effective_ground_area());
            oc.run_laipes.push_back(std::abs(m.lai - truth.lai) / truth.lai);
        }
        std::printf("    scene %d: truth LAI %.3f angle %.1f -> fit LAI %.3f angle %.1f "
                    "(LAIPE %.3f, dAngle %.1f)\n",
                    s, oc.truth_lai, oc.truth_angle_mean, oc.fit.metrics.lai,
                    oc.fit.metrics.angle_mean_deg, oc.fit_laipe, oc.fit_angle_err);
        std::fflush(stdout);
        outcomes.push_back(std::move(oc));
    }
    *wall_seconds = seconds_since(t0);
    return outcomes;
}

void criterion_1_2(std::vector<SceneOutcome>* outcomes_out) {
    double wall = 0.0;
    std::vector<SceneOutcome> outcomes = run_round_trip(&wall);

    int good = 0;
    for (const auto& oc : outcomes) {
        if (oc.fit_laipe <= 0.20 && oc.fit_angle_err <= 15.0) ++good;
    }
    // the 30-minute budget is stated for an 8-core machine; allow
    // proportionally more wall time on smaller ones (the suite itself is
    // bounded by the ctest timeout)
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    double budget = hw >= 8 ? 1800.0 : 1800.0 * 8.0 / hw;
    bool time_ok = wall <= budget;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "synthetic round-trip: %d/5 scenes within LAI 20%% + angle 15 deg "
                  "(need >= 4); wall %.0fs on %u threads (budget %.0fs)",
                  good, wall, hw, budget);
    report(1, good >= 4 && time_ok, buf);

    double mean_avg_laipe = 0.0, mean_median_laipe = 0.0;
    for (const auto& oc : outcomes) {
        std::vector<double> l = oc.run_laipes;
        std::sort(l.begin(), l.end());
        double median = l[l.size() / 2];
        if (l.size() % 2 == 0) median = 0.5 * (l[l.size() / 2 - 1] + l[l.size() / 2]);
        mean_avg_laipe += oc.fit_laipe;
        mean_median_laipe += median;
    }
    mean_avg_laipe /= outcomes.size();
    mean_median_laipe /= outcomes.size();
    std::snprintf(buf, sizeof(buf),
                  "averaging effect: mean LAIPE of 5-run average %.3f <= mean per-run median %.3f",
                  mean_avg_laipe, mean_median_laipe);
    report(2, mean_avg_laipe <= mean_median_laipe, buf);

    *outcomes_out = std::move(outcomes);
}

// -------------------------------------------------------------------- 3 ---

void criterion_3(const std::vector<SceneOutcome>& outcomes) {
    bool ok = true;
    std::string detail;

    // identity: L(s, s) = 0
    const HistogramSet& s0 = outcomes[0].obs.stats;
    LossWeights w = LossWeights::soybean_defaults();
    if (total_loss(s0, s0, w).total != 0.0) {
        ok = false;
        detail += " L(s,s)!=0;";
    }

    // disjoint one-hot depth histograms give L_depth = 2
    HistogramSet a = s0, b = s0;
    a.depth_hist.assign(a.depth_hist.size(), 0.0);
    b.depth_hist.assign(b.depth_hist.size(), 0.0);
    a.depth_hist[0] = 1.0;
    b.depth_hist[3] = 1.0;
    b.lateral_hist = a.lateral_hist;
    b.sobel_hist = a.sobel_hist;
    b.mask_area = a.mask_area;
    if (std::abs(total_loss(a, b, w).depth - 2.0) > 1e-12) {
        ok = false;
        detail += " L_depth(one-hot)!=2;";
    }

    // symmetry on the real observation pairs
    const HistogramSet& s1 = outcomes[1].obs.stats;
    if (std::abs(total_loss(s0, s1, w).total - total_loss(s1, s0, w).total) > 1e-15) {
        ok = false;
        detail += " asymmetric;";
    }

    // truth beats 20 random draws on every scene
    Rng rng(777);
    auto bounds = param_bounds(Species::Soybean);
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        const auto& oc = outcomes[s];
        double truth_loss = 0.0;
        for (int k = 0; k < 10; ++k) {
            truth_loss +=
                evaluate_candidate(oc.cfg, oc.obs, oc.cfg.hidden_params, derive_seed(555, {(std::uint64_t)s, (std::uint64_t)k}));
        }
        truth_loss /= 10.0;
        double min_random = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 20; ++k) {
            std::vector<double> x;
            for (const auto& bd : bounds) x.push_back(rng.uniform(bd.lo, bd.hi));
            double loss = evaluate_candidate(oc.cfg, oc.obs, x,
                                             derive_seed(556, {(std::uint64_t)s, (std::uint64_t)k}));
            min_random = std::min(min_random, loss);
        }
        if (!(truth_loss < min_random)) {
            ok = false;
            detail += " scene " + std::to_string(s) + " truth " + std::to_string(truth_loss) +
                      " !< random " + std::to_string(min_random) + ";";
        }
    }
    report(3, ok, "loss identities: zero at equality, 2 for disjoint one-hots, symmetric, "
                  "truth beats 20 random draws per scene" + detail);
}

// -------------------------------------------------------------------- 4 ---

void criterion_4() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    using namespace canopy::bo;

    // posterior dense-formula oracle on 20-point problems
    Rng rng(31415);
    double max_err = 0.0;
    for (int problem = 0; problem < 5; ++problem) {
        const int n = 20, d = 3;
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) X(i, k) = rng.uniform();
            y(i) = std::sin(3 * X(i, 0)) + X(i, 1) * X(i, 2) + 0.05 * rng.normal(0, 1);
        }
        Eigen::VectorXd ls(d);
        ls << rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0);
        double sv = rng.uniform(0.5, 2.0);
        double nv = 1e-5;
        GaussianProcess gp = GaussianProcess::fit_fixed(X, y, ls, sv, nv);

        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                std::vector<double> xi(d), xj(d), l(d);
                for (int k = 0; k < d; ++k) {
                    xi[k] = X(i, k);
                    xj[k] = X(j, k);
                    l[k] = ls(k);
                }
                K(i, j) = matern_cov(xi, xj, l, sv, MaternNu::FiveHalves);
            }
        }
        K += (nv + 1e-10) * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd Kinv = K.inverse();
        const Eigen::VectorXd& ys = gp.targets_standardized();
        for (int q = 0; q < 20; ++q) {
            std::vector<double> x(d);
            for (int k = 0; k < d; ++k) x[k] = rng.uniform();
            Eigen::VectorXd kst(n);
            for (int i = 0; i < n; ++i) {
                std::vector<double> xi(d), l(d);
                for (int k = 0; k < d; ++k) {
                    xi[k] = X(i, k);
                    l[k] = ls(k);
                }
                kst(i) = matern_cov(x, xi, l, sv, MaternNu::FiveHalves);
            }
            double mu = gp.y_mean() + gp.y_std() * kst.dot(Kinv * ys);
            double var = sv - kst.dot(Kinv * kst);
            double sd = gp.y_std() * std::sqrt(std::max(var, 0.0));
            auto post = gp.posterior(x);
            max_err = std::max(max_err, std::abs(post.mean - mu));
            max_err = std::max(max_err, std::abs(post.stddev - sd));
        }
    }
    if (max_err >= 1e-8) {
        ok = false;
        detail += " GP oracle err " + std::to_string(max_err) + ";";
    }

    // EI vs antithetic Monte Carlo, 100 triples
    double max_ei_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        double mu = rng.uniform(-0.7, 0.7);
        double sigma = rng.uniform(0.02, 0.5);
        double best = rng.uniform(-0.7, 0.7);
        double acc = 0.0;
        const int n = 500000;  // antithetic pairs -> 1e6 samples
        for (int i = 0; i < n; ++i) {
            double z = rng.normal(0.0, 1.0);
            acc += std::max(best - (mu + sigma * z), 0.0) + std::max(best - (mu - sigma * z), 0.0);
        }
        double mc = acc / (2.0 * n);
        max_ei_err = std::max(max_ei_err, std::abs(expected_improvement(mu, sigma, best) - mc));
    }
    if (max_ei_err >= 1e-3) {
        ok = false;
        detail += " EI MC err " + std::to_string(max_ei_err) + ";";
    }

    // BO on the 2D quadratic: 20 seeds, 100 evaluations each
    SearchSpace space;
    space.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    auto objective = [](std::span<const double> x, std::uint64_t) {
        return (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.7) * (x[1] - 0.7);
    };
    int hits = 0;
    for (int seed = 0; seed < 20; ++seed) {
        OptConfig cfg;
        cfg.n_initial = 20;
        cfg.n_total = 100;
        cfg.candidate_count = 500;
        cfg.seed = 9000 + seed;
        OptRunResult run = optimize(objective, space, cfg);
        if (!run.ok()) continue;
        if (std::hypot(run.best_x[0] - 0.3, run.best_x[1] - 0.7) < 0.05) ++hits;
    }
    if (hits < 18) {
        ok = false;
        detail += " BO quadratic hits " + std::to_string(hits) + "/20;";
    }

    double wall = seconds_since(t0);
    if (wall >= 60.0) {
        ok = false;
        detail += " runtime " + std::to_string(wall) + "s;";
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "GP/EI: posterior oracle err %.2e (<1e-8), EI-MC err %.2e (<1e-3), "
                  "quadratic %d/20 within 0.05, %.1fs (<60s)%s",
                  max_err, max_ei_err, hits, wall, detail.c_str());
    report(4, ok, buf);
}

// -------------------------------------------------------------------- 5 ---

void criterion_5() {
    bool ok = true;
    std::string detail;
    constexpr double kRad = std::numbers::pi / 180.0;

    int plane_good = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(42, {static_cast<std::uint64_t>(seed)}));
        std::vector<Eigen::Vector3d> pts;
        for (int i = 0; i < 700; ++i)
            pts.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0);
        for (int i = 0; i < 300; ++i)
            pts.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                             rng.uniform(-0.5, 0.5));
        RansacPlaneResult r = ransac_plane(pts, 0.05, 1000, 7000 + seed);
        double angle =
            std::acos(std::min(1.0, std::abs(r.plane.normal.dot(Eigen::Vector3d::UnitZ()))));
        if (angle < 1.0 * kRad && std::abs(r.plane.offset) < 0.005) ++plane_good;
    }
    if (plane_good != 100) {
        ok = false;
        detail += " plane " + std::to_string(plane_good) + "/100;";
    }

    int rows_good = 0;
    for (int seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(43, {static_cast<std::uint64_t>(seed)}));
        std::vector<Eigen::Vector3d> pts;
        for (int row = 0; row < 2; ++row) {
            double y = row * 0.76;
            for (int i = 0; i < 2000; ++i)
                pts.emplace_back(rng.uniform(-1, 1), y + rng.normal(0.0, 0.03),
                                 0.3 + rng.uniform(0.0, 0.3));
        }
        PlaneModel plane;
        RowFitConfig cfg;
        cfg.row_stop_min_points = 150;
        std::vector<LineModel> rows = fit_rows(pts, plane, cfg, 600 + seed);
        if (rows.size() != 2) continue;
        bool dirs_ok = true;
        for (const auto& r : rows) {
            double angle =
                std::acos(std::min(1.0, std::abs(r.direction.dot(Eigen::Vector3d::UnitX()))));
            if (angle >= 2.0 * kRad) dirs_ok = false;
        }
        if (dirs_ok) ++rows_good;
    }
    if (rows_good != 10) {
        ok = false;
        detail += " rows " + std::to_string(rows_good) + "/10;";
    }

    // structureless clouds terminate by the stop rule
    for (int seed = 0; seed < 5; ++seed) {
        Rng rng(derive_seed(44, {static_cast<std::uint64_t>(seed)}));
        std::vector<Eigen::Vector3d> pts;
        for (int i = 0; i < 4000; ++i)
            pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1));
        PlaneModel plane;
        RowFitConfig cfg;
        cfg.row_stop_min_points = 100;
        cfg.row_inlier = 0.02;
        fit_rows(pts, plane, cfg, 800 + seed);  // must return
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "RANSAC: plane %d/100 (normal<1deg, offset<5mm), rows %d/10 (<2deg), "
                  "structureless clouds terminate%s",
                  plane_good, rows_good, detail.c_str());
    report(5, ok, buf);
}

// -------------------------------------------------------------------- 6 ---

void criterion_6() {
    bool ok = true;
    std::string detail;
    auto profile = default_soybean_profile();
    Rng rng(606060);

    int checked = 0;
    for (int draw = 0; draw < 200; ++draw) {
        SoybeanParams p{rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0),
                        rng.uniform(0.5, 2.0), rng.uniform(1.0, 14.0)};
        std::uint64_t seed = rng.next_u64();
        LabeledMesh m1 = generate_soybean_plant(p, profile, seed);
        LabeledMesh m2 = generate_soybean_plant(p, profile, seed);
        // bitwise determinism
        if (m1.vertices.size() != m2.vertices.size()) {
            ok = false;
            detail += " determinism size;";
            break;
        }
        for (std::size_t i = 0; i < m1.vertices.size(); ++i) {
            if (m1.vertices[i] != m2.vertices[i]) {
                ok = false;
                detail += " determinism bits;";
                break;
            }
        }

        // branch rule
        std::set<std::int32_t> stems;
        for (const auto& l : m1.labels)
            if (l.organ == Organ::Stem) stems.insert(l.index);
        int branches = static_cast<int>(stems.size()) - 1;
        if (branches != soybean_branch_count(p.num_nodes) || branches > 6 ||
            (p.num_nodes < 8.0 && branches != 0)) {
            ok = false;
            detail += " branch rule;";
        }

        // trifoliate coplanarity of the first node
        std::vector<Eigen::Vector3d> pts;
        for (std::size_t f = 0; f < m1.triangles.size(); ++f) {
            if (m1.labels[f].organ != Organ::Leaf || m1.labels[f].index >= 3) continue;
            for (auto vi : m1.triangles[f]) pts.push_back(m1.vertices[vi]);
        }
        if (pts.size() > 9) {
            Eigen::Vector3d n = (pts[4] - pts[0]).cross(pts[8] - pts[0]).normalized();
            for (const auto& q : pts) {
                if (std::abs(n.dot(q - pts[0])) >= 1e-9) {
                    ok = false;
                    detail += " coplanarity;";
                    break;
                }
            }
        }
        ++checked;
    }

    // fractional-node monotonicity on [8, 9] at 0.1 steps, 200 draws
    auto leaf_area = [](const LabeledMesh& mesh) {
        double area = 0.0;
        for (std::size_t f = 0; f < mesh.triangles.size(); ++f)
            if (mesh.labels[f].organ == Organ::Leaf) area += mesh.face_area(f);
        return area;
    };
    int mono_ok = 0;
    for (int draw = 0; draw < 200; ++draw) {
        SoybeanParams p{rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0),
                        rng.uniform(0.5, 2.0), 8.0};
        std::uint64_t seed = rng.next_u64();
        double prev = -1.0;
        bool monotone = true;
        for (int i = 0; i <= 10; ++i) {
            p.num_nodes = (80 + i) / 10.0;
            double area = leaf_area(generate_soybean_plant(p, profile, seed));
            if (area < prev) monotone = false;
            prev = area;
        }
        if (monotone) ++mono_ok;
    }
    if (mono_ok != 200) {
        ok = false;
        detail += " monotonicity " + std::to_string(mono_ok) + "/200;";
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "generator invariants over %d draws: bitwise determinism, branch rules, "
                  "coplanarity < 1e-9, area monotone on [8,9] (%d/200)%s",
                  checked, mono_ok, detail.c_str());
    report(6, ok, buf);
}

// -------------------------------------------------------------------- 7 ---

void criterion_7() {
    bool ok = true;
    std::string detail;
    PinholeCamera cam = overhead_camera(0, 0, 0, 1.0, 64, 48, 50.0);

    // permutation invariance
    Rng rng(515);
    DepthMap d = make_depth(cam);
    ForegroundMask m = make_mask(64, 48);
    for (std::size_t i = 0; i < d.depth.size(); ++i) {
        if (rng.uniform() < 0.5) {
            d.depth[i] = static_cast<float>(rng.uniform(0.05, 1.3));
            m.mask[i] = 255;
        }
    }
    HistogramSpec spec{20, 0.1, 1.0};
    auto h1 = depth_histogram(d, m, spec);
    std::vector<int> perm(d.depth.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform() * (i + 1));
        std::swap(perm[i], perm[j]);
    }
    DepthMap d2 = make_depth(cam);
    ForegroundMask m2 = make_mask(64, 48);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        d2.depth[perm[i]] = d.depth[i];
        m2.mask[perm[i]] = m.mask[i];
    }
    if (depth_histogram(d2, m2, spec) != h1) {
        ok = false;
        detail += " permutation;";
    }

    // normalization to 1 +- 1e-9
    double sum = std::accumulate(h1.begin(), h1.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        ok = false;
        detail += " normalization;";
    }

    // clamping of out-of-range values into the end bins
    DepthMap dc = make_depth(cam);
    ForegroundMask mc = make_mask(64, 48);
    dc.depth[0] = 0.0001f;
    dc.depth[1] = 99.0f;
    mc.mask[0] = mc.mask[1] = 255;
    auto hc = depth_histogram(dc, mc, spec);
    if (hc[0] != 0.5 || hc[19] != 0.5) {
        ok = false;
        detail += " clamping;";
    }

    // Sobel ramp: |gx| = 8a exactly on interior pixels
    const double a = 0.00017;
    std::vector<double> ramp(64 * 48);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) ramp[y * 64 + x] = 0.3 + a * x;
    std::vector<double> gx, gy;
    sobel3(ramp, 64, 48, gx, gy);
    for (int y = 1; y < 47 && ok; ++y) {
        for (int x = 1; x < 63; ++x) {
            if (std::abs(gx[y * 64 + x] - 8.0 * a) > 1e-15 || gy[y * 64 + x] != 0.0) {
                ok = false;
                detail += " sobel ramp;";
                break;
            }
        }
    }

    report(7, ok,
           "histogram properties: permutation invariance, normalization, end-bin clamping, "
           "Sobel ramp = 8a" + detail);
}

// -------------------------------------------------------------------- 8 ---

void criterion_8() {
    bool ok = true;
    std::string detail;
    auto profile = default_soybean_profile();
    Rng rng(818181);

    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        PlantParams p = clamp_params(
            std::vector<double>{rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0),
                                rng.uniform(0.5, 2.0), rng.uniform(1.0, 14.0)},
            Species::Soybean);
        CanopyLayout layout{0.76, 0.2, 1, 2, 0.01};
        LabeledMesh mesh = build_canopy(p, layout, profile, rng.next_u64());

        double area = 0.0, wsum = 0.0, wsq = 0.0;
        for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
            if (mesh.labels[f].organ != Organ::Leaf) continue;
            const auto& t = mesh.triangles[f];
            Eigen::Vector3d n =
                (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
            double a2 = n.norm();
            if (a2 <= 0.0) continue;
            double a = 0.5 * a2;
            double angle =
                std::acos(std::min(std::abs(n.z() / a2), 1.0)) * 180.0 / std::numbers::pi;
            area += a;
            wsum += a * angle;
            wsq += a * angle * angle;
        }
        double ground = layout.footprint_area();
        CanopyMetrics m = compute_metrics(mesh, ground);
        double mean = wsum / area;
        double stddev = std::sqrt(std::max(wsq / area - mean * mean, 0.0));
        worst = std::max(worst, std::abs(m.lai - area / ground));
        worst = std::max(worst, std::abs(m.angle_mean_deg - mean));
        worst = std::max(worst, std::abs(m.angle_std_deg - stddev) * 1e-3);  // std has sqrt noise
        if (std::abs(m.lai - area / ground) > 1e-9 || std::abs(m.angle_mean_deg - mean) > 1e-9 ||
            std::abs(m.angle_std_deg - stddev) > 1e-6) {
            ok = false;
            detail += " oracle mismatch trial " + std::to_string(trial) + ";";
        }
    }

    // exact horizontal / vertical leaves
    LabeledMesh flat;
    flat.vertices = {{0, 0, 0.5}, {0.2, 0, 0.5}, {0.2, 0.2, 0.5}, {0, 0.2, 0.5}};
    flat.triangles = {{0, 1, 2}, {0, 2, 3}};
    flat.labels = {{Organ::Leaf, 0, 0}, {Organ::Leaf, 0, 0}};
    CanopyMetrics fm = compute_metrics(flat, 4.0);
    if (std::abs(fm.lai - 0.01) > 1e-12 || fm.angle_mean_deg != 0.0) {
        ok = false;
        detail += " horizontal;";
    }
    LabeledMesh vert;
    vert.vertices = {{0, 0, 0}, {0.2, 0, 0}, {0.2, 0, 0.2}, {0, 0, 0.2}};
    vert.triangles = {{0, 1, 2}, {0, 2, 3}};
    vert.labels = {{Organ::Leaf, 0, 0}, {Organ::Leaf, 0, 0}};
    if (compute_metrics(vert, 4.0).angle_mean_deg != 90.0) {
        ok = false;
        detail += " vertical;";
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "metrics oracle: 50 random canopies match brute force (worst %.2e), "
                  "horizontal/vertical exact%s",
                  worst, detail.c_str());
    report(8, ok, buf);
}

}  // namespace

int main() {
    auto t0 = Clock::now();
    std::printf("canopyfit acceptance suite\n");

    std::vector<SceneOutcome> outcomes;
    criterion_1_2(&outcomes);
    criterion_3(outcomes);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();

    std::printf("%d criterion(s) failed; total wall %.0fs\n", g_failures, seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
