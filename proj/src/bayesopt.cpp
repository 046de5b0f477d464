#include "bayesopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace canopy::bo {

using nlohmann::json;

namespace {

enum : std::uint64_t { kTagInit = 101, kTagPropose = 102, kTagEval = 103 };

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

void SearchSpace::validate() const {
    if (bounds.empty()) throw DomainError("search space has no dimensions");
    if (!names.empty() && names.size() != bounds.size())
        throw DomainError("search space: names/bounds size mismatch");
    for (const auto& [lo, hi] : bounds) {
        if (!(lo < hi)) throw DomainError("search space: lower bound must be < upper bound");
    }
}

std::vector<double> SearchSpace::normalize(std::span<const double> x) const {
    if (x.size() != bounds.size()) throw DomainError("normalize: dimension mismatch");
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        u[i] = (x[i] - bounds[i].first) / (bounds[i].second - bounds[i].first);
    return u;
}

std::vector<double> SearchSpace::denormalize(std::span<const double> u) const {
    if (u.size() != bounds.size()) throw DomainError("denormalize: dimension mismatch");
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        x[i] = bounds[i].first + u[i] * (bounds[i].second - bounds[i].first);
    return x;
}

std::vector<double> SearchSpace::clamp(std::span<const double> x) const {
    if (x.size() != bounds.size()) throw DomainError("clamp: dimension mismatch");
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], bounds[i].first, bounds[i].second);
    return out;
}

void OptConfig::validate() const {
    if (n_initial < 1 || n_total < 1 || n_runs < 1 || candidate_count < 1)
        throw ConfigError("opt config: counts must be >= 1");
    if (n_initial >= n_total && n_initial != n_total)
        throw ConfigError("opt config: n_initial must be <= n_total");
    if (hyper_refit_period < 1) throw ConfigError("opt config: hyper_refit_period must be >= 1");
}

double expected_improvement(double mu, double sigma, double best_so_far) {
    if (sigma < 0.0) throw DomainError("expected_improvement: sigma must be >= 0");
    double improvement = best_so_far - mu;
    if (sigma == 0.0) return std::max(improvement, 0.0);
    double z = improvement / sigma;
    return improvement * normal_cdf(z) + sigma * normal_pdf(z);
}

std::vector<double> propose_next(const GaussianProcess& gp, std::size_t dim, double best_so_far,
                                 std::uint64_t seed, int candidate_count) {
    Rng rng(seed);
    std::vector<double> best_x(dim, 0.5);
    double best_ei = -1.0;
    std::vector<double> x(dim);
    for (int c = 0; c < candidate_count; ++c) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = rng.uniform();
        auto post = gp.posterior(x);
        double ei = expected_improvement(post.mean, post.stddev, best_so_far);
        if (ei > best_ei) {
            best_ei = ei;
            best_x = x;
        }
    }

    double step = 0.05;
    for (int pass = 0; pass < 3; ++pass) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (double dir : {step, -step}) {
                std::vector<double> probe = best_x;
                probe[i] = std::clamp(probe[i] + dir, 0.0, 1.0);
                auto post = gp.posterior(probe);
                double ei = expected_improvement(post.mean, post.stddev, best_so_far);
                if (ei > best_ei) {
                    best_ei = ei;
                    best_x = probe;
                }
            }
        }
        step *= 0.5;
    }
    return best_x;
}

OptRunResult optimize(const Objective& objective, const SearchSpace& space, const OptConfig& cfg,
                      std::vector<Evaluation> resume) {
    space.validate();
    cfg.validate();
    const std::size_t dim = space.dim();

    OptRunResult result;
    result.trace = std::move(resume);
    if (result.trace.size() > static_cast<std::size_t>(cfg.n_total))
        throw ConfigError("optimize: resume trace longer than n_total");
    for (const auto& e : result.trace) {
        if (e.x.size() != dim) throw DataError("optimize: resume trace dimension mismatch");
    }

    GpConfig gp_cfg;
    gp_cfg.nu = cfg.nu;
    // hyperparameters are refit on the data available at scheduled
    // iterations only, so a resumed run reproduces the original proposals
    int hypers_from = -1;
    Eigen::VectorXd hyper_ls;
    double hyper_sv = 1.0, hyper_nv = 1e-4;

    for (int t = static_cast<int>(result.trace.size()); t < cfg.n_total; ++t) {
        std::vector<double> x;
        if (t < cfg.n_initial) {
            Rng rng(derive_seed(cfg.seed, {kTagInit, static_cast<std::uint64_t>(t)}));
            std::vector<double> u(dim);
            for (std::size_t i = 0; i < dim; ++i) u[i] = rng.uniform();
            x = space.denormalize(u);
        } else {
            const Eigen::Index n = static_cast<Eigen::Index>(result.trace.size());
            Eigen::MatrixXd X(n, static_cast<Eigen::Index>(dim));
            Eigen::VectorXd y(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                auto u = space.normalize(result.trace[static_cast<std::size_t>(i)].x);
                for (std::size_t d = 0; d < dim; ++d) X(i, static_cast<Eigen::Index>(d)) = u[d];
                y(i) = result.trace[static_cast<std::size_t>(i)].loss;
            }
            int refit_at = cfg.n_initial +
                           (t - cfg.n_initial) / cfg.hyper_refit_period * cfg.hyper_refit_period;
            if (hypers_from != refit_at) {
                GaussianProcess g = GaussianProcess::fit(X.topRows(refit_at), y.head(refit_at), gp_cfg);
                hyper_ls = g.length_scales();
                hyper_sv = g.signal_variance();
                hyper_nv = g.noise_variance();
                hypers_from = refit_at;
            }
            GaussianProcess gp = GaussianProcess::fit_fixed(X, y, hyper_ls, hyper_sv, hyper_nv, gp_cfg);
            // plugin incumbent: the minimum posterior mean over evaluated
            // points; the raw minimum of a noisy objective chases noise
            double best = std::numeric_limits<double>::infinity();
            std::vector<double> xi(dim);
            for (Eigen::Index i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < dim; ++d) xi[d] = X(i, static_cast<Eigen::Index>(d));
                best = std::min(best, gp.posterior(xi).mean);
            }
            auto u = propose_next(gp, dim, best,
                                  derive_seed(cfg.seed, {kTagPropose, static_cast<std::uint64_t>(t)}),
                                  cfg.candidate_count);
            x = space.denormalize(u);
        }

        auto t0 = std::chrono::steady_clock::now();
        double loss;
        try {
            loss = objective(x, derive_seed(cfg.seed, {kTagEval, static_cast<std::uint64_t>(t)}));
        } catch (const std::exception& e) {
            result.error = std::string("objective failed at iteration ") + std::to_string(t) + ": " +
                           e.what();
            break;
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        if (!std::isfinite(loss)) {
            result.error = "objective returned non-finite loss at iteration " + std::to_string(t);
            break;
        }
        result.trace.push_back({std::move(x), loss, ms});
    }

    for (const auto& e : result.trace) {
        if (e.loss < result.best_loss) {
            result.best_loss = e.loss;
            result.best_x = e.x;
        }
    }
    if (result.trace.empty() && result.error.empty()) result.error = "no evaluations performed";
    return result;
}

std::vector<double> average_solutions(std::span<const OptRunResult> results,
                                      const SearchSpace& space) {
    space.validate();
    std::vector<double> mean(space.dim(), 0.0);
    std::size_t n = 0;
    for (const auto& r : results) {
        if (r.best_x.empty()) continue;
        if (r.best_x.size() != space.dim())
            throw DomainError("average_solutions: result dimension mismatch");
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.best_x[i];
        ++n;
    }
    if (n == 0) throw DomainError("average_solutions: no successful results to average");
    for (double& m : mean) m /= static_cast<double>(n);
    return space.clamp(mean);
}

void write_trace(const std::vector<Evaluation>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        json line{{"iter", i},
                  {"x", trace[i].x},
                  {"loss", trace[i].loss},
                  {"wallclock_ms", trace[i].wallclock_ms}};
        out << line.dump() << "\n";
    }
}

void append_trace_line(const Evaluation& eval, int iter, const std::string& path) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open '" + path + "' for appending");
    json line{{"iter", iter}, {"x", eval.x}, {"loss", eval.loss}, {"wallclock_ms", eval.wallclock_ms}};
    out << line.dump() << "\n";
}

std::vector<Evaluation> read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace '" + path + "'");
    std::vector<Evaluation> trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            Evaluation e;
            e.x = j.at("x").get<std::vector<double>>();
            e.loss = j.at("loss").get<double>();
            e.wallclock_ms = j.value("wallclock_ms", 0);
            std::size_t iter = j.at("iter").get<std::size_t>();
            if (iter != trace.size())
                throw DataError(path + ":" + std::to_string(lineno) + ": non-contiguous iter");
            trace.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return trace;
}

}  // namespace canopy::bo
