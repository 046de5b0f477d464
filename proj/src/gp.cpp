#include "gp.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace canopy::bo {

namespace {

double scaled_distance(std::span<const double> x1, std::span<const double> x2,
                       std::span<const double> ls) {
    double s = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        double d = (x1[i] - x2[i]) / ls[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double matern_value(double r, MaternNu nu) {
    switch (nu) {
        case MaternNu::Half:
            return std::exp(-r);
        case MaternNu::ThreeHalves: {
            double a = std::numbers::sqrt3 * r;
            return (1.0 + a) * std::exp(-a);
        }
        case MaternNu::FiveHalves: {
            double a = std::sqrt(5.0) * r;
            return (1.0 + a + a * a / 3.0) * std::exp(-a);
        }
    }
    throw ConfigError("matern_cov: unsupported nu");
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& ls,
                              double signal_variance, MaternNu nu) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = signal_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double r = 0.0;
            for (Eigen::Index d = 0; d < X.cols(); ++d) {
                double diff = (X(i, d) - X(j, d)) / ls(d);
                r += diff * diff;
            }
            double v = signal_variance * matern_value(std::sqrt(r), nu);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

}  // namespace

double matern_cov(std::span<const double> x1, std::span<const double> x2,
                  std::span<const double> length_scales, double variance, MaternNu nu) {
    if (x1.size() != x2.size() || x1.size() != length_scales.size())
        throw DomainError("matern_cov: dimension mismatch");
    for (double l : length_scales) {
        if (!(l > 0.0)) throw DomainError("matern_cov: length scales must be > 0");
    }
    return variance * matern_value(scaled_distance(x1, x2, length_scales), nu);
}

void GaussianProcess::decompose() {
    const Eigen::Index n = X_.rows();
    Eigen::MatrixXd K = kernel_matrix(X_, length_scales_, signal_variance_, cfg_.nu);
    double jitter = cfg_.jitter;
    while (true) {
        Eigen::MatrixXd Kj = K + (noise_variance_ + jitter) * Eigen::MatrixXd::Identity(n, n);
        llt_.compute(Kj);
        if (llt_.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > 1e-4)
            throw NumericError("GP kernel matrix is not positive definite after jitter escalation");
    }
    alpha_ = llt_.solve(ys_);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt_.matrixL()(i, i));
    log_det *= 2.0;
    lml_ = -0.5 * ys_.dot(alpha_) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GaussianProcess GaussianProcess::fit_fixed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& length_scales,
                                           double signal_variance, double noise_variance,
                                           const GpConfig& cfg) {
    if (X.rows() < 2) throw DomainError("gp_fit: need at least 2 training points");
    if (X.rows() != y.size()) throw DomainError("gp_fit: X and y sizes do not match");
    if (length_scales.size() != X.cols()) throw DomainError("gp_fit: length scale dimension mismatch");

    GaussianProcess gp;
    gp.cfg_ = cfg;
    gp.X_ = X;
    gp.y_mean_ = y.mean();
    double var = (y.array() - gp.y_mean_).square().sum() / y.size();
    gp.y_std_ = std::sqrt(std::max(var, 1e-24));
    gp.ys_ = (y.array() - gp.y_mean_) / gp.y_std_;
    gp.length_scales_ = length_scales;
    gp.signal_variance_ = signal_variance;
    gp.noise_variance_ = noise_variance;
    gp.decompose();
    return gp;
}

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const GpConfig& cfg) {
    if (X.rows() < 2) throw DomainError("gp_fit: need at least 2 training points");
    if (X.rows() != y.size()) throw DomainError("gp_fit: X and y sizes do not match");
    if (X.minCoeff() < -1e-9 || X.maxCoeff() > 1.0 + 1e-9)
        throw DomainError("gp_fit: inputs must be normalized to the unit box");

    const Eigen::Index d = X.cols();

    auto evaluate = [&](const Eigen::VectorXd& ls, double sv, double nv) {
        GaussianProcess gp = fit_fixed(X, y, ls, sv, nv, cfg);
        return std::make_pair(gp.log_marginal_likelihood(), std::move(gp));
    };

    // coarse isotropic grid over (length scale, noise, signal variance)
    const double ls_grid[] = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
    const double noise_grid[] = {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1};
    const double signal_grid[] = {0.5, 1.0, 2.0};

    double best_lml = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_ls = Eigen::VectorXd::Constant(d, 1.0);
    double best_sv = 1.0, best_nv = 1e-4;
    for (double ls : ls_grid) {
        for (double nv : noise_grid) {
            for (double sv : signal_grid) {
                try {
                    auto [lml, gp] = evaluate(Eigen::VectorXd::Constant(d, ls), sv, nv);
                    if (lml > best_lml) {
                        best_lml = lml;
                        best_ls = gp.length_scales_;
                        best_sv = sv;
                        best_nv = nv;
                    }
                } catch (const NumericError&) {
                    // skip ill-conditioned corner of the grid
                }
            }
        }
    }
    if (!std::isfinite(best_lml))
        throw NumericError("gp_fit: no hyperparameter candidate produced a PD kernel");

    // coordinate refinement in log space, shrinking multiplicative steps
    for (double factor : {2.0, 1.4, 1.15}) {
        for (Eigen::Index k = 0; k < d + 2; ++k) {
            for (double mult : {factor, 1.0 / factor}) {
                Eigen::VectorXd ls = best_ls;
                double sv = best_sv, nv = best_nv;
                if (k < d) {
                    ls(k) = std::clamp(ls(k) * mult, cfg.length_scale_min, cfg.length_scale_max);
                } else if (k == d) {
                    sv = std::clamp(sv * mult, cfg.signal_min, cfg.signal_max);
                } else {
                    nv = std::clamp(nv * mult, cfg.noise_min, cfg.noise_max);
                }
                try {
                    auto [lml, gp] = evaluate(ls, sv, nv);
                    if (lml > best_lml) {
                        best_lml = lml;
                        best_ls = ls;
                        best_sv = sv;
                        best_nv = nv;
                    }
                } catch (const NumericError&) {
                }
            }
        }
    }

    return fit_fixed(X, y, best_ls, best_sv, best_nv, cfg);
}

GaussianProcess::Posterior GaussianProcess::posterior(std::span<const double> x) const {
    const Eigen::Index n = X_.rows();
    if (static_cast<Eigen::Index>(x.size()) != X_.cols())
        throw DomainError("posterior: query dimension mismatch");
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = 0.0;
        for (Eigen::Index d = 0; d < X_.cols(); ++d) {
            double diff = (x[static_cast<std::size_t>(d)] - X_(i, d)) / length_scales_(d);
            r += diff * diff;
        }
        k_star(i) = signal_variance_ * matern_value(std::sqrt(r), cfg_.nu);
    }
    double mean_s = k_star.dot(alpha_);
    Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    double var_s = signal_variance_ - v.squaredNorm();
    if (var_s < 0.0) var_s = 0.0;
    return {y_mean_ + y_std_ * mean_s, y_std_ * std::sqrt(var_s)};
}

}  // namespace canopy::bo
