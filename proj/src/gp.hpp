#pragma once

#include <Eigen/Dense>
#include <span>

namespace canopy::bo {

enum class MaternNu { Half, ThreeHalves, FiveHalves };

// Anisotropic Matern covariance; r is the length-scale-weighted distance.
double matern_cov(std::span<const double> x1, std::span<const double> x2,
                  std::span<const double> length_scales, double variance, MaternNu nu);

struct GpConfig {
    MaternNu nu = MaternNu::FiveHalves;
    double jitter = 1e-10;
    // log-space hyperparameter bounds
    double length_scale_min = 1e-2;
    double length_scale_max = 1e1;
    double noise_min = 1e-8;
    double noise_max = 1e-1;
    double signal_min = 0.05;
    double signal_max = 20.0;
};

// GP regression on inputs normalized to the unit box; targets are
// standardized internally, posterior outputs are in the original units.
class GaussianProcess {
public:
    // Hyperparameters chosen by log-marginal-likelihood over a log-space
    // grid with coordinate refinement.
    static GaussianProcess fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const GpConfig& cfg = {});
    // Refit with fixed hyperparameters (e.g. when new points arrive between
    // hyperparameter searches).
    static GaussianProcess fit_fixed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& length_scales, double signal_variance,
                                     double noise_variance, const GpConfig& cfg = {});

    struct Posterior {
        double mean;
        double stddev;
    };
    Posterior posterior(std::span<const double> x) const;

    // Log marginal likelihood of the standardized targets under the fitted kernel.
    double log_marginal_likelihood() const { return lml_; }

    const Eigen::MatrixXd& inputs() const { return X_; }
    const Eigen::VectorXd& targets_standardized() const { return ys_; }
    const Eigen::VectorXd& length_scales() const { return length_scales_; }
    double signal_variance() const { return signal_variance_; }
    double noise_variance() const { return noise_variance_; }
    double y_mean() const { return y_mean_; }
    double y_std() const { return y_std_; }
    MaternNu nu() const { return cfg_.nu; }

private:
    GaussianProcess() = default;
    void decompose();  // Cholesky with jitter escalation

    GpConfig cfg_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd ys_;  // standardized targets
    double y_mean_ = 0.0;
    double y_std_ = 1.0;
    Eigen::VectorXd length_scales_;
    double signal_variance_ = 1.0;
    double noise_variance_ = 1e-6;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;  // K^-1 ys
    double lml_ = 0.0;
};

}  // namespace canopy::bo
