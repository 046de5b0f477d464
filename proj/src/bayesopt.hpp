#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gp.hpp"

namespace canopy::bo {

struct SearchSpace {
    std::vector<std::string> names;
    std::vector<std::pair<double, double>> bounds;

    std::size_t dim() const { return bounds.size(); }
    void validate() const;
    std::vector<double> normalize(std::span<const double> x) const;
    std::vector<double> denormalize(std::span<const double> u) const;
    std::vector<double> clamp(std::span<const double> x) const;
};

struct OptConfig {
    int n_initial = 200;
    int n_total = 500;
    int n_runs = 10;
    int candidate_count = 1000;
    std::uint64_t seed = 0;
    int hyper_refit_period = 25;  // iterations between hyperparameter searches
    MaternNu nu = MaternNu::FiveHalves;

    void validate() const;
};

struct Evaluation {
    std::vector<double> x;
    double loss = 0.0;
    std::int64_t wallclock_ms = 0;
};

struct OptRunResult {
    std::vector<double> best_x;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<Evaluation> trace;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

// EI for minimization; sigma = 0 degrades to max(best - mu, 0).
double expected_improvement(double mu, double sigma, double best_so_far);

// Argmax of EI over uniform candidates in the unit box plus coordinate
// refinement (3 passes, shrinking step). Returns a unit-box point.
std::vector<double> propose_next(const GaussianProcess& gp, std::size_t dim, double best_so_far,
                                 std::uint64_t seed, int candidate_count);

// The objective receives the candidate (original units) and a per-iteration
// seed for stochastic generation. It must return a finite loss.
using Objective = std::function<double(std::span<const double> x, std::uint64_t eval_seed)>;

// Random initialization followed by GP/EI-guided proposals. Deterministic
// given (cfg.seed, objective); `resume` trace entries are reused verbatim.
OptRunResult optimize(const Objective& objective, const SearchSpace& space, const OptConfig& cfg,
                      std::vector<Evaluation> resume = {});

// Per-dimension mean of each run's best point, clamped to the bounds.
std::vector<double> average_solutions(std::span<const OptRunResult> results,
                                      const SearchSpace& space);

// JSONL trace I/O: one {iter, x, loss, wallclock_ms} object per line.
void write_trace(const std::vector<Evaluation>& trace, const std::string& path);
void append_trace_line(const Evaluation& eval, int iter, const std::string& path);
std::vector<Evaluation> read_trace(const std::string& path);

}  // namespace canopy::bo
