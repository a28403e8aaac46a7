#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdle/lyapunov.hpp"
#include "sdle/models.hpp"

namespace sdle {

/// Per-(T, h, method) Monte Carlo statistics over the finite-time exponents,
/// mirroring the appendix-table schema: mean, standard deviation, variance, 95%
/// confidence interval, relative error against a registered oracle, wall time.
/// All per-exponent vectors are in descending-exponent order. Spread statistics
/// are absent when fewer than two realizations survive.
struct EnsembleReport {
    double horizon = 0.0;
    double h = 0.0;
    std::string method;
    int n_requested = 0;
    int n_effective = 0;
    std::uint64_t base_seed = 0;
    int dim = 0;
    std::vector<double> mean;
    std::optional<std::vector<double>> std_dev;
    std::optional<std::vector<double>> variance;
    std::optional<std::vector<std::pair<double, double>>> ci95;  // mean +- 1.96 std/sqrt(n)
    std::optional<std::vector<double>> rel_error_pct;
    double wall_seconds = 0.0;
    std::vector<int> failed;  // realization indices excluded for blow-up/degeneracy

    /// More than 5% of the requested realizations failed.
    bool excessive_failures() const;
};

struct EnsembleResult {
    EnsembleReport report;
    std::vector<LeAccumulator> runs;  // surviving runs, realization order
};

/// n independent runs with seeds base_seed + 0..n-1; deterministic aggregation in
/// realization order regardless of worker count (workers = 0 picks the hardware
/// parallelism). Non-finite or rank-deficient realizations are excluded and
/// flagged rather than aborting the ensemble.
EnsembleReport run_ensemble(const SdeSystem& s, const LeRunConfig& cfg, int n,
                            std::uint64_t base_seed, int workers = 0,
                            const std::optional<std::vector<double>>& oracle = std::nullopt);

/// Same, additionally keeping every surviving run (for history/convergence work).
EnsembleResult run_ensemble_collect(const SdeSystem& s, const LeRunConfig& cfg, int n,
                                    std::uint64_t base_seed, int workers = 0,
                                    const std::optional<std::vector<double>>& oracle = std::nullopt);

/// Registry-backed variant; the model's oracle (when registered) feeds rel_error.
EnsembleReport run_ensemble(const std::string& model,
                            const std::map<std::string, std::string>& overrides, LeRunConfig cfg,
                            int n, std::uint64_t base_seed, int workers = 0);

/// Ordered reports for one parameter swept over explicit values. "h" and "T"
/// resolve on the run configuration, anything else on the model; the same seed
/// block is reused for every value (variance reduction across the sweep).
std::vector<std::pair<double, EnsembleReport>> sweep(
    const std::string& model, const std::map<std::string, std::string>& overrides,
    const LeRunConfig& cfg, const std::string& param, std::span<const double> values, int n,
    std::uint64_t base_seed, int workers = 0);

/// Cross-realization mean and variance of lambda(t) at every common sample time
/// (exponents sorted descending per sample). Throws MismatchedGridsError when the
/// histories were sampled on different grids.
struct ConvergenceSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> mean;      // [time][exponent]
    std::vector<std::vector<double>> variance;  // [time][exponent]
};

ConvergenceSeries convergence_stats(std::span<const LeAccumulator> runs);

}  // namespace sdle
