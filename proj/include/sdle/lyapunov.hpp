#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdle/integrators.hpp"
#include "sdle/sde.hpp"

namespace sdle {

enum class LeMethod { DiscreteQr, ContinuousQr };

/// Run configuration shared by both QR engines.
struct LeRunConfig {
    LeMethod method = LeMethod::DiscreteQr;
    SchemeKind scheme = SchemeKind::EulerMaruyama;
    double h = 1e-3;           // fixed step size, > 0
    double horizon = 100.0;    // T; rounded to a whole number of steps
    int reorth_every = 1;      // discrete method's factorization cadence, >= 1
    std::uint64_t seed = 0;
    std::vector<double> x0;    // initial state, length dim
    int history_stride = 0;    // sample lambda(t) every this many steps; 0 disables
    std::optional<Matrix> v0;  // initial fundamental matrix; identity when absent
};

struct LeSample {
    double t;
    std::vector<double> lambda;  // raw engine (column) order
};

/// Running log-sums psi_i with lambda_i(t) = psi_i / t. Exponents are reported in
/// descending order; the history keeps the raw column order so individual series
/// stay continuous in time.
struct LeAccumulator {
    int dim = 0;
    std::vector<double> psi;
    double t = 0.0;
    std::vector<LeSample> history;

    std::vector<double> exponents() const;       // descending
    std::vector<double> raw_exponents() const;   // psi / t in column order
    /// Least-squares slope of lambda_i(t) over the last 10% of the recorded
    /// history; a near-zero value indicates a settled estimate.
    double tail_slope(int exponent_index = 0) const;
};

/// Discrete QR method: integrates state and transition matrix jointly, folds
/// Z = Q R every reorth_every steps, accumulates log R_ii, and restarts from Q.
LeAccumulator discrete_qr_run(const SdeSystem& s, const LeRunConfig& cfg);

/// Continuous QR method: integrates state, the orthogonal factor (projected each
/// step), and the log-diagonal SDE
///   d psi_i = sum_j (Q^T J_j Q)_ii dw_j - (1/2) sum_{j>=1} (Q^T J_j Q)_ii^2 dt.
LeAccumulator continuous_qr_run(const SdeSystem& s, const LeRunConfig& cfg);

/// Dispatches on cfg.method.
LeAccumulator run_le(const SdeSystem& s, const LeRunConfig& cfg);

/// Regularity diagnostic: |sum_i lambda_i(T) - (1/T) log|det Phi|| where the
/// log-determinant is accumulated along the same path and increments through the
/// Ito Liouville identity
///   d log det = tr J_0 dt + sum_j (tr J_j dw_j - (1/2) tr(J_j^2) dt).
double liouville_check(const SdeSystem& s, const LeRunConfig& cfg);

/// CSV-friendly label: d-em, d-mil, c-em, c-mil.
const char* method_label(LeMethod m, SchemeKind k);

}  // namespace sdle
