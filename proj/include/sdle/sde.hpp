#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sdle/linalg.hpp"

namespace sdle {

/// Evaluates a vector field into a caller-provided buffer (no allocation on hot paths).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
/// Fills a preallocated d x d Jacobian at x.
using JacobianField = std::function<void(std::span<const double> x, Matrix& out)>;

/// d-dimensional Ito SDE  dx = f0(x) dt + sum_j f_j(x) dw_j  with the Jacobian of
/// every field available for the variational equation. Evaluations must be pure
/// and reentrant; systems are treated as immutable once built.
struct SdeSystem {
    int dim = 0;
    int noise_channels = 0;
    VectorField drift;                                // f0
    std::vector<VectorField> diffusions;              // f1..fm
    JacobianField drift_jacobian;                     // J0
    std::vector<JacobianField> diffusion_jacobians;   // J1..Jm
    /// Channels act on distinct components with no cross-dependence; this is what
    /// licenses the Milstein correction for m > 1.
    bool diagonal_noise = false;
};

/// Semi-explicit strangeness-free SDAE: noise enters only the differential part,
/// and the algebraic constraint is solvable in closed form by `alg_resolver`.
struct SemiExplicitSdae {
    int diff_dim = 0;
    int alg_dim = 0;
    int noise_channels = 0;

    using SplitField =
        std::function<void(std::span<const double> xd, std::span<const double> xa, std::span<double> out)>;

    SplitField diff_drift;                            // -> length diff_dim
    std::vector<SplitField> diff_diffusions;          // -> length diff_dim each
    SplitField alg_constraint;                        // -> length alg_dim, zero on solutions
    std::function<void(std::span<const double> xd, std::span<double> xa)> alg_resolver;

    /// Differential components of the model's default initial state.
    std::vector<double> default_state;

    /// Analytic total Jacobians of the reduced system (chain rule through the
    /// resolver included). Finite differences are substituted when absent.
    JacobianField reduced_drift_jacobian;
    std::vector<JacobianField> reduced_diffusion_jacobians;
};

/// Ornstein-Uhlenbeck parameters: d eta = alpha (mu - eta) dt + beta dw,
/// stationary law N(mu, beta^2 / (2 alpha)).
struct OuParams {
    double alpha = 1.0;  // mean-reversion rate, > 0
    double mu = 0.0;     // long-run mean
    double beta = 0.0;   // noise intensity, >= 0
};

/// Substitutes the resolver into the differential equations, producing the
/// underlying SDE on the differential variables only. Throws
/// ResolverInconsistentError when the constraint residual at the default state
/// exceeds 1e-8.
SdeSystem reduce_to_underlying(const SemiExplicitSdae& s);

/// 1-d OU process as an SdeSystem (J0 = [-alpha], J1 = [0]).
SdeSystem ou_system(const OuParams& p);

double bounded_sin(double eta);     // sin(eta), in [-1, 1]
double bounded_arctan(double eta);  // (2/pi) arctan(eta), in [-1, 1]

/// Central finite-difference Jacobian of f with per-component step 1e-6 (1 + |x_i|).
JacobianField finite_difference_jacobian(VectorField f, int dim);

/// Largest entrywise defect between the declared Jacobians and finite differences
/// of the fields over the given states, relative to max(1, ||J||_max). Model
/// validation helper used by the property tests.
double jacobian_consistency_defect(const SdeSystem& s, std::span<const std::vector<double>> states);

}  // namespace sdle
