#pragma once

#include <functional>
#include <vector>

#include "sdle/errors.hpp"

namespace sdle {

using ScalarFn = std::function<double(double)>;

/// Normalized stationary density of a scalar Ito SDE dx = f0 dt + sigma dw on a
/// truncated support [-X, X]:  p(x) proportional to exp(int_0^x 2 f0/sigma^2) / sigma^2.
/// Stored on a uniform grid after Richardson-style refinement.
struct ScalarStationaryDensity {
    double support = 0.0;          // X
    std::vector<double> grid;      // uniform nodes on [-X, X], even interval count
    std::vector<double> values;    // normalized density at the nodes
    double normalization = 0.0;    // integral of the unnormalized density

    double pdf(double x) const;                      // linear interpolation, 0 outside
    double expectation(const ScalarFn& g) const;     // Simpson on the stored grid
};

/// Builds the density by composite Simpson with successive halving until the
/// relative change drops below 1e-10. Throws NonNormalizableError when the
/// normalization integral is not finite and positive.
ScalarStationaryDensity stationary_density(const ScalarFn& f0, const ScalarFn& sigma2, double support);

/// Grows the support until the unnormalized density at the boundary falls below
/// 1e-14 of its peak value.
double stationary_support_bound(const ScalarFn& f0, const ScalarFn& sigma2, double initial = 8.0);

/// Reference LE of the scalar benchmark SDE dx = (-alpha x + arctan x) dt +
/// sqrt(x^2 + 1) dw, evaluated through the stationary density. Requires
/// alpha > 1/2 so the truncated support captures the polynomial tails.
/// support_override = 0 selects the bound automatically.
double le_reference_example(double alpha, double support_override = 0.0);

/// Analytic LE of geometric Brownian motion: a - b^2 / 2.
double le_reference_gbm(double a, double b);

}  // namespace sdle
