#include "sdle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdle {

namespace {

// Cumulative antiderivative of s on a uniform grid, anchored to zero at the
// middle node: Simpson pairs for even offsets, the 3-point Newton-Cotes half
// panel for odd ones. Requires the interval count to be a multiple of 4.
std::vector<double> cumulative_integral(const std::vector<double>& s, double dx) {
    const int n = static_cast<int>(s.size()) - 1;
    const int mid = n / 2;
    std::vector<double> a(s.size(), 0.0);
    for (int i = mid; i + 2 <= n; i += 2) {
        a[i + 1] = a[i] + dx / 12.0 * (5.0 * s[i] + 8.0 * s[i + 1] - s[i + 2]);
        a[i + 2] = a[i] + dx / 3.0 * (s[i] + 4.0 * s[i + 1] + s[i + 2]);
    }
    for (int i = mid; i - 2 >= 0; i -= 2) {
        a[i - 1] = a[i] - dx / 12.0 * (5.0 * s[i] + 8.0 * s[i - 1] - s[i - 2]);
        a[i - 2] = a[i] - dx / 3.0 * (s[i] + 4.0 * s[i - 1] + s[i - 2]);
    }
    return a;
}

double simpson(const std::vector<double>& v, double dx) {
    const int n = static_cast<int>(v.size()) - 1;
    double s = v[0] + v[n];
    for (int i = 1; i < n; i += 2) s += 4.0 * v[i];
    for (int i = 2; i < n; i += 2) s += 2.0 * v[i];
    return s * dx / 3.0;
}

// Log of the unnormalized density at the nodes of a fresh grid.
struct LogDensityGrid {
    std::vector<double> x;
    std::vector<double> logu;
};

LogDensityGrid log_density_grid(const ScalarFn& f0, const ScalarFn& sigma2, double support, int n) {
    LogDensityGrid g;
    const double dx = 2.0 * support / n;
    g.x.resize(n + 1);
    std::vector<double> integrand(n + 1);
    for (int i = 0; i <= n; ++i) {
        g.x[i] = -support + dx * i;
        const double s2 = sigma2(g.x[i]);
        if (!(s2 > 0.0)) throw NonNormalizableError("stationary_density: sigma^2 must be positive");
        integrand[i] = 2.0 * f0(g.x[i]) / s2;
    }
    g.logu = cumulative_integral(integrand, dx);
    for (int i = 0; i <= n; ++i) g.logu[i] -= std::log(sigma2(g.x[i]));
    return g;
}

}  // namespace

double ScalarStationaryDensity::pdf(double x) const {
    if (x < -support || x > support || grid.size() < 4) return 0.0;
    const double dx = grid[1] - grid[0];
    const int n = static_cast<int>(grid.size()) - 1;
    // cubic Lagrange interpolation on the four nodes around x
    int i = std::clamp(static_cast<int>((x - grid[0]) / dx), 1, n - 2);
    const double t = (x - grid[i]) / dx;  // in [-1, 2] near the clamped ends
    const double vm = values[i - 1], v0 = values[i], v1 = values[i + 1], v2 = values[i + 2];
    const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return std::max(0.0, c0 * vm + c1 * v0 + c2 * v1 + c3 * v2);
}

double ScalarStationaryDensity::expectation(const ScalarFn& g) const {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = values[i] * g(grid[i]);
    return simpson(v, grid[1] - grid[0]);
}

ScalarStationaryDensity stationary_density(const ScalarFn& f0, const ScalarFn& sigma2, double support) {
    if (!(support > 0.0)) throw ConfigError("stationary_density: support must be > 0");

    ScalarStationaryDensity out;
    out.support = support;
    std::vector<double> prev;
    constexpr int kMax = 1 << 21;

    for (int n = 1024; n <= kMax; n *= 2) {
        LogDensityGrid g = log_density_grid(f0, sigma2, support, n);
        const double shift = *std::max_element(g.logu.begin(), g.logu.end());
        std::vector<double> u(g.logu.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(g.logu[i] - shift);
        const double z = simpson(u, g.x[1] - g.x[0]);
        if (!(z > 0.0) || !std::isfinite(z))
            throw NonNormalizableError("stationary_density: normalization integral is not finite");
        for (double& v : u) v /= z;

        double err = std::numeric_limits<double>::infinity();
        if (!prev.empty()) {
            double peak = 0.0, diff = 0.0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                peak = std::max(peak, u[2 * i]);
                diff = std::max(diff, std::abs(u[2 * i] - prev[i]));
            }
            err = diff / peak;
        }
        if (err < 1e-10 || n == kMax) {
            out.grid = std::move(g.x);
            out.values = std::move(u);
            out.normalization = z;
            return out;
        }
        prev = std::move(u);
    }
    throw NonNormalizableError("stationary_density: refinement did not converge");  // unreachable
}

double stationary_support_bound(const ScalarFn& f0, const ScalarFn& sigma2, double initial) {
    double support = std::max(initial, 1.0);
    for (int iter = 0; iter < 40; ++iter) {
        LogDensityGrid g = log_density_grid(f0, sigma2, support, 8192);
        const double peak = *std::max_element(g.logu.begin(), g.logu.end());
        const double edge = std::max(g.logu.front(), g.logu.back());
        if (edge - peak < std::log(1e-14)) return support;
        support *= 2.0;
        if (support > 1e6)
            throw NonNormalizableError("stationary_support_bound: tails do not decay");
    }
    throw NonNormalizableError("stationary_support_bound: tails do not decay");
}

double le_reference_example(double alpha, double support_override) {
    if (!(alpha > 0.5))
        throw NonNormalizableError("le_reference_example: requires alpha > 1/2");
    const ScalarFn f0 = [alpha](double x) { return -alpha * x + std::atan(x); };
    const ScalarFn sigma2 = [](double x) { return x * x + 1.0; };
    const double support =
        support_override > 0.0 ? support_override : stationary_support_bound(f0, sigma2);
    const ScalarStationaryDensity p = stationary_density(f0, sigma2, support);
    // Mean of J0 - J1^2/2 under the stationary law; equals
    // -alpha + (1/2) E[(2 - x^2)/(x^2 + 1)].
    const double integral = p.expectation([](double x) { return (2.0 - x * x) / (x * x + 1.0); });
    return -alpha + 0.5 * integral;
}

double le_reference_gbm(double a, double b) { return a - 0.5 * b * b; }

}  // namespace sdle
