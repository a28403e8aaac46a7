#include "sdle/sde.hpp"

#include <cmath>
#include <numbers>

namespace sdle {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

SdeSystem reduce_to_underlying(const SemiExplicitSdae& s) {
    if (!s.diff_drift || !s.alg_resolver || !s.alg_constraint)
        throw ConfigError("reduce_to_underlying: incomplete SDAE definition");
    const int d = s.diff_dim;
    const int a = s.alg_dim;

    if (a > 0) {
        std::vector<double> xd = s.default_state;
        if (static_cast<int>(xd.size()) != d) xd.assign(d, 0.0);
        std::vector<double> xa(a, 0.0), res(a, 0.0);
        s.alg_resolver(xd, xa);
        s.alg_constraint(xd, xa, res);
        if (norm2(res) > 1e-8)
            throw ResolverInconsistentError(
                "reduce_to_underlying: constraint residual exceeds 1e-8 at the initial state");
    }

    SdeSystem out;
    out.dim = d;
    out.noise_channels = s.noise_channels;

    auto wrap = [d, a, resolver = s.alg_resolver](SemiExplicitSdae::SplitField f) -> VectorField {
        if (a == 0) {
            return [f](std::span<const double> x, std::span<double> o) { f(x, {}, o); };
        }
        return [f, resolver, a](std::span<const double> x, std::span<double> o) {
            thread_local std::vector<double> xa;
            xa.assign(static_cast<std::size_t>(a), 0.0);
            resolver(x, xa);
            f(x, xa, o);
        };
    };

    out.drift = wrap(s.diff_drift);
    for (const auto& f : s.diff_diffusions) out.diffusions.push_back(wrap(f));

    out.drift_jacobian =
        s.reduced_drift_jacobian ? s.reduced_drift_jacobian : finite_difference_jacobian(out.drift, d);
    for (int j = 0; j < s.noise_channels; ++j) {
        if (j < static_cast<int>(s.reduced_diffusion_jacobians.size()) && s.reduced_diffusion_jacobians[j])
            out.diffusion_jacobians.push_back(s.reduced_diffusion_jacobians[j]);
        else
            out.diffusion_jacobians.push_back(finite_difference_jacobian(out.diffusions[j], d));
    }
    return out;
}

SdeSystem ou_system(const OuParams& p) {
    if (!(p.alpha > 0.0)) throw ConfigError("ou_system: alpha must be > 0");
    if (!(p.beta >= 0.0)) throw ConfigError("ou_system: beta must be >= 0");
    const double alpha = p.alpha, mu = p.mu, beta = p.beta;

    SdeSystem s;
    s.dim = 1;
    s.noise_channels = 1;
    s.drift = [alpha, mu](std::span<const double> x, std::span<double> o) { o[0] = alpha * (mu - x[0]); };
    s.diffusions.push_back([beta](std::span<const double>, std::span<double> o) { o[0] = beta; });
    s.drift_jacobian = [alpha](std::span<const double>, Matrix& j) { j(0, 0) = -alpha; };
    s.diffusion_jacobians.push_back([](std::span<const double>, Matrix& j) { j(0, 0) = 0.0; });
    return s;
}

double bounded_sin(double eta) { return std::sin(eta); }

double bounded_arctan(double eta) { return (2.0 / std::numbers::pi) * std::atan(eta); }

JacobianField finite_difference_jacobian(VectorField f, int dim) {
    return [f, dim](std::span<const double> x, Matrix& out) {
        thread_local std::vector<double> xp, xm, fp, fm;
        xp.assign(x.begin(), x.end());
        xm.assign(x.begin(), x.end());
        fp.assign(static_cast<std::size_t>(dim), 0.0);
        fm.assign(static_cast<std::size_t>(dim), 0.0);
        for (int j = 0; j < dim; ++j) {
            const double step = 1e-6 * (1.0 + std::abs(x[j]));
            const double xj = x[j];
            xp[j] = xj + step;
            xm[j] = xj - step;
            f(xp, fp);
            f(xm, fm);
            for (int i = 0; i < dim; ++i) out(i, j) = (fp[i] - fm[i]) / (2.0 * step);
            xp[j] = xj;
            xm[j] = xj;
        }
    };
}

double jacobian_consistency_defect(const SdeSystem& s, std::span<const std::vector<double>> states) {
    const int d = s.dim;
    Matrix analytic(d, d), numeric(d, d);
    double worst = 0.0;

    auto check = [&](const JacobianField& jac, const VectorField& field) {
        JacobianField fd = finite_difference_jacobian(field, d);
        for (const auto& x : states) {
            analytic.fill(0.0);
            numeric.fill(0.0);
            jac(x, analytic);
            fd(x, numeric);
            double jmax = 0.0;
            for (double v : analytic.data()) jmax = std::max(jmax, std::abs(v));
            const double scale = std::max(1.0, jmax);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    worst = std::max(worst, std::abs(analytic(i, j) - numeric(i, j)) / scale);
        }
    };

    check(s.drift_jacobian, s.drift);
    for (int j = 0; j < s.noise_channels; ++j) check(s.diffusion_jacobians[j], s.diffusions[j]);
    return worst;
}

}  // namespace sdle
