#include "sdle/integrators.hpp"

#include <cmath>
#include <numbers>

namespace sdle {

namespace {

// splitmix64 scramble so that consecutive trajectory seeds start the generator
// in well-separated states.
std::uint64_t scramble(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

WienerStream::WienerStream(std::uint64_t seed, int channels, double step)
    : rng_(scramble(seed)), channels_(channels), h_(step), sqrt_h_(std::sqrt(step)) {
    if (!(step > 0.0)) throw ConfigError("WienerStream: step must be > 0");
    if (channels < 0) throw ConfigError("WienerStream: negative channel count");
}

double WienerStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on explicitly constructed uniforms: u1 in (0,1], u2 in [0,1).
    const double u1 = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

void WienerStream::next(std::span<double> dw) {
    for (int j = 0; j < channels_; ++j) dw[j] = sqrt_h_ * normal();
}

namespace detail {

StepWorkspace::StepWorkspace(const SdeSystem& s)
    : f0(s.dim, 0.0),
      fj(s.dim, 0.0),
      corr(s.dim, 0.0),
      xnew(s.dim, 0.0),
      jac(static_cast<std::size_t>(s.noise_channels) + 1, Matrix(s.dim, s.dim)),
      b(s.dim, s.dim),
      t(s.dim, s.dim),
      tmp(s.dim, s.dim),
      tmp2(s.dim, s.dim),
      znew(s.dim, s.dim),
      qfac(s.dim, s.dim) {}

void require_milstein_supported(const SdeSystem& s) {
    if (s.noise_channels > 1 && !s.diagonal_noise)
        throw MilsteinUnsupportedError(
            "Milstein: multi-channel noise requires structurally diagonal channels");
}

void eval_jacobians(const SdeSystem& s, std::span<const double> x, StepWorkspace& ws) {
    ws.jac[0].fill(0.0);
    s.drift_jacobian(x, ws.jac[0]);
    for (int j = 0; j < s.noise_channels; ++j) {
        ws.jac[j + 1].fill(0.0);
        s.diffusion_jacobians[j](x, ws.jac[j + 1]);
    }
}

void state_step_into(const SdeSystem& s, std::span<const double> x, double h,
                     std::span<const double> dw, SchemeKind k, StepWorkspace& ws) {
    const int d = s.dim;
    s.drift(x, ws.f0);
    for (int i = 0; i < d; ++i) ws.xnew[i] = x[i] + h * ws.f0[i];
    for (int j = 0; j < s.noise_channels; ++j) {
        s.diffusions[j](x, ws.fj);
        for (int i = 0; i < d; ++i) ws.xnew[i] += dw[j] * ws.fj[i];
        if (k == SchemeKind::Milstein) {
            // (1/2) (J_j f_j)(dw_j^2 - h); jacobians already evaluated at x
            const Matrix& jj = ws.jac[j + 1];
            for (int i = 0; i < d; ++i) {
                double sum = 0.0;
                for (int l = 0; l < d; ++l) sum += jj(i, l) * ws.fj[l];
                ws.corr[i] = sum;
            }
            const double w = 0.5 * (dw[j] * dw[j] - h);
            for (int i = 0; i < d; ++i) ws.xnew[i] += w * ws.corr[i];
        }
    }
    for (int i = 0; i < d; ++i)
        if (!std::isfinite(ws.xnew[i])) throw NonFiniteError("state_step: trajectory blow-up");
}

void transition_step_into(const SdeSystem& s, const Matrix& z, double h, std::span<const double> dw,
                          SchemeKind k, StepWorkspace& ws) {
    ws.znew = z;
    matmul_add(ws.jac[0], z, h, ws.znew);
    for (int j = 0; j < s.noise_channels; ++j) {
        matmul_add(ws.jac[j + 1], z, dw[j], ws.znew);
        if (k == SchemeKind::Milstein) {
            matmul(ws.jac[j + 1], z, ws.tmp);
            matmul_add(ws.jac[j + 1], ws.tmp, 0.5 * (dw[j] * dw[j] - h), ws.znew);
        }
    }
    if (!ws.znew.all_finite()) throw NonFiniteError("transition_step: blow-up");
}

void orthogonal_step_inplace(const SdeSystem& s, Matrix& q, double h, std::span<const double> dw,
                             SchemeKind k, StepWorkspace& ws, double* b_diag) {
    const int d = s.dim;
    const bool milstein = (k == SchemeKind::Milstein);
    ws.t.fill(0.0);
    if (milstein) ws.qfac.fill(0.0);

    for (int j = 0; j <= s.noise_channels; ++j) {
        matmul(ws.jac[j], q, ws.tmp);
        matmul_tn(q, ws.tmp, ws.b);  // B_j = Q^T J_j Q
        if (b_diag) {
            for (int i = 0; i < d; ++i) b_diag[static_cast<std::size_t>(j) * d + i] = ws.b(i, i);
        }
        const double coef = (j == 0) ? h : dw[j - 1];
        for (int i = 1; i < d; ++i) {
            for (int l = 0; l < i; ++l) {
                const double bl = ws.b(i, l);  // strictly lower part drives the rotation
                ws.t(i, l) += coef * bl;
                ws.t(l, i) -= coef * bl;
            }
        }
        if (milstein && j >= 1) {
            // (1/2) Q T_j T_j (dw_j^2 - h) with T_j frozen over the step
            ws.tmp2.fill(0.0);
            for (int i = 1; i < d; ++i) {
                for (int l = 0; l < i; ++l) {
                    ws.tmp2(i, l) = ws.b(i, l);
                    ws.tmp2(l, i) = -ws.b(i, l);
                }
            }
            matmul(q, ws.tmp2, ws.tmp);
            matmul_add(ws.tmp, ws.tmp2, 0.5 * (dw[j - 1] * dw[j - 1] - h), ws.qfac);
        }
    }

    ws.znew = q;
    matmul_add(q, ws.t, 1.0, ws.znew);
    if (milstein) ws.znew += ws.qfac;
    if (!ws.znew.all_finite()) throw NonFiniteError("orthogonal_step: blow-up");
    qr_signfix_inplace(ws.znew, q);
}

}  // namespace detail

std::vector<double> state_step(const SdeSystem& s, std::span<const double> x, double h,
                               std::span<const double> dw, SchemeKind k) {
    if (static_cast<int>(x.size()) != s.dim) throw ConfigError("state_step: state size mismatch");
    if (static_cast<int>(dw.size()) != s.noise_channels)
        throw ConfigError("state_step: increment count mismatch");
    if (k == SchemeKind::Milstein) detail::require_milstein_supported(s);
    detail::StepWorkspace ws(s);
    if (k == SchemeKind::Milstein) detail::eval_jacobians(s, x, ws);
    detail::state_step_into(s, x, h, dw, k, ws);
    return ws.xnew;
}

Matrix transition_step(const SdeSystem& s, std::span<const double> x, const Matrix& z, double h,
                       std::span<const double> dw, SchemeKind k) {
    if (!z.square() || z.rows() != s.dim) throw ConfigError("transition_step: bad matrix shape");
    if (k == SchemeKind::Milstein) detail::require_milstein_supported(s);
    detail::StepWorkspace ws(s);
    detail::eval_jacobians(s, x, ws);
    detail::transition_step_into(s, z, h, dw, k, ws);
    return ws.znew;
}

Matrix orthogonal_step(const SdeSystem& s, std::span<const double> x, const Matrix& q, double h,
                       std::span<const double> dw, SchemeKind k) {
    if (!q.square() || q.rows() != s.dim) throw ConfigError("orthogonal_step: bad matrix shape");
    if (orthogonality_defect(q) > 1e-10 * s.dim)
        throw ConfigError("orthogonal_step: input frame is not orthogonal");
    if (k == SchemeKind::Milstein) detail::require_milstein_supported(s);
    detail::StepWorkspace ws(s);
    detail::eval_jacobians(s, x, ws);
    Matrix out = q;
    detail::orthogonal_step_inplace(s, out, h, dw, k, ws);
    return out;
}

}  // namespace sdle
