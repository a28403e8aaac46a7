#include "sdle/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sdle {

std::vector<double> LeAccumulator::raw_exponents() const {
    if (!(t > 0.0)) throw Error("LeAccumulator: no elapsed time");
    std::vector<double> v(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) v[i] = psi[i] / t;
    return v;
}

std::vector<double> LeAccumulator::exponents() const {
    auto v = raw_exponents();
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
}

double LeAccumulator::tail_slope(int exponent_index) const {
    if (exponent_index < 0 || exponent_index >= dim) throw Error("tail_slope: bad exponent index");
    const double t0 = 0.9 * t;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& s : history) {
        if (s.t < t0) continue;
        const double y = s.lambda[exponent_index];
        sx += s.t;
        sy += y;
        sxx += s.t * s.t;
        sxy += s.t * y;
        ++n;
    }
    if (n < 2) throw Error("tail_slope: needs at least two history samples in the last 10%");
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw Error("tail_slope: degenerate time grid");
    return (n * sxy - sx * sy) / denom;
}

const char* method_label(LeMethod m, SchemeKind k) {
    if (m == LeMethod::DiscreteQr)
        return k == SchemeKind::EulerMaruyama ? "d-em" : "d-mil";
    return k == SchemeKind::EulerMaruyama ? "c-em" : "c-mil";
}

namespace {

void validate(const SdeSystem& s, const LeRunConfig& cfg) {
    if (s.dim < 1) throw ConfigError("run: system dimension must be >= 1");
    if (static_cast<int>(s.diffusions.size()) != s.noise_channels ||
        static_cast<int>(s.diffusion_jacobians.size()) != s.noise_channels)
        throw ConfigError("run: diffusion/jacobian count does not match noise_channels");
    if (!(cfg.h > 0.0)) throw ConfigError("run: h must be > 0");
    if (!(cfg.horizon >= cfg.h)) throw ConfigError("run: T must be >= h");
    if (cfg.reorth_every < 1) throw ConfigError("run: reorth_every must be >= 1");
    if (static_cast<int>(cfg.x0.size()) != s.dim) throw ConfigError("run: x0 size mismatch");
    if (cfg.v0 && (!cfg.v0->square() || cfg.v0->rows() != s.dim))
        throw ConfigError("run: v0 must be dim x dim");
    if (cfg.scheme == SchemeKind::Milstein) detail::require_milstein_supported(s);
}

long long step_count(const LeRunConfig& cfg) {
    return std::max<long long>(1, std::llround(cfg.horizon / cfg.h));
}

struct NoObserver {
    void operator()(const detail::StepWorkspace&, std::span<const double>, double) const {}
};

/// Accumulates log|det Phi| by the Ito Liouville identity along the path.
struct LiouvilleObserver {
    int channels = 0;
    double logdet = 0.0;

    void operator()(const detail::StepWorkspace& ws, std::span<const double> dw, double h) {
        logdet += ws.jac[0].trace() * h;
        for (int j = 1; j <= channels; ++j) {
            const Matrix& jj = ws.jac[j];
            const int d = jj.rows();
            double tr = 0.0, tr2 = 0.0;
            for (int i = 0; i < d; ++i) {
                tr += jj(i, i);
                for (int l = 0; l < d; ++l) tr2 += jj(i, l) * jj(l, i);
            }
            logdet += tr * dw[j - 1] - 0.5 * tr2 * h;
        }
    }
};

void seed_from_v0(const LeRunConfig& cfg, Matrix& frame, std::vector<double>& psi) {
    Matrix r0 = *cfg.v0;
    qr_signfix_inplace(r0, frame);
    for (int i = 0; i < r0.rows(); ++i) psi[i] = std::log(r0(i, i));
}

template <class Obs>
LeAccumulator discrete_core(const SdeSystem& s, const LeRunConfig& cfg, Obs&& obs) {
    validate(s, cfg);
    const int d = s.dim;
    const long long n_steps = step_count(cfg);

    WienerStream wiener(cfg.seed, s.noise_channels, cfg.h);
    detail::StepWorkspace ws(s);
    std::vector<double> dw(static_cast<std::size_t>(s.noise_channels), 0.0);
    std::vector<double> x = cfg.x0;

    LeAccumulator acc;
    acc.dim = d;
    acc.psi.assign(d, 0.0);

    Matrix z = Matrix::identity(d);
    Matrix qscratch(d, d);
    if (cfg.v0) seed_from_v0(cfg, z, acc.psi);  // z starts from Q0, psi from log diag R0

    int pending = 0;
    for (long long step = 0; step < n_steps; ++step) {
        wiener.next(dw);
        detail::eval_jacobians(s, x, ws);
        obs(ws, dw, cfg.h);

        detail::transition_step_into(s, z, cfg.h, dw, cfg.scheme, ws);
        std::swap(z, ws.znew);
        detail::state_step_into(s, x, cfg.h, dw, cfg.scheme, ws);
        std::swap(x, ws.xnew);

        ++pending;
        const bool at_end = (step + 1 == n_steps);
        if (pending == cfg.reorth_every || at_end) {
            qr_signfix_inplace(z, qscratch);  // z -> R, qscratch -> Q
            for (int i = 0; i < d; ++i) acc.psi[i] += std::log(z(i, i));
            std::swap(z, qscratch);
            pending = 0;
        }
        if (cfg.history_stride > 0 && ((step + 1) % cfg.history_stride == 0 || at_end)) {
            const double t = static_cast<double>(step + 1) * cfg.h;
            LeSample sample{t, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
            if (pending > 0) {
                Matrix rr = z, qq(d, d);
                qr_signfix_inplace(rr, qq);
                for (int i = 0; i < d; ++i) sample.lambda[i] = (acc.psi[i] + std::log(rr(i, i))) / t;
            } else {
                for (int i = 0; i < d; ++i) sample.lambda[i] = acc.psi[i] / t;
            }
            if (acc.history.empty() || acc.history.back().t < t) acc.history.push_back(std::move(sample));
        }
    }
    acc.t = static_cast<double>(n_steps) * cfg.h;
    return acc;
}

template <class Obs>
LeAccumulator continuous_core(const SdeSystem& s, const LeRunConfig& cfg, Obs&& obs) {
    validate(s, cfg);
    const int d = s.dim;
    const int m = s.noise_channels;
    const long long n_steps = step_count(cfg);

    WienerStream wiener(cfg.seed, m, cfg.h);
    detail::StepWorkspace ws(s);
    std::vector<double> dw(static_cast<std::size_t>(m), 0.0);
    std::vector<double> bdiag(static_cast<std::size_t>(m + 1) * d, 0.0);
    std::vector<double> x = cfg.x0;

    LeAccumulator acc;
    acc.dim = d;
    acc.psi.assign(d, 0.0);

    Matrix q = Matrix::identity(d);
    if (cfg.v0) seed_from_v0(cfg, q, acc.psi);

    for (long long step = 0; step < n_steps; ++step) {
        wiener.next(dw);
        detail::eval_jacobians(s, x, ws);
        obs(ws, dw, cfg.h);

        detail::orthogonal_step_inplace(s, q, cfg.h, dw, cfg.scheme, ws, bdiag.data());
        // psi uses the diagonals of B_j at the step's start, like the state update
        for (int i = 0; i < d; ++i) {
            double dpsi = bdiag[i] * cfg.h;
            for (int j = 1; j <= m; ++j) {
                const double bii = bdiag[static_cast<std::size_t>(j) * d + i];
                dpsi += bii * dw[j - 1] - 0.5 * bii * bii * cfg.h;
            }
            acc.psi[i] += dpsi;
            if (!std::isfinite(acc.psi[i])) throw NonFiniteError("continuous_qr_run: psi blow-up");
        }
        detail::state_step_into(s, x, cfg.h, dw, cfg.scheme, ws);
        std::swap(x, ws.xnew);

        if (cfg.history_stride > 0 && ((step + 1) % cfg.history_stride == 0 || step + 1 == n_steps)) {
            const double t = static_cast<double>(step + 1) * cfg.h;
            LeSample sample{t, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
            for (int i = 0; i < d; ++i) sample.lambda[i] = acc.psi[i] / t;
            if (acc.history.empty() || acc.history.back().t < t) acc.history.push_back(std::move(sample));
        }
    }
    acc.t = static_cast<double>(n_steps) * cfg.h;
    return acc;
}

}  // namespace

LeAccumulator discrete_qr_run(const SdeSystem& s, const LeRunConfig& cfg) {
    if (cfg.method != LeMethod::DiscreteQr)
        throw ConfigError("discrete_qr_run: cfg.method is not DiscreteQr");
    return discrete_core(s, cfg, NoObserver{});
}

LeAccumulator continuous_qr_run(const SdeSystem& s, const LeRunConfig& cfg) {
    if (cfg.method != LeMethod::ContinuousQr)
        throw ConfigError("continuous_qr_run: cfg.method is not ContinuousQr");
    return continuous_core(s, cfg, NoObserver{});
}

LeAccumulator run_le(const SdeSystem& s, const LeRunConfig& cfg) {
    return cfg.method == LeMethod::DiscreteQr ? discrete_core(s, cfg, NoObserver{})
                                              : continuous_core(s, cfg, NoObserver{});
}

double liouville_check(const SdeSystem& s, const LeRunConfig& cfg) {
    LiouvilleObserver obs{s.noise_channels, 0.0};
    const LeAccumulator acc = cfg.method == LeMethod::DiscreteQr ? discrete_core(s, cfg, obs)
                                                                 : continuous_core(s, cfg, obs);
    double sum = 0.0;
    for (double p : acc.psi) sum += p;
    return std::abs((sum - obs.logdet) / acc.t);
}

}  // namespace sdle
