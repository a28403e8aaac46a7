#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sdle/linalg.hpp"
#include "sdle/sde.hpp"

namespace sdle {

enum class SchemeKind { EulerMaruyama, Milstein };

/// Gaussian increment stream: dw_j ~ N(0, h), independent across channels and
/// steps. A given (seed, channels, step) triple reproduces the same sequence bit
/// for bit; the generator is fully specified (mt19937_64 + Box-Muller), so runs
/// do not depend on the standard library's distribution implementation.
class WienerStream {
public:
    WienerStream(std::uint64_t seed, int channels, double step);

    /// Fills dw with `channels` increments for one step.
    void next(std::span<double> dw);

    int channels() const { return channels_; }
    double step() const { return h_; }

private:
    double normal();

    std::mt19937_64 rng_;
    int channels_ = 0;
    double h_ = 0.0;
    double sqrt_h_ = 0.0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// One scheme step of the state SDE. Euler-Maruyama: x + f0 h + sum_j f_j dw_j.
/// Milstein adds (1/2)(J_j f_j)(dw_j^2 - h) per channel; exact for one channel or
/// diagonal uncorrelated noise, refused otherwise (MilsteinUnsupportedError).
/// Throws NonFiniteError when the result blows up.
std::vector<double> state_step(const SdeSystem& s, std::span<const double> x, double h,
                               std::span<const double> dw, SchemeKind k);

/// One scheme step of the matrix variational SDE dZ = sum_j J_j(x) Z dw_j, with x
/// the state at the step's start and the same increments as the state step.
/// Milstein uses the commutative linear-noise correction (1/2) J_j^2 Z (dw_j^2 - h).
Matrix transition_step(const SdeSystem& s, std::span<const double> x, const Matrix& z, double h,
                       std::span<const double> dw, SchemeKind k);

/// One scheme step of dQ = sum_j Q T_j(x, Q) dw_j followed by projection back onto
/// the orthogonal group. T_j is the skew-symmetric matrix built from the strictly
/// lower triangle of Q^T J_j Q.
Matrix orthogonal_step(const SdeSystem& s, std::span<const double> x, const Matrix& q, double h,
                       std::span<const double> dw, SchemeKind k);

namespace detail {

/// Preallocated buffers shared by the step routines so engine loops never allocate.
struct StepWorkspace {
    explicit StepWorkspace(const SdeSystem& s);

    std::vector<double> f0;           // drift value
    std::vector<double> fj;           // diffusion value
    std::vector<double> corr;         // Milstein J_j f_j
    std::vector<double> xnew;
    std::vector<Matrix> jac;          // J_0..J_m evaluated at the step start
    Matrix b;                         // Q^T J Q
    Matrix t;                         // skew T matrix
    Matrix tmp;                       // d x d scratch
    Matrix tmp2;
    Matrix znew;
    Matrix qfac;                      // Q factor scratch for projections
};

/// Evaluates J_0..J_m at x into ws.jac.
void eval_jacobians(const SdeSystem& s, std::span<const double> x, StepWorkspace& ws);

/// Requires eval_jacobians for Milstein; writes the stepped state into ws.xnew.
void state_step_into(const SdeSystem& s, std::span<const double> x, double h,
                     std::span<const double> dw, SchemeKind k, StepWorkspace& ws);

/// Uses ws.jac; writes the stepped transition matrix into ws.znew.
void transition_step_into(const SdeSystem& s, const Matrix& z, double h, std::span<const double> dw,
                          SchemeKind k, StepWorkspace& ws);

/// Uses ws.jac; steps q in place (projection included). When b_diag is non-null it
/// receives diag(Q^T J_j Q) for all j, (m+1) x d packed row-major, evaluated at the
/// incoming q -- exactly the coefficients the continuous-QR psi equation needs.
void orthogonal_step_inplace(const SdeSystem& s, Matrix& q, double h, std::span<const double> dw,
                             SchemeKind k, StepWorkspace& ws, double* b_diag = nullptr);

void require_milstein_supported(const SdeSystem& s);

}  // namespace detail

}  // namespace sdle
