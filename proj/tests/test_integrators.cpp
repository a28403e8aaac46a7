#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sdle/integrators.hpp"
#include "sdle/models.hpp"
#include "test_util.hpp"

using namespace sdle;
using namespace testutil;

TEST_CASE("wiener stream is reproducible and seed-sensitive") {
    WienerStream a(123, 2, 1e-3), b(123, 2, 1e-3), c(124, 2, 1e-3);
    std::vector<double> da(2), db(2), dc(2);
    bool any_diff = false;
    for (int k = 0; k < 1000; ++k) {
        a.next(da);
        b.next(db);
        c.next(dc);
        CHECK(da[0] == db[0]);
        CHECK(da[1] == db[1]);
        any_diff = any_diff || da[0] != dc[0];
    }
    CHECK(any_diff);
}

TEST_CASE("wiener increments have the right moments and no serial correlation") {
    const double h = 4e-3;
    WienerStream w(99, 1, h);
    std::vector<double> dw(1);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, lag = 0.0, prev = 0.0;
    for (int k = 0; k < n; ++k) {
        w.next(dw);
        sum += dw[0];
        sum2 += dw[0] * dw[0];
        if (k > 0) lag += dw[0] * prev;
        prev = dw[0];
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(h / n));
    CHECK(var == doctest::Approx(h).epsilon(0.02));
    CHECK(std::abs(lag / n) < 4.0 * h / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("state_step matches the hand-computed scheme formulas") {
    // pure decay, no noise
    Matrix a{{-1.0}};
    const SdeSystem decay = linear_system(a);
    const auto x1 = state_step(decay, std::vector<double>{1.0}, 0.1, {}, SchemeKind::EulerMaruyama);
    CHECK(x1[0] == doctest::Approx(0.9));

    // GBM: a = 0.5, b = 1, x = 1, h = 0.01, dw = 0.05
    const SdeSystem gbm = gbm_system(0.5, 1.0);
    const std::vector<double> dw{0.05};
    const auto em =
        state_step(gbm, std::vector<double>{1.0}, 0.01, dw, SchemeKind::EulerMaruyama);
    CHECK(em[0] == doctest::Approx(1.055).epsilon(1e-14));
    // 1.055 + (1/2) * 1 * (0.05^2 - 0.01)
    const auto mil = state_step(gbm, std::vector<double>{1.0}, 0.01, dw, SchemeKind::Milstein);
    CHECK(mil[0] == doctest::Approx(1.05125).epsilon(1e-14));
}

TEST_CASE("transition_step on constant, zero, and scalar systems") {
    const SdeSystem sys = linear_system(Matrix{{-1.0, 0.0}, {0.0, -2.0}});
    const Matrix z1 = transition_step(sys, std::vector<double>{0.0, 0.0}, Matrix::identity(2), 0.1,
                                      {}, SchemeKind::EulerMaruyama);
    CHECK(z1(0, 0) == doctest::Approx(0.9));
    CHECK(z1(1, 1) == doctest::Approx(0.8));
    CHECK(z1(0, 1) == doctest::Approx(0.0));

    const Matrix z0 = transition_step(sys, std::vector<double>{0.0, 0.0}, Matrix(2, 2), 0.1, {},
                                      SchemeKind::EulerMaruyama);
    CHECK(z0.frobenius_norm() == 0.0);

    const SdeSystem gbm = gbm_system(0.3, 0.7);
    const std::vector<double> dw{0.02};
    const Matrix zg = transition_step(gbm, std::vector<double>{1.0}, Matrix{{1.0}}, 0.01, dw,
                                      SchemeKind::EulerMaruyama);
    CHECK(zg(0, 0) == doctest::Approx(1.0 + 0.3 * 0.01 + 0.7 * 0.02).epsilon(1e-14));
}

TEST_CASE("orthogonal_step is inert without a generator and in one dimension") {
    const SdeSystem zero = linear_system(Matrix(3, 3));
    std::mt19937_64 rng(5);
    const Matrix q = random_orthogonal(rng, 3);
    const Matrix q2 = orthogonal_step(zero, std::vector<double>{0, 0, 0}, q, 1e-2, {},
                                      SchemeKind::EulerMaruyama);
    CHECK((q2 - q).frobenius_norm() < 1e-13);

    const SdeSystem gbm = gbm_system(0.5, 1.0);
    const std::vector<double> dw{0.03};
    const Matrix one = orthogonal_step(gbm, std::vector<double>{1.0}, Matrix{{1.0}}, 1e-2, dw,
                                       SchemeKind::EulerMaruyama);
    CHECK(one(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("orthogonal_step follows a rotation generator to O(h^2) per step") {
    const Matrix gen{{0.0, 1.0}, {-1.0, 0.0}};
    const SdeSystem sys = linear_system(gen);
    const double h = 1e-3;

    Matrix q = Matrix::identity(2);
    const int steps = 1000;
    for (int k = 0; k < steps; ++k)
        q = orthogonal_step(sys, std::vector<double>{0, 0}, q, h, {}, SchemeKind::EulerMaruyama);

    // exact flow of dQ = Q T with T = [[0,1],[-1,0]] is a rotation by angle t
    const double angle = std::atan2(q(0, 1), q(0, 0));
    CHECK(std::abs(angle - steps * h) < 2e-3);
    CHECK(orthogonality_defect(q) <= 1e-12 * 2);
}

TEST_CASE("strong convergence orders on GBM (EM ~ 0.5, Milstein ~ 1.0)") {
    const double a = 0.5, b = 1.0, T = 1.0;
    const int n_paths = 400;
    const int n_fine = 400;  // finest grid: h = 2.5e-3
    const double h_fine = T / n_fine;
    const SdeSystem gbm = gbm_system(a, b);

    std::mt19937_64 rng(20240);
    std::normal_distribution<double> normal(0.0, std::sqrt(h_fine));

    double rms_em[3] = {0, 0, 0}, rms_mil[3] = {0, 0, 0};
    for (int p = 0; p < n_paths; ++p) {
        std::vector<double> fine(n_fine);
        double w_total = 0.0;
        for (auto& v : fine) {
            v = normal(rng);
            w_total += v;
        }
        const double exact = std::exp((a - 0.5 * b * b) * T + b * w_total);

        for (int level = 0; level < 3; ++level) {
            const int group = 1 << (2 - level);  // 4, 2, 1 fine steps per coarse step
            const double h = h_fine * group;
            double x_em = 1.0, x_mil = 1.0;
            for (int k = 0; k < n_fine; k += group) {
                double dw = 0.0;
                for (int j = 0; j < group; ++j) dw += fine[k + j];
                const std::vector<double> dwv{dw};
                x_em = state_step(gbm, std::vector<double>{x_em}, h, dwv,
                                  SchemeKind::EulerMaruyama)[0];
                x_mil =
                    state_step(gbm, std::vector<double>{x_mil}, h, dwv, SchemeKind::Milstein)[0];
            }
            rms_em[level] += (x_em - exact) * (x_em - exact);
            rms_mil[level] += (x_mil - exact) * (x_mil - exact);
        }
    }
    for (int level = 0; level < 3; ++level) {
        rms_em[level] = std::sqrt(rms_em[level] / n_paths);
        rms_mil[level] = std::sqrt(rms_mil[level] / n_paths);
    }
    // levels: h = 1e-2, 5e-3, 2.5e-3; observed order from successive halving
    const double order_em = 0.5 * (std::log2(rms_em[0] / rms_em[1]) + std::log2(rms_em[1] / rms_em[2]));
    const double order_mil =
        0.5 * (std::log2(rms_mil[0] / rms_mil[1]) + std::log2(rms_mil[1] / rms_mil[2]));
    CHECK(std::abs(order_em - 0.5) <= 0.2);
    CHECK(std::abs(order_mil - 1.0) <= 0.2);
}

TEST_CASE("transition matrix reproduces finite-difference flow derivatives") {
    // deterministic nonlinear scalar flow: dx = (-2x + arctan x) dt
    const SemiExplicitSdae sdae = example_sdae(ExampleParams{2.0});
    SdeSystem sys = reduce_to_underlying(sdae);
    sys.noise_channels = 0;
    sys.diffusions.clear();
    sys.diffusion_jacobians.clear();

    const double h = 1e-3, T = 1.0;
    auto flow = [&](double x0, Matrix* z_out) {
        std::vector<double> x{x0};
        Matrix z = Matrix::identity(1);
        for (int k = 0; k < static_cast<int>(T / h); ++k) {
            z = transition_step(sys, x, z, h, {}, SchemeKind::EulerMaruyama);
            x = state_step(sys, x, h, {}, SchemeKind::EulerMaruyama);
        }
        if (z_out) *z_out = z;
        return x[0];
    };

    Matrix z(1, 1);
    const double base = flow(0.4, &z);
    double err[2];
    const double eps[2] = {1e-2, 1e-3};
    for (int i = 0; i < 2; ++i) err[i] = std::abs(z(0, 0) * eps[i] - (flow(0.4 + eps[i], nullptr) - base));
    CHECK(err[0] / err[1] > 30.0);   // ~quadratic in eps
    CHECK(err[0] / err[1] < 300.0);
    CHECK(err[1] < 1e-5);
}

TEST_CASE("orthogonality never degrades over 1e5 projected steps") {
    // matrix linear SDE with a genuinely noisy generator
    std::mt19937_64 rng(314);
    const int d = 4;
    const Matrix a0 = random_matrix(rng, d, -1.0, 1.0);
    const Matrix b0 = random_matrix(rng, d, -0.5, 0.5);
    SdeSystem sys;
    sys.dim = d;
    sys.noise_channels = 1;
    sys.drift = [a0, d](std::span<const double> x, std::span<double> o) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += a0(i, j) * x[j];
            o[i] = s;
        }
    };
    sys.diffusions.push_back([b0, d](std::span<const double> x, std::span<double> o) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += b0(i, j) * x[j];
            o[i] = s;
        }
    });
    sys.drift_jacobian = [a0](std::span<const double>, Matrix& j) { j = a0; };
    sys.diffusion_jacobians.push_back([b0](std::span<const double>, Matrix& j) { j = b0; });

    WienerStream w(4711, 1, 1e-3);
    std::vector<double> dw(1);
    std::vector<double> x(d, 0.1);
    Matrix q = Matrix::identity(d);
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        w.next(dw);
        const Matrix qn = orthogonal_step(sys, x, q, 1e-3, dw, SchemeKind::EulerMaruyama);
        q = qn;
        worst = std::max(worst, orthogonality_defect(q));
        x = state_step(sys, x, 1e-3, dw, SchemeKind::EulerMaruyama);
    }
    CHECK(worst <= 1e-12 * d);
}

TEST_CASE("milstein refuses correlated multi-channel noise") {
    SdeSystem s = gbm_system(0.1, 0.2);
    s.noise_channels = 2;
    s.diffusions.push_back(s.diffusions[0]);
    s.diffusion_jacobians.push_back(s.diffusion_jacobians[0]);
    const std::vector<double> dw{0.01, 0.02};
    CHECK_THROWS_AS(state_step(s, std::vector<double>{1.0}, 1e-2, dw, SchemeKind::Milstein),
                    MilsteinUnsupportedError);
    s.diagonal_noise = true;  // declared uncorrelated: accepted
    CHECK_NOTHROW(state_step(s, std::vector<double>{1.0}, 1e-2, dw, SchemeKind::Milstein));
}

TEST_CASE("blow-up raises NonFiniteError") {
    SdeSystem s;
    s.dim = 1;
    s.noise_channels = 0;
    s.drift = [](std::span<const double> x, std::span<double> o) { o[0] = x[0] * x[0]; };
    s.drift_jacobian = [](std::span<const double> x, Matrix& j) { j(0, 0) = 2.0 * x[0]; };

    std::vector<double> x{2.0};
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 60; ++k) x = state_step(s, x, 1.0, {}, SchemeKind::EulerMaruyama);
        }(),
        NonFiniteError);
}
