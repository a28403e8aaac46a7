#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sdle/models.hpp"
#include "sdle/sde.hpp"
#include "test_util.hpp"

using namespace sdle;
using namespace testutil;

namespace {

std::vector<double> eval(const VectorField& f, std::vector<double> x, int out_dim) {
    std::vector<double> o(out_dim, 0.0);
    f(x, o);
    return o;
}

}  // namespace

TEST_CASE("reduction of the scalar benchmark SDAE matches its closed form") {
    const SemiExplicitSdae sdae = example_sdae(ExampleParams{2.0});
    const SdeSystem u = reduce_to_underlying(sdae);
    REQUIRE(u.dim == 1);
    REQUIRE(u.noise_channels == 1);

    CHECK(eval(u.drift, {0.0}, 1)[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(eval(u.diffusions[0], {0.0}, 1)[0] == doctest::Approx(1.0));

    std::mt19937_64 rng(42);
    for (int i = 0; i < 50; ++i) {
        const double x = uniform(rng, -3.0, 3.0);
        CHECK(eval(u.drift, {x}, 1)[0] == doctest::Approx(-2.0 * x + std::atan(x)).epsilon(1e-14));
        CHECK(eval(u.diffusions[0], {x}, 1)[0] ==
              doctest::Approx(std::sqrt(x * x + 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("reduction with no algebraic variables is the identity") {
    SemiExplicitSdae s;
    s.diff_dim = 1;
    s.alg_dim = 0;
    s.noise_channels = 1;
    s.default_state = {1.0};
    s.diff_drift = [](std::span<const double> x, std::span<const double>, std::span<double> o) {
        o[0] = 0.5 * x[0];
    };
    s.diff_diffusions.push_back(
        [](std::span<const double> x, std::span<const double>, std::span<double> o) { o[0] = x[0]; });
    s.alg_constraint = [](std::span<const double>, std::span<const double>, std::span<double>) {};
    s.alg_resolver = [](std::span<const double>, std::span<double>) {};

    const SdeSystem u = reduce_to_underlying(s);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const double x = uniform(rng, -2.0, 2.0);
        CHECK(eval(u.drift, {x}, 1)[0] == doctest::Approx(0.5 * x));
        CHECK(eval(u.diffusions[0], {x}, 1)[0] == doctest::Approx(x));
    }
}

TEST_CASE("inconsistent resolvers are rejected") {
    SemiExplicitSdae s = example_sdae(ExampleParams{1.5});
    s.alg_resolver = [](std::span<const double> xd, std::span<double> xa) {
        xa[0] = 1.5 * xd[0];  // drops the arctan term
    };
    s.default_state = {1.0};
    CHECK_THROWS_AS(reduce_to_underlying(s), ResolverInconsistentError);
}

TEST_CASE("finite-difference Jacobians are used when analytic ones are absent") {
    SemiExplicitSdae s = example_sdae(ExampleParams{2.0});
    s.reduced_drift_jacobian = nullptr;
    s.reduced_diffusion_jacobians.clear();
    const SdeSystem u = reduce_to_underlying(s);

    Matrix j(1, 1);
    u.drift_jacobian(std::vector<double>{0.7}, j);
    CHECK(j(0, 0) == doctest::Approx(-2.0 + 1.0 / (1.0 + 0.49)).epsilon(1e-8));
    u.diffusion_jacobians[0](std::vector<double>{0.7}, j);
    CHECK(j(0, 0) == doctest::Approx(0.7 / std::sqrt(1.49)).epsilon(1e-8));
}

TEST_CASE("ou_system fields and stationary variance arithmetic") {
    const SdeSystem ou = ou_system(OuParams{1.0, 0.0, 0.4});
    CHECK(ou.dim == 1);
    CHECK(eval(ou.drift, {0.5}, 1)[0] == doctest::Approx(-0.5));
    CHECK(eval(ou.diffusions[0], {0.5}, 1)[0] == doctest::Approx(0.4));

    Matrix j(1, 1);
    ou.drift_jacobian(std::vector<double>{0.3}, j);
    CHECK(j(0, 0) == doctest::Approx(-1.0));
    ou.diffusion_jacobians[0](std::vector<double>{0.3}, j);
    CHECK(j(0, 0) == doctest::Approx(0.0));

    // stationary variance beta^2 / (2 alpha) = 0.08
    CHECK(0.4 * 0.4 / 2.0 == doctest::Approx(0.08));
    CHECK_THROWS_AS(ou_system(OuParams{0.0, 0.0, 0.4}), ConfigError);
}

TEST_CASE("noise-free OU decays like exp(-alpha t)") {
    const SdeSystem ou = ou_system(OuParams{1.0, 0.0, 0.0});
    const double h = 1e-3;
    double x = 1.0;
    std::vector<double> f(1);
    for (int k = 0; k < 1000; ++k) {
        ou.drift(std::vector<double>{x}, f);
        x += h * f[0];
    }
    CHECK(x == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("bounded perturbation helpers") {
    CHECK(bounded_sin(0.0) == 0.0);
    CHECK(bounded_arctan(0.0) == 0.0);
    CHECK(bounded_sin(std::numbers::pi / 2) == doctest::Approx(1.0));
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const double e = uniform(rng, -50.0, 50.0);
        CHECK(std::abs(bounded_sin(e)) <= 1.0);
        CHECK(std::abs(bounded_arctan(e)) <= 1.0);
        CHECK(bounded_sin(-e) == doctest::Approx(-bounded_sin(e)));
        CHECK(bounded_arctan(-e) == doctest::Approx(-bounded_arctan(e)));
    }
}

TEST_CASE("analytic Jacobians of ou and gbm agree with finite differences") {
    std::mt19937_64 rng(99);
    std::vector<std::vector<double>> states;
    for (int i = 0; i < 100; ++i) states.push_back({uniform(rng, -2.0, 2.0)});
    CHECK(jacobian_consistency_defect(ou_system(OuParams{1.3, 0.2, 0.5}), states) < 1e-5);
    CHECK(jacobian_consistency_defect(gbm_system(0.5, 1.0), states) < 1e-5);
}

TEST_CASE("reduced trajectories keep the algebraic constraint satisfied") {
    // deterministic part only: zero the diffusion and integrate the reduced system
    Smib1Params p;
    p.trig = TrigForm::Sin;
    p.beta = 0.0;
    const SemiExplicitSdae sdae = smib_case1(p);
    const SdeSystem u = reduce_to_underlying(sdae);

    std::vector<double> x = sdae.default_state;
    x[0] += 0.2;  // perturbed start
    std::vector<double> f(3), xa(1), res(1);
    const double h = 1e-3;
    double worst = 0.0;
    for (int k = 0; k < 5000; ++k) {
        u.drift(x, f);
        for (int i = 0; i < 3; ++i) x[i] += h * f[i];
        sdae.alg_resolver(x, xa);
        sdae.alg_constraint(x, xa, res);
        worst = std::max(worst, std::abs(res[0]));
    }
    CHECK(worst <= 1e-8);
}
