#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdle/oracle.hpp"

using namespace sdle;

namespace {

// coefficients of the scalar benchmark SDE
ScalarFn example_f0(double alpha) {
    return [alpha](double x) { return -alpha * x + std::atan(x); };
}
const ScalarFn example_sigma2 = [](double x) { return x * x + 1.0; };

}  // namespace

TEST_CASE("OU stationary density matches the Gaussian closed form") {
    const double alpha = 1.0, beta = 0.4;
    const double var = beta * beta / (2.0 * alpha);  // 0.08
    const double sd = std::sqrt(var);
    const ScalarFn f0 = [alpha](double x) { return -alpha * x; };
    const ScalarFn s2 = [beta](double) { return beta * beta; };

    const auto p = stationary_density(f0, s2, 8.0 * sd);
    double worst = 0.0;
    for (double x = -5.0 * sd; x <= 5.0 * sd; x += sd / 7.0) {
        const double gauss = std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
        worst = std::max(worst, std::abs(p.pdf(x) - gauss));
    }
    CHECK(worst < 1e-8);

    // normalized and with the advertised second moment
    CHECK(p.expectation([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(p.expectation([](double x) { return x * x; }) == doctest::Approx(var).epsilon(1e-8));
}

TEST_CASE("benchmark density matches its analytically integrated form") {
    const double alpha = 2.0;
    const double support = stationary_support_bound(example_f0(alpha), example_sigma2);
    const auto p = stationary_density(example_f0(alpha), example_sigma2, support);

    // closed form: p(x) proportional to (1+x^2)^(-alpha-1) exp(arctan(x)^2)
    auto closed = [alpha](double x) {
        return std::pow(1.0 + x * x, -alpha - 1.0) * std::exp(std::atan(x) * std::atan(x));
    };
    const double ratio0 = p.pdf(0.0) / closed(0.0);
    double worst = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.05)
        worst = std::max(worst, std::abs(p.pdf(x) - ratio0 * closed(x)));
    CHECK(worst < 1e-8);
}

TEST_CASE("odd drift gives an even density") {
    const auto p = stationary_density(example_f0(1.5), example_sigma2, 64.0);
    const std::size_t n = p.values.size();
    double peak = 0.0, worst = 0.0;
    for (double v : p.values) peak = std::max(peak, v);
    for (std::size_t i = 0; i < n / 2; ++i)
        worst = std::max(worst, std::abs(p.values[i] - p.values[n - 1 - i]));
    CHECK(worst <= 1e-12 * peak);
}

TEST_CASE("reference LE of the benchmark at alpha = 2 reproduces -1.3385") {
    const double le = le_reference_example(2.0);
    CHECK(std::abs(le - (-1.3385)) < 1e-4);  // printed to 4 decimals
}

TEST_CASE("reference LE is insensitive to support doubling") {
    const double support = stationary_support_bound(example_f0(2.0), example_sigma2);
    const double a = le_reference_example(2.0, support);
    const double b = le_reference_example(2.0, 2.0 * support);
    CHECK(std::abs(a - b) < 1e-6);
}

TEST_CASE("reference LE decreases with alpha and respects the integrand bounds") {
    double prev = 1e300;
    for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
        const double le = le_reference_example(alpha);
        CHECK(le < prev);
        prev = le;
        // integrand (2 - x^2)/(x^2 + 1) lies in (-1, 2]
        CHECK(le > -alpha - 0.5);
        CHECK(le <= -alpha + 1.0);
    }
}

TEST_CASE("le_reference_gbm") {
    CHECK(le_reference_gbm(0.5, 1.0) == doctest::Approx(0.0));
    CHECK(le_reference_gbm(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(le_reference_gbm(-1.0, 0.5) == doctest::Approx(-1.125));
}

TEST_CASE("non-normalizable setups are rejected") {
    CHECK_THROWS_AS(le_reference_example(0.4), NonNormalizableError);
    // growing drift: unnormalizable tails
    const ScalarFn bad = [](double x) { return x; };
    const ScalarFn s2 = [](double) { return 1.0; };
    CHECK_THROWS_AS(stationary_support_bound(bad, s2), NonNormalizableError);
}
