#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdle/sde.hpp"

namespace sdle {

/// Scalar benchmark SDAE: one differential and one algebraic variable, reducing to
/// dx = (-alpha x + arctan x) dt + sqrt(x^2 + 1) dw.
struct ExampleParams {
    double alpha = 2.0;  // > 0; > 1/2 for the density oracle
};

enum class TrigForm { Cos, Sin };

/// Single-machine infinite-bus, classical model with a stochastic load. Values in
/// per-unit except omega_s (rad/s) and H (s). `trig` selects the trigonometric
/// function in the power-balance constraint; Cos follows the source formulation,
/// Sin is the conventional swing-equation coupling whose equilibrium in
/// [0, pi/2] is a stable focus.
struct Smib1Params {
    double Pm = 0.8;
    double PL = 0.3;
    double Xeq = 0.8;
    double H = 3.5;
    double KD = 0.4;
    double omega_s = 100.0 * 3.14159265358979323846;  // 2*pi*50
    double V = 1.0;
    double Eprime = 1.05;
    double alpha = 1.0;
    double beta = 0.4;
    double rho = 0.0;
    TrigForm trig = TrigForm::Cos;
};

/// 7-dimensional linearized SMIB with AVR and PSS; the regulator's voltage
/// transducer carries a relative measurement error rho*eta, eta an OU process.
/// State order: (ddelta, domega, dpsi_fd, dv1, dv2, dvs, eta).
struct Smib2Params {
    double omega_s = 120.0 * 3.14159265358979323846;  // 2*pi*60
    double H = 3.0;
    double K1 = 1.591;
    double K2 = 1.50;
    double KD = 0.0;
    double K3 = 0.333;
    double K4 = 1.8;
    double K5 = -0.12;
    double K6 = 0.3;
    double KA = 200.0;
    double TR = 0.02;
    double KST = 9.5;
    double T1 = 0.154;
    double T2 = 0.033;
    double T3 = 1.91;
    double TW = 1.4;
    double alpha = 1.0;
    double beta = 0.4;
    double rho = 0.0;
    double dTm = 0.0;
};

SemiExplicitSdae example_sdae(const ExampleParams& p);
SemiExplicitSdae smib_case1(const Smib1Params& p);
SdeSystem smib_case2(const Smib2Params& p);

/// Deterministic equilibrium angle: root of (E'V/Xeq) trig(delta) + PL - Pm in
/// [0, pi/2]. Throws NoEquilibriumError when no root exists there.
double smib1_equilibrium_angle(const Smib1Params& p);

/// Reduced 3x3 drift Jacobian evaluated at the deterministic equilibrium.
Matrix smib1_equilibrium_jacobian(const Smib1Params& p);

/// The 6x6 deterministic block of the case-2 drift at rho = 0 (eta decoupled).
Matrix smib2_deterministic_block(const Smib2Params& p);

/// Constant-coefficient linear drift dx = A x dt (no noise); test plumbing.
SdeSystem linear_system(const Matrix& a);

/// Scalar geometric Brownian motion dx = a x dt + b x dw; test plumbing.
SdeSystem gbm_system(double a, double b);

/// --- name-based registry used by the CLI and the ensemble layer ---

struct BuiltModel {
    SdeSystem system;
    std::vector<double> x0;
    /// Per-exponent reference values when an oracle is registered (length dim).
    std::optional<std::vector<double>> reference_exponents;
};

std::vector<std::string> model_names();
std::map<std::string, std::string> model_parameters(const std::string& name);  // name -> default

/// Builds a registered model with string-valued parameter overrides
/// (e.g. {"alpha","2"}, {"trig","sin"}). Unknown names or unparsable values
/// throw ConfigError.
BuiltModel build_model(const std::string& name,
                       const std::map<std::string, std::string>& overrides = {});

}  // namespace sdle
