#include "sdle/models.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "sdle/oracle.hpp"

namespace sdle {

namespace {

double trig_eval(TrigForm t, double x) { return t == TrigForm::Cos ? std::cos(x) : std::sin(x); }
double trig_deriv(TrigForm t, double x) { return t == TrigForm::Cos ? -std::sin(x) : std::cos(x); }

}  // namespace

SemiExplicitSdae example_sdae(const ExampleParams& p) {
    if (!(p.alpha > 0.0)) throw ConfigError("example_sdae: alpha must be > 0");
    const double alpha = p.alpha;

    SemiExplicitSdae s;
    s.diff_dim = 1;
    s.alg_dim = 1;
    s.noise_channels = 1;
    s.default_state = {0.0};

    s.diff_drift = [](std::span<const double>, std::span<const double> xa, std::span<double> o) {
        o[0] = -xa[0];
    };
    s.diff_diffusions.push_back(
        [](std::span<const double> xd, std::span<const double>, std::span<double> o) {
            o[0] = std::sqrt(xd[0] * xd[0] + 1.0);
        });
    s.alg_constraint = [alpha](std::span<const double> xd, std::span<const double> xa,
                               std::span<double> o) {
        o[0] = -alpha * xd[0] + std::atan(xd[0]) + xa[0];
    };
    s.alg_resolver = [alpha](std::span<const double> xd, std::span<double> xa) {
        xa[0] = alpha * xd[0] - std::atan(xd[0]);
    };
    s.reduced_drift_jacobian = [alpha](std::span<const double> x, Matrix& j) {
        j(0, 0) = -alpha + 1.0 / (1.0 + x[0] * x[0]);
    };
    s.reduced_diffusion_jacobians.push_back([](std::span<const double> x, Matrix& j) {
        j(0, 0) = x[0] / std::sqrt(x[0] * x[0] + 1.0);
    });
    return s;
}

double smib1_equilibrium_angle(const Smib1Params& p) {
    const double c = p.Eprime * p.V / p.Xeq;
    auto g = [&](double delta) { return c * trig_eval(p.trig, delta) + p.PL - p.Pm; };
    double lo = 0.0, hi = std::asin(1.0);  // pi/2
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (glo * ghi > 0.0)
        throw NoEquilibriumError("smib_case1: no deterministic equilibrium in [0, pi/2]");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (glo * gm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    return 0.5 * (lo + hi);
}

SemiExplicitSdae smib_case1(const Smib1Params& p) {
    if (!(p.H > 0.0) || !(p.Xeq > 0.0)) throw ConfigError("smib_case1: H and Xeq must be > 0");
    if (!(p.rho >= 0.0)) throw ConfigError("smib_case1: rho must be >= 0");
    if (!(p.alpha > 0.0) || !(p.beta >= 0.0))
        throw ConfigError("smib_case1: OU parameters out of range");

    const double c = p.Eprime * p.V / p.Xeq;
    const double twoH = 2.0 * p.H;
    const Smib1Params q = p;

    SemiExplicitSdae s;
    s.diff_dim = 3;  // (delta, omega, eta)
    s.alg_dim = 1;   // Pe
    s.noise_channels = 1;

    s.diff_drift = [q, twoH](std::span<const double> xd, std::span<const double> xa,
                             std::span<double> o) {
        o[0] = xd[1] - q.omega_s;
        o[1] = (q.Pm - xa[0] - q.KD * (xd[1] - q.omega_s)) / twoH;
        o[2] = -q.alpha * xd[2];
    };
    s.diff_diffusions.push_back(
        [q](std::span<const double>, std::span<const double>, std::span<double> o) {
            o[0] = 0.0;
            o[1] = 0.0;
            o[2] = q.beta;
        });
    s.alg_constraint = [q, c](std::span<const double> xd, std::span<const double> xa,
                              std::span<double> o) {
        o[0] = c * trig_eval(q.trig, xd[0]) + (q.PL + q.rho * xd[2]) - xa[0];
    };
    s.alg_resolver = [q, c](std::span<const double> xd, std::span<double> xa) {
        xa[0] = c * trig_eval(q.trig, xd[0]) + q.PL + q.rho * xd[2];
    };
    s.reduced_drift_jacobian = [q, c, twoH](std::span<const double> x, Matrix& j) {
        j.fill(0.0);
        j(0, 1) = 1.0;
        j(1, 0) = -c * trig_deriv(q.trig, x[0]) / twoH;  // chain rule through Pe
        j(1, 1) = -q.KD / twoH;
        j(1, 2) = -q.rho / twoH;
        j(2, 2) = -q.alpha;
    };
    s.reduced_diffusion_jacobians.push_back([](std::span<const double>, Matrix& j) { j.fill(0.0); });

    const double delta_star = smib1_equilibrium_angle(p);
    s.default_state = {delta_star, p.omega_s, 0.0};
    return s;
}

Matrix smib1_equilibrium_jacobian(const Smib1Params& p) {
    const SemiExplicitSdae s = smib_case1(p);
    const SdeSystem u = reduce_to_underlying(s);
    Matrix j(3, 3);
    u.drift_jacobian(s.default_state, j);
    return j;
}

namespace {

Matrix smib2_drift_matrix(const Smib2Params& p) {
    // Constant part of the 7x7 drift Jacobian; the (2,3) and (2,6) entries carry
    // the bilinear (eta, dv1) coupling and are patched per state.
    Matrix a(7, 7);
    const double twoH = 2.0 * p.H;
    a(0, 1) = p.omega_s;
    a(1, 0) = -p.K1 / twoH;
    a(1, 1) = -p.KD / twoH;
    a(1, 2) = -p.K2 / twoH;
    a(2, 0) = -p.K3 * p.K4 / p.T3;
    a(2, 2) = -(1.0 + p.K3 * p.K6 * p.KA) / p.T3;
    a(2, 3) = -p.K3 * p.KA / p.T3;
    a(2, 5) = p.K3 * p.KA / p.T3;
    a(3, 0) = -p.K5 / p.TR;
    a(3, 2) = p.K6 / p.TR;
    a(3, 3) = -1.0 / p.TR;
    a(4, 0) = -p.K1 * p.KST;
    a(4, 1) = -p.KD * p.KST;
    a(4, 2) = -p.K2 * p.KST;
    a(4, 4) = -1.0 / p.TW;
    a(5, 0) = -p.K1 * p.KST * p.T1 / p.T2;
    a(5, 1) = -p.KD * p.KST * p.T1 / p.T2;
    a(5, 2) = -p.K2 * p.KST * p.T1 / p.T2;
    a(5, 4) = (p.T1 / p.TW + 1.0) / p.T2;
    a(5, 5) = -1.0 / (p.T2 * p.T2);
    a(6, 6) = -p.alpha;
    return a;
}

}  // namespace

SdeSystem smib_case2(const Smib2Params& p) {
    if (!(p.H > 0.0) || !(p.TR > 0.0) || !(p.T2 > 0.0) || !(p.T3 > 0.0) || !(p.TW > 0.0))
        throw ConfigError("smib_case2: time constants and H must be > 0");
    if (!(p.alpha > 0.0) || !(p.beta >= 0.0) || !(p.rho >= 0.0))
        throw ConfigError("smib_case2: OU parameters out of range");

    const Matrix a = smib2_drift_matrix(p);
    const double twoH = 2.0 * p.H;
    const double gain = p.K3 * p.KA / p.T3;
    const double rho = p.rho;
    const double beta = p.beta;
    const double dTm = p.dTm;
    const double kst = p.KST, t1 = p.T1, t2 = p.T2;

    SdeSystem s;
    s.dim = 7;
    s.noise_channels = 1;
    s.drift = [a, gain, rho, dTm, twoH, kst, t1, t2](std::span<const double> x,
                                                     std::span<double> o) {
        for (int i = 0; i < 7; ++i) {
            double sum = 0.0;
            for (int j = 0; j < 7; ++j) sum += a(i, j) * x[j];
            o[i] = sum;
        }
        o[2] += -gain * rho * x[6] * x[3];  // bilinear transducer error
        o[1] += dTm / twoH;
        o[4] += kst / twoH * dTm;
        o[5] += kst * t1 / (twoH * t2) * dTm;
    };
    s.diffusions.push_back([beta](std::span<const double>, std::span<double> o) {
        for (int i = 0; i < 6; ++i) o[i] = 0.0;
        o[6] = beta;
    });
    s.drift_jacobian = [a, gain, rho](std::span<const double> x, Matrix& j) {
        j = a;
        j(2, 3) = a(2, 3) * (1.0 + rho * x[6]);
        j(2, 6) = -gain * rho * x[3];
    };
    s.diffusion_jacobians.push_back([](std::span<const double>, Matrix& j) { j.fill(0.0); });
    return s;
}

Matrix smib2_deterministic_block(const Smib2Params& p) {
    const Matrix a = smib2_drift_matrix(p);
    Matrix b(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) b(i, j) = a(i, j);
    return b;
}

SdeSystem linear_system(const Matrix& a) {
    if (!a.square()) throw ConfigError("linear_system: matrix must be square");
    SdeSystem s;
    s.dim = a.rows();
    s.noise_channels = 0;
    s.drift = [a](std::span<const double> x, std::span<double> o) {
        const int n = a.rows();
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) sum += a(i, j) * x[j];
            o[i] = sum;
        }
    };
    s.drift_jacobian = [a](std::span<const double>, Matrix& j) { j = a; };
    return s;
}

SdeSystem gbm_system(double a, double b) {
    SdeSystem s;
    s.dim = 1;
    s.noise_channels = 1;
    s.drift = [a](std::span<const double> x, std::span<double> o) { o[0] = a * x[0]; };
    s.diffusions.push_back([b](std::span<const double> x, std::span<double> o) { o[0] = b * x[0]; });
    s.drift_jacobian = [a](std::span<const double>, Matrix& j) { j(0, 0) = a; };
    s.diffusion_jacobians.push_back([b](std::span<const double>, Matrix& j) { j(0, 0) = b; });
    return s;
}

// ---------------------------------------------------------------------------
// registry

namespace {

double parse_double(const std::string& model, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("model '" + model + "': cannot parse value '" + value +
                          "' for parameter '" + key + "'");
    }
}

TrigForm parse_trig(const std::string& value) {
    if (value == "cos" || value == "0") return TrigForm::Cos;
    if (value == "sin" || value == "1") return TrigForm::Sin;
    throw ConfigError("model 'smib1': trig must be 'cos' or 'sin'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

BuiltModel build_example(const std::map<std::string, std::string>& overrides) {
    ExampleParams p;
    for (const auto& [k, v] : overrides) {
        if (k == "alpha")
            p.alpha = parse_double("example", k, v);
        else
            throw ConfigError("model 'example': unknown parameter '" + k + "'");
    }
    const SemiExplicitSdae sdae = example_sdae(p);
    BuiltModel b;
    b.system = reduce_to_underlying(sdae);
    b.x0 = sdae.default_state;
    if (p.alpha > 0.5) b.reference_exponents = std::vector<double>{le_reference_example(p.alpha)};
    return b;
}

BuiltModel build_smib1(const std::map<std::string, std::string>& overrides) {
    Smib1Params p;
    for (const auto& [k, v] : overrides) {
        if (k == "Pm") p.Pm = parse_double("smib1", k, v);
        else if (k == "PL") p.PL = parse_double("smib1", k, v);
        else if (k == "Xeq") p.Xeq = parse_double("smib1", k, v);
        else if (k == "H") p.H = parse_double("smib1", k, v);
        else if (k == "KD") p.KD = parse_double("smib1", k, v);
        else if (k == "omega_s") p.omega_s = parse_double("smib1", k, v);
        else if (k == "V") p.V = parse_double("smib1", k, v);
        else if (k == "Eprime") p.Eprime = parse_double("smib1", k, v);
        else if (k == "alpha") p.alpha = parse_double("smib1", k, v);
        else if (k == "beta") p.beta = parse_double("smib1", k, v);
        else if (k == "rho") p.rho = parse_double("smib1", k, v);
        else if (k == "trig") p.trig = parse_trig(v);
        else throw ConfigError("model 'smib1': unknown parameter '" + k + "'");
    }
    const SemiExplicitSdae sdae = smib_case1(p);
    BuiltModel b;
    b.system = reduce_to_underlying(sdae);
    b.x0 = sdae.default_state;
    return b;
}

BuiltModel build_smib2(const std::map<std::string, std::string>& overrides) {
    Smib2Params p;
    for (const auto& [k, v] : overrides) {
        if (k == "omega_s") p.omega_s = parse_double("smib2", k, v);
        else if (k == "H") p.H = parse_double("smib2", k, v);
        else if (k == "K1") p.K1 = parse_double("smib2", k, v);
        else if (k == "K2") p.K2 = parse_double("smib2", k, v);
        else if (k == "KD") p.KD = parse_double("smib2", k, v);
        else if (k == "K3") p.K3 = parse_double("smib2", k, v);
        else if (k == "K4") p.K4 = parse_double("smib2", k, v);
        else if (k == "K5") p.K5 = parse_double("smib2", k, v);
        else if (k == "K6") p.K6 = parse_double("smib2", k, v);
        else if (k == "KA") p.KA = parse_double("smib2", k, v);
        else if (k == "TR") p.TR = parse_double("smib2", k, v);
        else if (k == "KST") p.KST = parse_double("smib2", k, v);
        else if (k == "T1") p.T1 = parse_double("smib2", k, v);
        else if (k == "T2") p.T2 = parse_double("smib2", k, v);
        else if (k == "T3") p.T3 = parse_double("smib2", k, v);
        else if (k == "TW") p.TW = parse_double("smib2", k, v);
        else if (k == "alpha") p.alpha = parse_double("smib2", k, v);
        else if (k == "beta") p.beta = parse_double("smib2", k, v);
        else if (k == "rho") p.rho = parse_double("smib2", k, v);
        else if (k == "dTm") p.dTm = parse_double("smib2", k, v);
        else throw ConfigError("model 'smib2': unknown parameter '" + k + "'");
    }
    BuiltModel b;
    b.system = smib_case2(p);
    b.x0.assign(7, 0.0);
    return b;
}

}  // namespace

std::vector<std::string> model_names() { return {"example", "smib1", "smib2"}; }

std::map<std::string, std::string> model_parameters(const std::string& name) {
    if (name == "example") {
        return {{"alpha", "2"}};
    }
    if (name == "smib1") {
        Smib1Params p;
        return {{"Pm", fmt(p.Pm)},      {"PL", fmt(p.PL)},        {"Xeq", fmt(p.Xeq)},
                {"H", fmt(p.H)},        {"KD", fmt(p.KD)},        {"omega_s", fmt(p.omega_s)},
                {"V", fmt(p.V)},        {"Eprime", fmt(p.Eprime)},{"alpha", fmt(p.alpha)},
                {"beta", fmt(p.beta)},  {"rho", fmt(p.rho)},      {"trig", "cos"}};
    }
    if (name == "smib2") {
        Smib2Params p;
        return {{"omega_s", fmt(p.omega_s)}, {"H", fmt(p.H)},   {"K1", fmt(p.K1)},
                {"K2", fmt(p.K2)},           {"KD", fmt(p.KD)}, {"K3", fmt(p.K3)},
                {"K4", fmt(p.K4)},           {"K5", fmt(p.K5)}, {"K6", fmt(p.K6)},
                {"KA", fmt(p.KA)},           {"TR", fmt(p.TR)}, {"KST", fmt(p.KST)},
                {"T1", fmt(p.T1)},           {"T2", fmt(p.T2)}, {"T3", fmt(p.T3)},
                {"TW", fmt(p.TW)},           {"alpha", fmt(p.alpha)}, {"beta", fmt(p.beta)},
                {"rho", fmt(p.rho)},         {"dTm", fmt(p.dTm)}};
    }
    throw ConfigError("unknown model '" + name + "'");
}

BuiltModel build_model(const std::string& name, const std::map<std::string, std::string>& overrides) {
    if (name == "example") return build_example(overrides);
    if (name == "smib1") return build_smib1(overrides);
    if (name == "smib2") return build_smib2(overrides);
    throw ConfigError("unknown model '" + name + "'");
}

}  // namespace sdle
