#include "sdle/cli.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdle/ensemble.hpp"

namespace sdle {

namespace {

struct Opts {
    std::string model;
    std::string method = "c-em";
    double h = 1e-3;
    double horizon = 1000.0;
    int n = 10;
    std::uint64_t seed = 0;
    std::vector<std::string> set;
    int workers = 0;
    std::string out = "-";
    long long stride = 0;
    std::string timing = "measured";
    std::string config;
    // sweep only
    std::string param;
    double from = 0.0, to = 0.0, step = 0.0;
};

void add_common(CLI::App* sub, Opts& o, bool with_stride) {
    sub->set_help_flag("--help", "print this help and exit");  // frees -h for the step size
    sub->add_option("--model", o.model, "model name (see list-models)")->required();
    sub->add_option("--method", o.method, "d-em | d-mil | c-em | c-mil");
    sub->add_option("--h", o.h, "step size");
    sub->add_option("--T", o.horizon, "time horizon");
    sub->add_option("--n", o.n, "number of realizations");
    sub->add_option("--seed", o.seed, "base seed; realization i uses seed+i");
    sub->add_option("--set", o.set, "model parameter override key=value")->take_all();
    sub->add_option("--workers", o.workers, "worker threads (0 = hardware)");
    sub->add_option("--out", o.out, "output path ('-' = stdout)");
    sub->add_option("--timing", o.timing, "measured | off (off zeroes wall_seconds)");
    sub->add_option("--config", o.config, "key = value configuration file");
    if (with_stride) sub->add_option("--stride", o.stride, "history sample stride in steps");
}

std::pair<LeMethod, SchemeKind> parse_method(const std::string& m) {
    if (m == "d-em") return {LeMethod::DiscreteQr, SchemeKind::EulerMaruyama};
    if (m == "d-mil") return {LeMethod::DiscreteQr, SchemeKind::Milstein};
    if (m == "c-em") return {LeMethod::ContinuousQr, SchemeKind::EulerMaruyama};
    if (m == "c-mil") return {LeMethod::ContinuousQr, SchemeKind::Milstein};
    throw ConfigError("method must be one of d-em, d-mil, c-em, c-mil (got '" + m + "')");
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& set) {
    std::map<std::string, std::string> out;
    for (const auto& kv : set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value (got '" + kv + "')");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Flat `key = value` file; values fill in options the command line left untouched.
void apply_config_file(CLI::App* sub, Opts& o) {
    if (o.config.empty()) return;
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config file '" + o.config + "'");

    std::map<std::string, std::vector<std::string>> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file: expected 'key = value', got '" + t + "'");
        kv[trim(t.substr(0, eq))].push_back(trim(t.substr(eq + 1)));
    }

    auto untouched = [&](const char* flag) {
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        return opt != nullptr && opt->count() == 0;
    };
    auto number = [&](const std::string& key, const std::string& v) -> double {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            throw ConfigError("config file: cannot parse value '" + v + "' for '" + key + "'");
        }
    };

    for (const auto& [key, values] : kv) {
        const std::string& v = values.back();
        if (key == "model") { if (untouched("--model")) o.model = v; }
        else if (key == "method") { if (untouched("--method")) o.method = v; }
        else if (key == "h") { if (untouched("--h")) o.h = number(key, v); }
        else if (key == "T") { if (untouched("--T")) o.horizon = number(key, v); }
        else if (key == "n") { if (untouched("--n")) o.n = static_cast<int>(number(key, v)); }
        else if (key == "seed") { if (untouched("--seed")) o.seed = static_cast<std::uint64_t>(number(key, v)); }
        else if (key == "workers") { if (untouched("--workers")) o.workers = static_cast<int>(number(key, v)); }
        else if (key == "out") { if (untouched("--out")) o.out = v; }
        else if (key == "timing") { if (untouched("--timing")) o.timing = v; }
        else if (key == "stride") { if (untouched("--stride")) o.stride = static_cast<long long>(number(key, v)); }
        else if (key == "param") { if (untouched("--param")) o.param = v; }
        else if (key == "from") { if (untouched("--from")) o.from = number(key, v); }
        else if (key == "to") { if (untouched("--to")) o.to = number(key, v); }
        else if (key == "step") { if (untouched("--step")) o.step = number(key, v); }
        else if (key == "set") {
            if (untouched("--set")) o.set.insert(o.set.end(), values.begin(), values.end());
        } else {
            throw ConfigError("config file: unknown key '" + key + "'");
        }
    }
}

struct Csv {
    explicit Csv(const std::string& path) {
        if (path == "-") {
            f = stdout;
            owned = false;
        } else {
            f = std::fopen(path.c_str(), "wb");
            if (!f) throw ConfigError("cannot open output file '" + path + "'");
            owned = true;
        }
    }
    ~Csv() {
        if (owned && f) std::fclose(f);
    }
    Csv(const Csv&) = delete;
    Csv& operator=(const Csv&) = delete;

    void raw(const std::string& s) { std::fputs(s.c_str(), f); }
    void num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::fputs(buf, f);
    }

    std::FILE* f = nullptr;
    bool owned = false;
};

void write_report_fields(Csv& csv, const EnsembleReport& rep, double wall, int i) {
    csv.num(rep.horizon);
    csv.raw(",");
    csv.num(rep.h);
    csv.raw("," + rep.method + ",");
    csv.raw(std::to_string(rep.n_effective) + ",");
    csv.raw(std::to_string(rep.base_seed) + ",");
    csv.raw(std::to_string(i) + ",");
    csv.num(rep.mean[i]);
    csv.raw(",");
    if (rep.std_dev) csv.num((*rep.std_dev)[i]);
    csv.raw(",");
    if (rep.variance) csv.num((*rep.variance)[i]);
    csv.raw(",");
    if (rep.ci95) csv.num((*rep.ci95)[i].first);
    csv.raw(",");
    if (rep.ci95) csv.num((*rep.ci95)[i].second);
    csv.raw(",");
    if (rep.rel_error_pct) csv.num((*rep.rel_error_pct)[i]);
    csv.raw(",");
    csv.num(wall);
    csv.raw("\n");
}

void warn_failures(const EnsembleReport& rep) {
    if (!rep.failed.empty())
        std::cerr << "warning: " << rep.failed.size() << " of " << rep.n_requested
                  << " realizations failed and were excluded\n";
}

LeRunConfig make_config(const Opts& o) {
    auto [method, scheme] = parse_method(o.method);
    LeRunConfig cfg;
    cfg.method = method;
    cfg.scheme = scheme;
    cfg.h = o.h;
    cfg.horizon = o.horizon;
    return cfg;
}

int cmd_run(const Opts& o) {
    const LeRunConfig cfg = make_config(o);
    const EnsembleReport rep =
        run_ensemble(o.model, parse_overrides(o.set), cfg, o.n, o.seed, o.workers);
    warn_failures(rep);
    const double wall = o.timing == "off" ? 0.0 : rep.wall_seconds;
    Csv csv(o.out);
    csv.raw("T,h,method,n,seed,exponent_index,mean,std,var,ci_low,ci_high,rel_error_pct,wall_seconds\n");
    for (int i = 0; i < rep.dim; ++i) write_report_fields(csv, rep, wall, i);
    return rep.excessive_failures() ? 3 : 0;
}

int cmd_sweep(const Opts& o) {
    if (o.param.empty()) throw ConfigError("sweep: --param is required");
    if (o.to < o.from) throw ConfigError("sweep: --to must be >= --from");
    if (o.to > o.from && !(o.step > 0.0))
        throw ConfigError("sweep: --step must be > 0 for a nontrivial range");

    std::vector<double> values;
    if (o.to == o.from) {
        values.push_back(o.from);
    } else {
        const long long k_max = static_cast<long long>(std::floor((o.to - o.from) / o.step + 1e-9));
        for (long long k = 0; k <= k_max; ++k) values.push_back(o.from + o.step * k);
    }

    const LeRunConfig cfg = make_config(o);
    const auto rows = sweep(o.model, parse_overrides(o.set), cfg, o.param, values, o.n, o.seed,
                            o.workers);
    Csv csv(o.out);
    csv.raw("param,value,T,h,method,n,seed,exponent_index,mean,std,var,ci_low,ci_high,"
            "rel_error_pct,wall_seconds\n");
    bool excessive = false;
    for (const auto& [value, rep] : rows) {
        warn_failures(rep);
        excessive = excessive || rep.excessive_failures();
        const double wall = o.timing == "off" ? 0.0 : rep.wall_seconds;
        for (int i = 0; i < rep.dim; ++i) {
            csv.raw(o.param + ",");
            csv.num(value);
            csv.raw(",");
            write_report_fields(csv, rep, wall, i);
        }
    }
    return excessive ? 3 : 0;
}

int cmd_history(const Opts& o) {
    LeRunConfig cfg = make_config(o);
    const long long n_steps = std::max<long long>(1, std::llround(cfg.horizon / cfg.h));
    long long stride = o.stride > 0 ? o.stride : std::max<long long>(1, n_steps / 1000);
    if (stride < 1) throw ConfigError("history: --stride must be >= 1");
    stride = std::min(stride, n_steps);
    cfg.history_stride = static_cast<int>(std::min<long long>(stride, INT_MAX));

    const BuiltModel m = build_model(o.model, parse_overrides(o.set));
    cfg.x0 = m.x0;
    const EnsembleResult res = run_ensemble_collect(m.system, cfg, o.n, o.seed, o.workers);
    warn_failures(res.report);

    Csv csv(o.out);
    csv.raw("t,realization,exponent_index,lambda\n");
    std::size_t next_failed = 0;
    int realization = 0;
    for (const auto& run : res.runs) {
        while (next_failed < res.report.failed.size() && res.report.failed[next_failed] == realization) {
            ++next_failed;
            ++realization;
        }
        for (const auto& sample : run.history) {
            for (int i = 0; i < run.dim; ++i) {
                csv.num(sample.t);
                csv.raw("," + std::to_string(realization) + "," + std::to_string(i) + ",");
                csv.num(sample.lambda[i]);
                csv.raw("\n");
            }
        }
        ++realization;
    }
    return res.report.excessive_failures() ? 3 : 0;
}

int cmd_list_models() {
    for (const auto& name : model_names()) {
        std::cout << name << "\n";
        for (const auto& [key, value] : model_parameters(name))
            std::cout << "  " << key << " = " << value << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Lyapunov exponents of stochastic differential-algebraic systems"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    Opts o;
    CLI::App* run = app.add_subcommand("run", "Monte Carlo LE estimate, CSV per exponent");
    add_common(run, o, false);
    CLI::App* swp = app.add_subcommand("sweep", "parameter sweep over an arithmetic range");
    add_common(swp, o, false);
    swp->add_option("--param", o.param, "parameter to sweep: rho, h, T, or any model parameter");
    swp->add_option("--from", o.from, "first value");
    swp->add_option("--to", o.to, "last value (inclusive)");
    swp->add_option("--step", o.step, "increment");
    CLI::App* hist = app.add_subcommand("history", "per-realization lambda(t) series");
    add_common(hist, o, true);
    app.add_subcommand("list-models", "registered models and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand("list-models")) return cmd_list_models();
        CLI::App* active = app.got_subcommand("run") ? run : app.got_subcommand("sweep") ? swp : hist;
        apply_config_file(active, o);
        if (o.timing != "measured" && o.timing != "off")
            throw ConfigError("--timing must be 'measured' or 'off'");
        if (o.n < 1) throw ConfigError("--n must be >= 1");
        if (!(o.h > 0.0)) throw ConfigError("--h must be > 0");
        if (!(o.horizon >= o.h)) throw ConfigError("--T must be >= h");

        if (app.got_subcommand("run")) return cmd_run(o);
        if (app.got_subcommand("sweep")) return cmd_sweep(o);
        return cmd_history(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sdle
