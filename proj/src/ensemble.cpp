#include "sdle/ensemble.hpp"

#include <atomic>
#include <cstdio>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace sdle {

bool EnsembleReport::excessive_failures() const {
    return n_requested > 0 && failed.size() * 20 > static_cast<std::size_t>(n_requested);
}

namespace {

int resolve_workers(int workers, int n) {
    int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (w < 1) w = 1;
    return std::min(w, std::max(1, n));
}

EnsembleResult run_impl(const SdeSystem& s, const LeRunConfig& cfg, int n, std::uint64_t base_seed,
                        int workers, const std::optional<std::vector<double>>& oracle,
                        bool keep_runs) {
    if (n < 1) throw ConfigError("run_ensemble: n must be >= 1");
    const auto t_start = std::chrono::steady_clock::now();

    std::vector<std::optional<LeAccumulator>> runs(static_cast<std::size_t>(n));
    std::vector<char> failed_flag(static_cast<std::size_t>(n), 0);
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr fatal;

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            LeRunConfig c = cfg;
            c.seed = base_seed + static_cast<std::uint64_t>(i);
            try {
                runs[i] = run_le(s, c);
            } catch (const NonFiniteError&) {
                failed_flag[i] = 1;
            } catch (const RankDeficientError&) {
                failed_flag[i] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!fatal) fatal = std::current_exception();
                return;
            }
        }
    };

    const int w = resolve_workers(workers, n);
    if (w == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (int i = 0; i < w; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    EnsembleResult out;
    EnsembleReport& rep = out.report;
    rep.horizon = cfg.horizon;
    rep.h = cfg.h;
    rep.method = method_label(cfg.method, cfg.scheme);
    rep.n_requested = n;
    rep.base_seed = base_seed;
    rep.dim = s.dim;

    std::vector<std::vector<double>> samples;  // [realization][exponent], descending
    for (int i = 0; i < n; ++i) {
        if (failed_flag[i] || !runs[i]) {
            rep.failed.push_back(i);
            continue;
        }
        samples.push_back(runs[i]->exponents());
        if (keep_runs) out.runs.push_back(std::move(*runs[i]));
    }
    rep.n_effective = static_cast<int>(samples.size());
    if (rep.n_effective == 0) throw NonFiniteError("run_ensemble: every realization failed");

    const int d = s.dim;
    const int ne = rep.n_effective;
    rep.mean.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        // identical realizations (deterministic models) report the exact value
        bool all_equal = true;
        for (const auto& v : samples) all_equal = all_equal && v[i] == samples[0][i];
        if (all_equal) {
            rep.mean[i] = samples[0][i];
            continue;
        }
        double sum = 0.0;
        for (const auto& v : samples) sum += v[i];
        rep.mean[i] = sum / ne;
    }

    if (ne >= 2) {
        std::vector<double> var(d, 0.0);
        for (const auto& v : samples)
            for (int i = 0; i < d; ++i) {
                const double dlt = v[i] - rep.mean[i];
                var[i] += dlt * dlt;
            }
        std::vector<double> sd(d, 0.0);
        std::vector<std::pair<double, double>> ci(d);
        for (int i = 0; i < d; ++i) {
            var[i] /= (ne - 1);
            sd[i] = std::sqrt(var[i]);
            const double half = 1.96 * sd[i] / std::sqrt(static_cast<double>(ne));
            ci[i] = {rep.mean[i] - half, rep.mean[i] + half};
        }
        rep.std_dev = std::move(sd);
        rep.variance = std::move(var);
        rep.ci95 = std::move(ci);
    }

    if (oracle && static_cast<int>(oracle->size()) == d) {
        std::vector<double> rel(d, 0.0);
        bool ok = true;
        for (int i = 0; i < d; ++i) {
            const double ref = (*oracle)[i];
            if (std::abs(ref) < 1e-300) {
                ok = false;
                break;
            }
            rel[i] = 100.0 * std::abs(rep.mean[i] - ref) / std::abs(ref);
        }
        if (ok) rep.rel_error_pct = std::move(rel);
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

}  // namespace

EnsembleReport run_ensemble(const SdeSystem& s, const LeRunConfig& cfg, int n,
                            std::uint64_t base_seed, int workers,
                            const std::optional<std::vector<double>>& oracle) {
    return run_impl(s, cfg, n, base_seed, workers, oracle, false).report;
}

EnsembleResult run_ensemble_collect(const SdeSystem& s, const LeRunConfig& cfg, int n,
                                    std::uint64_t base_seed, int workers,
                                    const std::optional<std::vector<double>>& oracle) {
    return run_impl(s, cfg, n, base_seed, workers, oracle, true);
}

EnsembleReport run_ensemble(const std::string& model,
                            const std::map<std::string, std::string>& overrides, LeRunConfig cfg,
                            int n, std::uint64_t base_seed, int workers) {
    const BuiltModel m = build_model(model, overrides);
    cfg.x0 = m.x0;
    return run_impl(m.system, cfg, n, base_seed, workers, m.reference_exponents, false).report;
}

std::vector<std::pair<double, EnsembleReport>> sweep(
    const std::string& model, const std::map<std::string, std::string>& overrides,
    const LeRunConfig& cfg, const std::string& param, std::span<const double> values, int n,
    std::uint64_t base_seed, int workers) {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    // Validate the parameter name up front so a typo fails before any work.
    if (param != "h" && param != "T") {
        const auto known = model_parameters(model);
        if (!known.count(param))
            throw ConfigError("sweep: parameter '" + param + "' is not a parameter of model '" +
                              model + "' (nor h or T)");
    }

    std::vector<std::pair<double, EnsembleReport>> out;
    out.reserve(values.size());
    for (const double v : values) {
        LeRunConfig c = cfg;
        auto ov = overrides;
        if (param == "h") {
            c.h = v;
        } else if (param == "T") {
            c.horizon = v;
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            ov[param] = buf;
        }
        out.emplace_back(v, run_ensemble(model, ov, c, n, base_seed, workers));
    }
    return out;
}

ConvergenceSeries convergence_stats(std::span<const LeAccumulator> runs) {
    if (runs.empty()) throw ConfigError("convergence_stats: no runs");
    const std::size_t nt = runs[0].history.size();
    if (nt == 0) throw MismatchedGridsError("convergence_stats: runs carry no history");
    const int d = runs[0].dim;

    for (const auto& r : runs) {
        if (r.history.size() != nt || r.dim != d)
            throw MismatchedGridsError("convergence_stats: histories differ in shape");
        for (std::size_t k = 0; k < nt; ++k)
            if (std::abs(r.history[k].t - runs[0].history[k].t) > 1e-12)
                throw MismatchedGridsError("convergence_stats: histories sampled at different times");
    }

    ConvergenceSeries out;
    out.t.resize(nt);
    out.mean.assign(nt, std::vector<double>(d, 0.0));
    out.variance.assign(nt, std::vector<double>(d, 0.0));
    const double n = static_cast<double>(runs.size());

    std::vector<double> sorted(d);
    for (std::size_t k = 0; k < nt; ++k) {
        out.t[k] = runs[0].history[k].t;
        for (const auto& r : runs) {
            sorted.assign(r.history[k].lambda.begin(), r.history[k].lambda.end());
            std::sort(sorted.begin(), sorted.end(), std::greater<double>());
            for (int i = 0; i < d; ++i) out.mean[k][i] += sorted[i];
        }
        for (int i = 0; i < d; ++i) out.mean[k][i] /= n;
        for (const auto& r : runs) {
            sorted.assign(r.history[k].lambda.begin(), r.history[k].lambda.end());
            std::sort(sorted.begin(), sorted.end(), std::greater<double>());
            for (int i = 0; i < d; ++i) {
                const double dlt = sorted[i] - out.mean[k][i];
                out.variance[k][i] += dlt * dlt;
            }
        }
        if (runs.size() > 1)
            for (int i = 0; i < d; ++i) out.variance[k][i] /= (n - 1.0);
    }
    return out;
}

}  // namespace sdle
