#include "qfr/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <atomic>
#include <thread>

#include "json.hpp"

#include "qfr/isotonic_estimators.hpp"
#include "qfr/partial_frontier.hpp"
#include "qfr/quantile_estimators.hpp"
#include "qfr/stats.hpp"

namespace qfr {

void ScenarioConfig::validate() const {
    if (dgp != Dgp::Outlier && n < 2) throw ConfigError("scenario needs n >= 2");
    if (d < 1) throw ConfigError("scenario needs d >= 1");
    if (!(sigma2 > 0.0) || !(lambda > 0.0)) throw ConfigError("sigma2 and lambda must be positive");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (tau_list.empty()) throw ConfigError("tau_list must be nonempty");
    for (double t : tau_list)
        if (!(t > 0.0 && t < 1.0)) throw ConfigError("tau levels must lie in (0,1)");
    if (estimators.empty()) throw ConfigError("estimator set must be nonempty");
    if (dgp == Dgp::QuadraticMisspec && d != 1)
        throw ConfigError("the quadratic misspecification DGP is univariate");
    if (dgp == Dgp::Outlier && (outlier_regular < 1 || outlier_count < 0))
        throw ConfigError("outlier DGP block sizes invalid");
}

ErrorSpec ScenarioConfig::error_spec() const {
    const auto [su, sv] = sigmas_from(sigma2, lambda);
    switch (error_kind) {
        case ErrorKind::NoiseOnly: return ErrorSpec::noise_only(sv);
        case ErrorKind::InefficiencyOnly: return ErrorSpec::inefficiency_only(su);
        case ErrorKind::Composite: return ErrorSpec::composite(sv, su);
    }
    throw ConfigError("unknown error kind");
}

std::pair<double, double> sigmas_from(double sigma2, double lambda) {
    if (!(sigma2 > 0.0) || !(lambda > 0.0))
        throw DomainError("sigmas_from requires positive arguments");
    const double sigma = std::sqrt(sigma2);
    const double root = std::sqrt(1.0 + lambda * lambda);
    return {sigma * lambda / root, sigma / root};
}

namespace {

constexpr std::uint64_t kStreamStride = 0x9E3779B97F4A7C15ULL;

double cobb_douglas(const Matrix& x, std::size_t i, int d) {
    double f = 1.0;
    for (int k = 0; k < d; ++k)
        f *= std::pow(x(i, static_cast<std::size_t>(k)), 0.8 / static_cast<double>(k + 1));
    return f;
}

double draw_error(Rng& rng, const ScenarioConfig& config, double sigma_u, double sigma_v) {
    switch (config.error_kind) {
        case ErrorKind::NoiseOnly: return rng.normal(sigma_v);
        case ErrorKind::InefficiencyOnly: return -rng.half_normal(sigma_u);
        case ErrorKind::Composite: {
            const double v = rng.normal(sigma_v);
            const double u = rng.half_normal(sigma_u);
            return v - u;
        }
    }
    return 0.0;
}

} // namespace

GeneratedData generate(const ScenarioConfig& config, int replication) {
    config.validate();
    const auto [sigma_u, sigma_v] = sigmas_from(config.sigma2, config.lambda);
    Rng rng(config.base_seed ^ (static_cast<std::uint64_t>(replication) * kStreamStride));

    const int n = config.dgp == Dgp::Outlier ? config.outlier_regular + config.outlier_count
                                             : config.n;
    const int d = config.d;
    Matrix x(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    std::vector<double> y(static_cast<std::size_t>(n));
    std::vector<double> truth_base(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const bool outlier_row = config.dgp == Dgp::Outlier && i >= config.outlier_regular;
        for (int k = 0; k < d; ++k)
            x(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
                outlier_row ? rng.uniform(90.0, 100.0) : rng.uniform(1.0, 10.0);
        double f;
        if (config.dgp == Dgp::QuadraticMisspec) {
            const double xv = x(static_cast<std::size_t>(i), 0);
            f = xv + 0.1 * xv * xv;
        } else {
            f = cobb_douglas(x, static_cast<std::size_t>(i), d);
        }
        truth_base[static_cast<std::size_t>(i)] = f;
        y[static_cast<std::size_t>(i)] = f + draw_error(rng, config, sigma_u, sigma_v);
    }

    GeneratedData out{Dataset(std::move(x), std::move(y)), {}};
    const ErrorSpec spec = config.error_spec();
    for (double t : config.tau_list) {
        const double offset = error_quantile(spec, QuantileLevel::quantile(t));
        std::vector<double> q(truth_base);
        for (double& v : q) v += offset;
        out.true_quantiles.emplace(t, std::move(q));
    }
    return out;
}

std::pair<double, double> mse_bias(std::span<const double> fitted, std::span<const double> truth) {
    if (fitted.size() != truth.size()) throw DimensionError("mse_bias length mismatch");
    if (fitted.empty()) throw DimensionError("mse_bias on empty vectors");
    double se = 0.0, de = 0.0;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
        const double diff = fitted[i] - truth[i];
        se += diff * diff;
        de += diff;
    }
    const double n = static_cast<double>(fitted.size());
    return {se / n, de / n};
}

const CellStats* ScenarioResult::find(Method m, double tau) const {
    for (const auto& row : rows)
        if (row.estimator == m && std::fabs(row.tau - tau) < 1e-12) return &row.stats;
    return nullptr;
}

namespace {

constexpr double kCountThreshold = 1e-6;

// Convexified order-alpha with the documented caller-side shift: the VRS
// output hull is translation equivariant, so shifting outputs above zero,
// convexifying, and shifting back yields the canonical value and equals the
// unshifted estimator whenever that one is defined.
FrontierFit coa_fit_with_shift(const Dataset& dataset, QuantileLevel tau) {
    const double ymin = *std::min_element(dataset.outputs().begin(), dataset.outputs().end());
    if (ymin > 0.0) return fit_convexified_order_alpha(dataset, tau);
    const double shift = 1.0 - ymin;
    std::vector<double> shifted(dataset.outputs());
    for (double& v : shifted) v += shift;
    Matrix x = dataset.inputs();
    const Dataset lifted(std::move(x), std::move(shifted));
    FrontierFit fit = fit_convexified_order_alpha(lifted, tau);
    for (double& v : fit.fitted) v -= shift;
    return fit;
}

struct RepOutcome {
    // per (estimator, tau) in the iteration order of the scenario
    std::vector<double> mse, bias;
    std::vector<char> ok, violated;
    std::vector<double> seconds;
};

struct CellKey {
    Method est;
    double tau;
};

std::vector<CellKey> scenario_cells(const ScenarioConfig& config) {
    std::vector<CellKey> cells;
    for (Method m : config.estimators)
        for (double t : config.tau_list) cells.push_back(CellKey{m, t});
    return cells;
}

RepOutcome run_replication(const ScenarioConfig& config, int rep,
                           const std::map<double, double>& tau_tilde_map) {
    const std::vector<CellKey> cells = scenario_cells(config);
    RepOutcome out;
    out.mse.assign(cells.size(), 0.0);
    out.bias.assign(cells.size(), 0.0);
    out.ok.assign(cells.size(), 0);
    out.violated.assign(cells.size(), 0);
    out.seconds.assign(cells.size(), 0.0);

    const GeneratedData data = generate(config, rep);
    const Dataset& ds = data.dataset;

    std::size_t cell = 0;
    for (Method m : config.estimators) {
        AfriatCache cache;
        for (double t : config.tau_list) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                FrontierFit fit = [&]() -> FrontierFit {
                    switch (m) {
                        case Method::CQR:
                            return fit_cqr(ds, QuantileLevel::quantile(t), &cache);
                        case Method::ICQR:
                            return fit_icqr(ds, QuantileLevel::quantile(t), nullptr, &cache);
                        case Method::CER:
                        case Method::ICER: {
                            const ExpectileEstimator which = m == Method::CER
                                                                 ? ExpectileEstimator::CER
                                                                 : ExpectileEstimator::ICER;
                            if (config.expectile_empirical) {
                                auto [cal, fit] = calibrate_expectile(
                                    ds, QuantileLevel::quantile(t), coarse_expectile_grid(),
                                    CalibrationMethod::EfronCount, which);
                                return std::move(fit);
                            }
                            const double tt = tau_tilde_map.at(t);
                            return which == ExpectileEstimator::CER
                                       ? fit_cer(ds, QuantileLevel::expectile(tt), &cache)
                                       : fit_icer(ds, QuantileLevel::expectile(tt), nullptr,
                                                  &cache);
                        }
                        case Method::OrderAlpha:
                            return fit_order_alpha(ds, QuantileLevel::quantile(t));
                        case Method::ConvexifiedOrderAlpha:
                            return coa_fit_with_shift(ds, QuantileLevel::quantile(t));
                        case Method::FDH:
                            return fit_fdh(ds);
                    }
                    throw EstimationError("unknown estimator");
                }();
                const auto& truth = data.true_quantiles.at(t);
                const auto [mse, bias] = mse_bias(fit.fitted, truth);
                out.mse[cell] = mse;
                out.bias[cell] = bias;
                out.violated[cell] =
                    violation_flag(ds, fit, QuantileLevel::quantile(t), kCountThreshold) ? 1 : 0;
                out.ok[cell] = 1;
            } catch (const Error&) {
                out.ok[cell] = 0; // recorded and excluded
            }
            out.seconds[cell] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            ++cell;
        }
    }
    return out;
}

} // namespace

ScenarioResult run_experiment(const ScenarioConfig& config, int threads) {
    config.validate();

    // tau -> tau-tilde through the error spec, for the expectile estimators
    std::map<double, double> tau_tilde_map;
    const bool needs_map =
        !config.expectile_empirical &&
        std::any_of(config.estimators.begin(), config.estimators.end(),
                    [](Method m) { return m == Method::CER || m == Method::ICER; });
    if (needs_map) {
        const ErrorSpec spec = config.error_spec();
        for (double t : config.tau_list)
            tau_tilde_map[t] =
                theoretical_expectile_of_quantile(spec, QuantileLevel::quantile(t));
    }

    const int reps = config.replications;
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
    if (threads <= 1) {
        for (int r = 0; r < reps; ++r)
            outcomes[static_cast<std::size_t>(r)] =
                run_replication(config, config.rep_offset + r, tau_tilde_map);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= reps) return;
                    outcomes[static_cast<std::size_t>(r)] =
                        run_replication(config, config.rep_offset + r, tau_tilde_map);
                }
            });
        for (auto& th : pool) th.join();
    }

    const std::vector<CellKey> cells = scenario_cells(config);
    ScenarioResult result;
    result.scenario_id = config.id;
    result.replications = reps;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellStats st;
        int ok_count = 0;
        double sum_mse = 0.0, sum_bias = 0.0, sum_viol = 0.0, sum_sec = 0.0;
        for (int r = 0; r < reps; ++r) {
            const RepOutcome& o = outcomes[static_cast<std::size_t>(r)];
            sum_sec += o.seconds[c];
            if (!o.ok[c]) continue;
            ++ok_count;
            sum_mse += o.mse[c];
            sum_bias += o.bias[c];
            sum_viol += o.violated[c];
        }
        st.n_fail = reps - ok_count;
        if (st.n_fail > 0.05 * reps)
            throw EstimationError("scenario '" + config.id + "' aborted: estimator " +
                                  method_name(cells[c].est) + " failed " +
                                  std::to_string(st.n_fail) + "/" + std::to_string(reps) +
                                  " replications");
        if (ok_count > 0) {
            st.mse = sum_mse / ok_count;
            st.bias = sum_bias / ok_count;
            st.violation_rate = sum_viol / ok_count;
            double ss = 0.0;
            for (int r = 0; r < reps; ++r) {
                const RepOutcome& o = outcomes[static_cast<std::size_t>(r)];
                if (!o.ok[c]) continue;
                const double dev = o.mse[c] - st.mse;
                ss += dev * dev;
            }
            st.mse_se = ok_count > 1 ? std::sqrt(ss / (ok_count - 1) / ok_count) : 0.0;
        }
        st.seconds = sum_sec;
        result.rows.push_back(ScenarioResult::Row{cells[c].est, cells[c].tau, st});
    }
    return result;
}

std::vector<WinRateRow> expectile_win_rate(const std::vector<ScenarioResult>& results) {
    struct Pair {
        Method quant, expect;
        const char* family;
    };
    const Pair families[2] = {{Method::CQR, Method::CER, "concavity"},
                              {Method::ICQR, Method::ICER, "monotonicity"}};
    std::vector<WinRateRow> out;
    bool any = false;
    for (const Pair& fam : families) {
        std::map<double, std::pair<int, int>> counts; // tau -> (wins, total)
        for (const auto& res : results) {
            for (const auto& row : res.rows) {
                if (row.estimator != fam.quant) continue;
                const CellStats* e = res.find(fam.expect, row.tau);
                if (!e) {
                    // a quantile cell without its expectile partner: only an
                    // error if the expectile estimator appears elsewhere
                    bool has_expect = false;
                    for (const auto& r2 : res.rows) has_expect |= r2.estimator == fam.expect;
                    if (has_expect)
                        throw DomainError("unpaired scenario in expectile_win_rate: " +
                                          res.scenario_id);
                    continue;
                }
                auto& cnt = counts[row.tau];
                ++cnt.second;
                if (e->mse < row.stats.mse) ++cnt.first;
            }
        }
        for (const auto& [tau, cnt] : counts) {
            any = true;
            out.push_back(WinRateRow{fam.family, tau,
                                     static_cast<double>(cnt.first) / cnt.second, cnt.second});
        }
    }
    if (!any) throw DomainError("expectile_win_rate: no paired quantile/expectile results");
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "cqr") return Method::CQR;
    if (name == "cer") return Method::CER;
    if (name == "icqr") return Method::ICQR;
    if (name == "icer") return Method::ICER;
    if (name == "order-alpha" || name == "order_alpha") return Method::OrderAlpha;
    if (name == "coa") return Method::ConvexifiedOrderAlpha;
    if (name == "fdh") return Method::FDH;
    throw ConfigError("unknown estimator name '" + name + "'");
}

std::vector<ScenarioConfig> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (!doc.contains("scenarios") || !doc["scenarios"].is_array())
        throw ConfigError("config must contain a 'scenarios' array");

    std::vector<ScenarioConfig> out;
    int index = 0;
    for (const auto& js : doc["scenarios"]) {
        const std::string where = "scenarios[" + std::to_string(index) + "]";
        try {
            ScenarioConfig cfg;
            cfg.id = js.value("id", "scenario_" + std::to_string(index));
            cfg.n = js.value("n", 0);
            cfg.d = js.value("d", 1);
            cfg.sigma2 = js.value("sigma2", 1.88);
            cfg.lambda = js.value("lambda", 1.66);
            const std::string ek = js.value("error_spec_kind", "composite");
            if (ek == "composite") cfg.error_kind = ErrorKind::Composite;
            else if (ek == "noise_only") cfg.error_kind = ErrorKind::NoiseOnly;
            else if (ek == "inefficiency_only") cfg.error_kind = ErrorKind::InefficiencyOnly;
            else throw ConfigError("unknown error_spec_kind '" + ek + "'");
            const std::string dg = js.value("dgp", "cobb_douglas");
            if (dg == "cobb_douglas") cfg.dgp = Dgp::CobbDouglas;
            else if (dg == "quadratic_misspec") cfg.dgp = Dgp::QuadraticMisspec;
            else if (dg == "outlier") cfg.dgp = Dgp::Outlier;
            else throw ConfigError("unknown dgp '" + dg + "'");
            if (!js.contains("tau_list")) throw ConfigError("tau_list missing");
            for (double t : js["tau_list"]) cfg.tau_list.push_back(t);
            cfg.replications = js.value("replications", 1);
            cfg.base_seed = js.value("base_seed", static_cast<std::uint64_t>(0));
            if (!js.contains("estimators")) throw ConfigError("estimators missing");
            for (const auto& e : js["estimators"]) cfg.estimators.push_back(parse_method(e));
            const std::string em = js.value("expectile_mode", "theoretical");
            if (em == "theoretical") cfg.expectile_empirical = false;
            else if (em == "empirical") cfg.expectile_empirical = true;
            else throw ConfigError("unknown expectile_mode '" + em + "'");
            cfg.outlier_regular = js.value("outlier_regular", 200);
            cfg.outlier_count = js.value("outlier_count", 3);
            cfg.rep_offset = js.value("rep_offset", 0);
            cfg.validate();
            out.push_back(std::move(cfg));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        ++index;
    }
    if (out.empty()) throw ConfigError("config contains no scenarios");
    return out;
}

void write_results_csv(const std::string& path, const std::vector<ScenarioResult>& results) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write results to '" + path + "'");
    out << "scenario_id,estimator,tau,mse,bias,mse_se,violation_rate,n_fail\n";
    char buf[128];
    for (const auto& res : results) {
        for (const auto& row : res.rows) {
            std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n",
                          res.scenario_id.c_str(), method_name(row.estimator), row.tau,
                          row.stats.mse, row.stats.bias, row.stats.mse_se,
                          row.stats.violation_rate, row.stats.n_fail);
            out << buf;
        }
    }
}

} // namespace qfr
