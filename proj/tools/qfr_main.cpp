// qfr: quantile-frontier estimation toolkit
//   estimate  -- fit one frontier estimator to a CSV dataset
//   simulate  -- run Monte Carlo scenarios from a JSON config
//   convert   -- map levels between quantiles and expectiles

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qfr/bridge.hpp"
#include "qfr/csv.hpp"
#include "qfr/dominance.hpp"
#include "qfr/isotonic_estimators.hpp"
#include "qfr/partial_frontier.hpp"
#include "qfr/quantile_estimators.hpp"
#include "qfr/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

struct EstimateArgs {
    std::string method;
    double tau = 0.5;
    std::string input, output, curve;
    std::vector<std::string> x_cols;
    std::string y_col;
    std::string label_col;
    bool log_transform = false;
    int grid_points = 200;
    double calibrate_target = -1.0; // cer/icer: pick tau-tilde by Efron counting
};

void write_value(std::ofstream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
}

double curve_value(const std::string& method, const qfr::FrontierFit& fit,
                   const qfr::Dataset& ds, double tau, double x) {
    const std::vector<double> q{x};
    if (method == "cqr" || method == "cer") return qfr::predict(fit, q);
    if (method == "icqr" || method == "icer") return qfr::predict_step(fit, ds, q);
    if (method == "order-alpha")
        return qfr::predict_order_alpha(ds, qfr::QuantileLevel::quantile(tau), q);
    if (method == "fdh")
        return qfr::predict_order_alpha(ds, qfr::QuantileLevel::quantile(1.0 - 1e-12), q);
    // coa: VRS output hull of the step-one fitted points, evaluated via the
    // translation-equivariant shift when the step-one values are nonpositive
    const qfr::FrontierFit step1 = qfr::fit_order_alpha(ds, qfr::QuantileLevel::quantile(tau));
    const double mn = *std::min_element(step1.fitted.begin(), step1.fitted.end());
    const double shift = mn > 0.0 ? 0.0 : 1.0 - mn;
    std::vector<double> lifted(step1.fitted);
    for (double& v : lifted) v += shift;
    return qfr::dea_hull_value(ds.inputs(), lifted, q) - shift;
}

int run_estimate(const EstimateArgs& args) {
    const bool is_regression = args.method == "cqr" || args.method == "cer" ||
                               args.method == "icqr" || args.method == "icer";
    const bool is_expectile_method = args.method == "cer" || args.method == "icer";
    double tau = args.tau;
    if (args.method == "fdh") tau = 1.0 - 1e-12;
    if ((args.method == "order-alpha" || args.method == "coa") && tau == 1.0)
        tau = 1.0 - 1e-12; // the FDH limit
    if (!(tau > 0.0 && tau < 1.0)) {
        std::fprintf(stderr, "qfr: tau must lie in (0,1)\n");
        return kExitUsage;
    }

    const qfr::Dataset ds =
        qfr::load_dataset(args.input, args.x_cols, args.y_col, args.log_transform, args.label_col);

    qfr::FrontierFit fit = [&]() {
        using qfr::QuantileLevel;
        if (args.method == "cqr") return qfr::fit_cqr(ds, QuantileLevel::quantile(tau));
        if (args.method == "icqr") return qfr::fit_icqr(ds, QuantileLevel::quantile(tau));
        if (is_expectile_method) {
            const qfr::ExpectileEstimator which = args.method == "cer"
                                                      ? qfr::ExpectileEstimator::CER
                                                      : qfr::ExpectileEstimator::ICER;
            if (args.calibrate_target > 0.0) {
                auto [cal, f] = qfr::calibrate_expectile(
                    ds, QuantileLevel::quantile(args.calibrate_target),
                    qfr::default_expectile_grid(), qfr::CalibrationMethod::EfronCount, which);
                std::fprintf(stderr, "qfr: selected tau-tilde %.6f for target quantile %.6f\n",
                             cal.selected_tau_tilde, args.calibrate_target);
                return std::move(f);
            }
            return which == qfr::ExpectileEstimator::CER
                       ? qfr::fit_cer(ds, QuantileLevel::expectile(tau))
                       : qfr::fit_icer(ds, QuantileLevel::expectile(tau));
        }
        if (args.method == "order-alpha" || args.method == "fdh") {
            auto f = qfr::fit_order_alpha(ds, QuantileLevel::quantile(tau));
            if (args.method == "fdh") f.method = qfr::Method::FDH;
            return f;
        }
        return qfr::fit_convexified_order_alpha(ds, QuantileLevel::quantile(tau));
    }();

    std::ofstream out(args.output);
    if (!out) {
        std::fprintf(stderr, "qfr: cannot write '%s'\n", args.output.c_str());
        return kExitData;
    }
    out << "label";
    for (const auto& c : args.x_cols) out << ',' << c;
    out << ',' << args.y_col << ",fitted";
    if (is_regression) {
        out << ",residual_pos,residual_neg,intercept";
        for (std::size_t k = 0; k < ds.d(); ++k) out << ",slope_" << (k + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (ds.has_labels()) out << ds.labels()[i];
        else out << "obs" << (i + 1);
        for (std::size_t k = 0; k < ds.d(); ++k) {
            out << ',';
            write_value(out, ds.x(i, k));
        }
        out << ',';
        write_value(out, ds.y(i));
        out << ',';
        write_value(out, fit.fitted[i]);
        if (is_regression) {
            out << ',';
            write_value(out, fit.residual_pos[i]);
            out << ',';
            write_value(out, fit.residual_neg[i]);
            out << ',';
            write_value(out, (*fit.intercepts)[i]);
            for (std::size_t k = 0; k < ds.d(); ++k) {
                out << ',';
                write_value(out, (*fit.slopes)(i, k));
            }
        }
        out << '\n';
    }

    if (!args.curve.empty()) {
        if (ds.d() != 1) {
            std::fprintf(stderr, "qfr: --curve requires a single input column\n");
            return kExitUsage;
        }
        if (args.grid_points < 2) {
            std::fprintf(stderr, "qfr: --grid-points must be at least 2\n");
            return kExitUsage;
        }
        double lo = ds.x(0, 0), hi = ds.x(0, 0);
        for (std::size_t i = 1; i < ds.n(); ++i) {
            lo = std::min(lo, ds.x(i, 0));
            hi = std::max(hi, ds.x(i, 0));
        }
        std::ofstream cv(args.curve);
        if (!cv) {
            std::fprintf(stderr, "qfr: cannot write '%s'\n", args.curve.c_str());
            return kExitData;
        }
        cv << args.x_cols[0] << ",frontier\n";
        for (int g = 0; g < args.grid_points; ++g) {
            const double x = lo + (hi - lo) * g / (args.grid_points - 1);
            const double v = curve_value(args.method, fit, ds, tau, x);
            write_value(cv, x);
            cv << ',';
            write_value(cv, v);
            cv << '\n';
        }
    }
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& output, int threads,
                 bool full_scale) {
    std::vector<qfr::ScenarioConfig> scenarios = qfr::load_scenarios(config_path);
    if (const char* env = std::getenv("FRONTIER_SEED")) {
        const std::uint64_t seed = std::strtoull(env, nullptr, 10);
        for (auto& s : scenarios) s.base_seed = seed;
    }
    if (!full_scale) {
        for (auto& s : scenarios) {
            const bool heavy = std::any_of(s.estimators.begin(), s.estimators.end(),
                                           [](qfr::Method m) { return is_regression_method(m); });
            if (heavy && s.dgp != qfr::Dgp::Outlier && s.n > 200)
                throw qfr::ConfigError("scenario '" + s.id +
                                       "': n > 200 with regression estimators needs --full-scale");
            if (s.replications > 200) {
                std::fprintf(stderr,
                             "qfr: scenario '%s': capping replications at 200 (desk scale; use "
                             "--full-scale to lift)\n",
                             s.id.c_str());
                s.replications = 200;
            }
        }
    }
    std::vector<qfr::ScenarioResult> results;
    results.reserve(scenarios.size());
    for (const auto& s : scenarios) results.push_back(qfr::run_experiment(s, threads));
    qfr::write_results_csv(output, results);
    return kExitOk;
}

int run_convert(const std::string& direction, const std::string& spec_name, double sigma_v,
                double sigma_u, double level) {
    qfr::ErrorSpec spec = [&]() {
        if (spec_name == "normal") return qfr::ErrorSpec::noise_only(sigma_v);
        if (spec_name == "halfnormal") return qfr::ErrorSpec::inefficiency_only(sigma_u);
        if (spec_name == "composite") return qfr::ErrorSpec::composite(sigma_v, sigma_u);
        throw qfr::DomainError("unknown spec '" + spec_name + "'");
    }();
    double mapped;
    if (direction == "tau-to-expectile")
        mapped = qfr::theoretical_expectile_of_quantile(spec, qfr::QuantileLevel::quantile(level));
    else if (direction == "expectile-to-tau")
        mapped = qfr::quantile_of_theoretical_expectile(spec, qfr::QuantileLevel::expectile(level));
    else
        throw qfr::DomainError("unknown direction '" + direction + "'");
    std::printf("%.6f\n", mapped);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantile-frontier estimation toolkit"};
    app.require_subcommand(1);

    EstimateArgs est;
    CLI::App* cmd_est = app.add_subcommand("estimate", "fit a frontier estimator to a dataset");
    cmd_est->add_option("--method", est.method, "cqr|cer|icqr|icer|order-alpha|coa|fdh")
        ->required()
        ->check(CLI::IsMember({"cqr", "cer", "icqr", "icer", "order-alpha", "coa", "fdh"}));
    cmd_est->add_option("--tau", est.tau,
                        "level: quantile for cqr/icqr/order-alpha/coa, expectile for cer/icer");
    cmd_est->add_option("--input", est.input, "input CSV")->required();
    cmd_est->add_option("--x-cols", est.x_cols, "input column names")->required()->delimiter(',');
    cmd_est->add_option("--y-col", est.y_col, "output column name")->required();
    cmd_est->add_option("--label-col", est.label_col, "observation label column");
    cmd_est->add_flag("--log,!--no-log", est.log_transform, "apply the natural log to x and y");
    cmd_est->add_option("--output", est.output, "per-observation output CSV")->required();
    cmd_est->add_option("--curve", est.curve, "dense frontier curve CSV (d = 1)");
    cmd_est->add_option("--grid-points", est.grid_points, "curve grid size")->default_val(200);
    cmd_est->add_option("--calibrate-target", est.calibrate_target,
                        "cer/icer: choose tau-tilde whose fit hits this quantile level");

    std::string sim_config, sim_output;
    int sim_threads = 1;
    bool full_scale = false;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "run Monte Carlo scenarios");
    cmd_sim->add_option("--config", sim_config, "scenario JSON")->required();
    cmd_sim->add_option("--output", sim_output, "results CSV")->required();
    cmd_sim->add_option("--threads", sim_threads, "worker threads")->default_val(1);
    cmd_sim->add_flag("--full-scale", full_scale, "lift the desk-scale caps");

    std::string direction, spec_name = "normal";
    double sigma_v = 1.0, sigma_u = 1.0, level = 0.5;
    CLI::App* cmd_conv = app.add_subcommand("convert", "quantile <-> expectile level mapping");
    cmd_conv->add_option("--direction", direction, "tau-to-expectile|expectile-to-tau")
        ->required()
        ->check(CLI::IsMember({"tau-to-expectile", "expectile-to-tau"}));
    cmd_conv->add_option("--spec", spec_name, "normal|halfnormal|composite")
        ->check(CLI::IsMember({"normal", "halfnormal", "composite"}));
    cmd_conv->add_option("--sigma-v", sigma_v, "noise scale");
    cmd_conv->add_option("--sigma-u", sigma_u, "inefficiency scale");
    cmd_conv->add_option("--level", level, "level in (0,1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_est->parsed()) return run_estimate(est);
        if (cmd_sim->parsed()) return run_simulate(sim_config, sim_output, sim_threads, full_scale);
        return run_convert(direction, spec_name, sigma_v, sigma_u, level);
    } catch (const qfr::SchemaError& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitData;
    } catch (const qfr::ParseError& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitData;
    } catch (const qfr::DomainError& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitData;
    } catch (const qfr::DimensionError& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitData;
    } catch (const qfr::ConfigError& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitData;
    } catch (const qfr::Error& e) { // solver, estimation, calibration
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qfr: %s\n", e.what());
        return kExitSolver;
    }
}
