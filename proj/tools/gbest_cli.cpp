// Benchmark CLI: simulation grid, real-data cross-validation, logit-IBS
// regression analysis and SVG charts. See README.md for examples.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbest/gbest.hpp"

namespace {

struct CommonOpts {
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out;
};

void add_common(CLI::App* app, CommonOpts& opts) {
    app->add_option("--seed", opts.seed, "Master seed for all random streams");
    app->add_option("--jobs", opts.jobs, "Worker threads (output is identical for any value)")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", opts.out, "Output file path");
}

gbest::GridSpec load_spec(const std::string& config_path) {
    if (config_path.empty()) return gbest::GridSpec{};
    return gbest::grid_spec_from_config(gbest::Config::parse_file(config_path));
}

void print_model_summary(const std::vector<gbest::ResultRow>& rows, bool standard_error) {
    struct Agg {
        std::vector<double> values;
        int failures = 0;
    };
    std::vector<std::pair<std::string, Agg>> groups;
    auto find = [&](const std::string& key) -> Agg& {
        for (auto& [k, a] : groups)
            if (k == key) return a;
        groups.emplace_back(key, Agg{});
        return groups.back().second;
    };
    for (const auto& r : rows) {
        Agg& a = find(gbest::ModelSpec{r.model, r.prior_weight}.key());
        if (r.error.empty() && std::isfinite(r.ibs))
            a.values.push_back(r.ibs);
        else
            ++a.failures;
    }
    std::printf("%-22s %8s %8s %10s %10s %5s\n", "model", "mean", "sd",
                standard_error ? "lo(1.96se)" : "q05", standard_error ? "hi(1.96se)" : "q95", "fail");
    for (const auto& [key, agg] : groups) {
        if (agg.values.empty()) {
            std::printf("%-22s %8s %8s %10s %10s %5d\n", key.c_str(), "-", "-", "-", "-", agg.failures);
            continue;
        }
        const auto s = gbest::summarize(agg.values);
        double lo = s.q05, hi = s.q95;
        if (standard_error) {
            const double se = s.sd / std::sqrt(static_cast<double>(agg.values.size()));
            lo = s.mean - 1.96 * se;
            hi = s.mean + 1.96 * se;
        }
        std::printf("%-22s %8.4f %8.4f %10.4f %10.4f %5d\n", key.c_str(), s.mean, s.sd, lo, hi, agg.failures);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GBEST survival-analysis benchmarks"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic survival dataset as CSV");
    CommonOpts sim_opts;
    std::size_t sim_n = 100;
    std::string sim_family = "unif_0_10";
    double sim_cens = 0.1;
    double sim_intercept = 2.0, sim_scale = 0.7;
    std::vector<double> sim_coefs;
    add_common(simulate, sim_opts);
    simulate->add_option("--n", sim_n, "Sample size")->check(CLI::PositiveNumber);
    simulate->add_option("--family", sim_family, "Covariate family: unif_0_10, unif_m1_1, norm_0_1");
    simulate->add_option("--cens", sim_cens, "Target censoring fraction in [0, 0.95]");
    simulate->add_option("--weibull-intercept", sim_intercept, "True AFT intercept");
    simulate->add_option("--weibull-scale", sim_scale, "True AFT scale");
    simulate->add_option("--weibull-coefs", sim_coefs, "True AFT coefficients (sets p)")->delimiter(',');

    // ---- bench -------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "Run benchmark suites");
    bench->require_subcommand(1);

    auto* grid = bench->add_subcommand("grid", "Simulation grid over N, censoring, prior weight and model");
    CommonOpts grid_opts;
    std::string grid_config;
    std::vector<std::size_t> grid_sizes;
    std::vector<double> grid_cens, grid_weights;
    std::vector<std::string> grid_models, grid_priors, grid_families;
    int grid_reps = -1, grid_trees = -1;
    bool grid_timings = false;
    add_common(grid, grid_opts);
    grid->add_option("--config", grid_config, "Config file (see docs/config.md)");
    grid->add_option("--sizes", grid_sizes, "Sample sizes")->delimiter(',');
    grid->add_option("--cens", grid_cens, "Censoring levels")->delimiter(',');
    grid->add_option("--weights", grid_weights, "Prior weights for the gbest models")->delimiter(',');
    grid->add_option("--models", grid_models, "Models: gbest_bsb, gbest_old, cox, rsf")->delimiter(',');
    grid->add_option("--priors", grid_priors, "Prior families: uniform, normal")->delimiter(',');
    grid->add_option("--families", grid_families, "Covariate families")->delimiter(',');
    grid->add_option("--reps", grid_reps, "Replications per setting");
    grid->add_option("--trees", grid_trees, "Trees per ensemble");
    grid->add_flag("--timings", grid_timings,
                   "Record wall-clock runtime_ms (breaks byte-level reproducibility)");

    auto* real = bench->add_subcommand("real", "k-fold cross-validation on a CSV dataset");
    CommonOpts real_opts;
    std::string real_data, real_config;
    std::string real_time_col = "time", real_status_col = "status";
    std::vector<std::string> real_covariates{"treatment", "number", "size"};
    std::vector<std::string> real_models{"gbest_bsb", "rsf", "cox"};
    std::vector<double> real_weights{0.0, 0.1, 0.2};
    std::size_t real_folds = 5;
    int real_trees = -1;
    bool real_timings = false;
    add_common(real, real_opts);
    real->add_option("--data", real_data, "Input CSV file")->required();
    real->add_option("--config", real_config, "Config file (see docs/config.md)");
    real->add_option("--time-col", real_time_col, "Time column name");
    real->add_option("--status-col", real_status_col, "Status column name (1 = event, 0 = censored)");
    real->add_option("--covariates", real_covariates, "Covariate column names")->delimiter(',');
    real->add_option("--folds", real_folds, "Cross-validation folds");
    real->add_option("--models", real_models, "Models to compare")->delimiter(',');
    real->add_option("--weights", real_weights, "Prior weights for the gbest models")->delimiter(',');
    real->add_option("--trees", real_trees, "Trees per ensemble");
    real->add_flag("--timings", real_timings,
                   "Record wall-clock runtime_ms (breaks byte-level reproducibility)");

    // ---- analyze -----------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "Bootstrap linear regression of logit(IBS) on grid factors");
    CommonOpts analyze_opts;
    std::string analyze_results;
    int analyze_reps = 1000;
    add_common(analyze, analyze_opts);
    analyze->add_option("--results", analyze_results, "Results CSV from bench grid")->required();
    analyze->add_option("--bootstrap", analyze_reps, "Bootstrap replications");

    // ---- plot --------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "Mean and interval chart (SVG) from a results CSV");
    CommonOpts plot_opts;
    std::string plot_results, plot_mode = "quantile", plot_title;
    add_common(plot, plot_opts);
    plot->add_option("--results", plot_results, "Results CSV")->required();
    plot->add_option("--mode", plot_mode, "Interval mode: quantile (q05/q95) or stderr (1.96 se)");
    plot->add_option("--title", plot_title, "Chart title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            gbest::SimConfig cfg =
                gbest::SimConfig::defaults(sim_n, gbest::covariate_family_from_string(sim_family), sim_cens);
            cfg.weibull.intercept = sim_intercept;
            cfg.weibull.scale = sim_scale;
            if (!sim_coefs.empty()) {
                cfg.weibull.coefficients = sim_coefs;
                cfg.p = sim_coefs.size();
            }
            const auto data = gbest::simulate_dataset(
                cfg, gbest::RngStream(sim_opts.seed, gbest::stream_label("simulate")));
            if (sim_opts.out.empty())
                gbest::write_csv(std::cout, data);
            else
                gbest::write_csv(sim_opts.out, data);
            std::cerr << "simulated n=" << data.n() << " (" << data.event_count() << " events)\n";
        } else if (grid->parsed()) {
            gbest::GridSpec spec = load_spec(grid_config);
            if (!grid_sizes.empty()) spec.sample_sizes = grid_sizes;
            if (!grid_cens.empty()) spec.censoring_levels = grid_cens;
            if (!grid_weights.empty()) spec.prior_weights = grid_weights;
            if (!grid_models.empty()) spec.models = grid_models;
            if (grid_reps > 0) spec.replications = grid_reps;
            if (grid_trees > 0) spec.trees = grid_trees;
            if (!grid_priors.empty()) {
                spec.priors.clear();
                for (const auto& p : grid_priors) spec.priors.push_back(gbest::prior_family_from_string(p));
            }
            if (!grid_families.empty()) {
                spec.covariate_families.clear();
                for (const auto& f : grid_families)
                    spec.covariate_families.push_back(gbest::covariate_family_from_string(f));
            }
            const auto rows = gbest::run_grid(spec, grid_opts.seed, grid_opts.jobs, grid_timings);
            if (grid_opts.out.empty())
                gbest::write_results_csv(std::cout, rows);
            else
                gbest::write_results_csv(grid_opts.out, rows);
            print_model_summary(rows, false);
        } else if (real->parsed()) {
            gbest::GridSpec spec = load_spec(real_config);
            spec.models = real_models;
            spec.prior_weights = real_weights;
            if (real_trees > 0) spec.trees = real_trees;
            const gbest::CsvSchema schema{real_time_col, real_status_col, real_covariates};
            const auto data = gbest::load_csv(real_data, schema);
            const auto rows =
                gbest::run_real(data, spec, real_folds, real_opts.seed, real_opts.jobs, real_timings);
            if (real_opts.out.empty())
                gbest::write_results_csv(std::cout, rows);
            else
                gbest::write_results_csv(real_opts.out, rows);
            print_model_summary(rows, true);
        } else if (analyze->parsed()) {
            const auto rows = gbest::read_results_csv(analyze_results);
            const auto report = gbest::analyze_regression(
                rows, analyze_reps, gbest::RngStream(analyze_opts.seed, gbest::stream_label("analyze")));
            std::ostringstream table;
            table << "term,coefficient,sd,lower95,upper95\n";
            for (std::size_t i = 0; i < report.terms.size(); ++i) {
                char buf[200];
                std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g\n", report.terms[i].c_str(),
                              report.coefficients[i], report.sd[i], report.lower[i], report.upper[i]);
                table << buf;
            }
            if (analyze_opts.out.empty()) {
                std::cout << table.str();
            } else {
                std::ofstream os(analyze_opts.out);
                if (!os) throw gbest::Error("cannot write '" + analyze_opts.out + "'");
                os << table.str();
            }
            std::cerr << "reference level: " << report.reference_model << "\n";
        } else if (plot->parsed()) {
            const auto rows = gbest::read_results_csv(plot_results);
            gbest::PlotOptions options;
            if (plot_mode == "stderr")
                options.interval = gbest::PlotOptions::Interval::standard_error;
            else if (plot_mode != "quantile")
                throw gbest::Error("plot: --mode must be quantile or stderr");
            if (!plot_title.empty()) options.title = plot_title;
            const std::string svg = gbest::render_ci_plot(rows, options);
            if (plot_opts.out.empty()) {
                std::cout << svg;
            } else {
                std::ofstream os(plot_opts.out);
                if (!os) throw gbest::Error("cannot write '" + plot_opts.out + "'");
                os << svg;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
