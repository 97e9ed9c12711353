// xmint command line front end: `xmint fit` runs the selection procedure
// on a CSV table and writes a JSON report; `xmint simulate` reproduces
// the synthetic-benchmark grid and writes the summary CSV.
//
// Exit codes: 0 success, 2 bad input (CLI usage, unreadable or malformed
// data, invalid grid values), 3 algorithm failure (degenerate input, no
// null start, solver non-convergence).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmint/xmint.hpp"

namespace {

using nlohmann::json;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level() {
    const char* env = std::getenv("XMINT_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    std::fprintf(stderr, "xmint: ignoring unknown XMINT_LOG value '%s'\n", env);
    return LogLevel::warn;
}

void log_at(LogLevel lvl, const std::string& msg) {
    static const LogLevel threshold = log_level();
    if (lvl <= threshold) std::fprintf(stderr, "xmint: %s\n", msg.c_str());
}

struct FitOptions {
    std::string data_path;
    std::string exposure;
    std::string outcome;
    std::vector<std::string> mediators;
    std::string out_path;
    std::string path_csv_path;
    xmint::PathConfig cfg;
};

struct SimulateOptions {
    std::vector<int> Ns;
    std::vector<int> Vs;
    std::vector<double> ESs;
    int runs = 20;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string dump_dir;
    std::string out_path;
    xmint::PathConfig cfg;
};

void add_config_flags(CLI::App* cmd, xmint::PathConfig& cfg) {
    cmd->set_config("--config", "", "Optional key=value config file; flags override it");
    cmd->add_option("--k", cfg.K, "Number of lambda steps")->capture_default_str();
    cmd->add_option("--zeta", cfg.zeta, "lambda_min / lambda_max ratio")->capture_default_str();
    cmd->add_option("--rho", cfg.glasso.rho, "Graphical lasso penalty")->capture_default_str();
    cmd->add_option("--outer-max-iter", cfg.outer_max_iter, "Alternation cycles per lambda")
        ->capture_default_str();
    cmd->add_option("--outer-tol", cfg.outer_tol, "Outer relative-objective tolerance")
        ->capture_default_str();
    cmd->add_option("--coord-tol", cfg.solver.coord_tol, "Coordinate-descent tolerance")
        ->capture_default_str();
    cmd->add_option("--select-tol", cfg.select_tol, "Nonzero-coefficient tolerance")
        ->capture_default_str();
}

json coefficient_json(const xmint::CoefficientSet& coeffs, const xmint::Dataset& d) {
    json a = json::object(), a0 = json::object(), b1 = json::object(), b2 = json::object();
    for (Eigen::Index v = 0; v < coeffs.V(); ++v) {
        const std::string name = d.mediator_name(v);
        a[name] = coeffs.a[v];
        a0[name] = coeffs.a0[v];
        b1[name] = coeffs.b1[v];
        b2[name] = coeffs.b2[v];
    }
    return json{{"c0", coeffs.c0}, {"c", coeffs.c}, {"a0", a0}, {"a", a},
                {"b1", b1},        {"b2", b2}};
}

json config_json(const xmint::PathConfig& cfg) {
    return json{{"k", cfg.K},
                {"zeta", cfg.zeta},
                {"rho", cfg.glasso.rho},
                {"enlarge_factor", cfg.enlarge_factor},
                {"max_enlarge", cfg.max_enlarge},
                {"outer_max_iter", cfg.outer_max_iter},
                {"outer_tol", cfg.outer_tol},
                {"coord_tol", cfg.solver.coord_tol},
                {"select_tol", cfg.select_tol}};
}

int run_fit(const FitOptions& opt) {
    xmint::Dataset d;
    try {
        const xmint::CsvTable table = xmint::read_csv(opt.data_path);
        d = xmint::dataset_from_table(table, opt.exposure, opt.outcome, opt.mediators);
        xmint::validate(d);
    } catch (const xmint::Error& e) {
        std::fprintf(stderr, "xmint fit: %s\n", e.what());
        return 2;
    }
    log_at(LogLevel::info, "loaded " + std::to_string(d.n()) + " rows, " +
                               std::to_string(d.V()) + " candidate mediators");

    xmint::PathResult res;
    try {
        res = xmint::run_path(d, opt.cfg);
    } catch (const xmint::Error& e) {
        std::fprintf(stderr, "xmint fit: %s\n", e.what());
        return 3;
    }
    const xmint::PathStep& best = res.steps[res.chosen];
    log_at(LogLevel::info, "chose step " + std::to_string(res.chosen + 1) + " of " +
                               std::to_string(res.steps.size()) + ", hbic " +
                               std::to_string(best.hbic));

    const xmint::StandardizedDataset sd = xmint::standardize(d);
    const xmint::CoefficientSet orig = xmint::destandardize_coefficients(best.coeffs, sd);

    json report;
    report["selected_mediators"] = json::array();
    for (int v : best.state.mediators) report["selected_mediators"].push_back(d.mediator_name(v));
    report["selected_interactions"] = json::array();
    for (int v : best.state.interactions)
        report["selected_interactions"].push_back(d.mediator_name(v));
    report["coefficients"] = coefficient_json(orig, d);
    report["coefficients_standardized"] = coefficient_json(best.coeffs, d);
    report["chosen_lambda"] = best.lambda;
    report["hbic"] = best.hbic;
    report["hbic_path"] = json::array();
    for (const xmint::PathStep& s : res.steps)
        report["hbic_path"].push_back(json{{"lambda", s.lambda},
                                           {"hbic", s.hbic},
                                           {"n_mediators", s.state.mediators.size()},
                                           {"n_interactions", s.state.interactions.size()}});
    report["config_echo"] = config_json(res.config_echo);
    report["warnings"] = json::array();
    for (std::size_t k = 0; k < res.steps.size(); ++k)
        if (!res.steps[k].converged)
            report["warnings"].push_back("step " + std::to_string(k + 1) +
                                         " hit the outer iteration cap");

    try {
        xmint::atomic_write_text(opt.out_path, report.dump(2) + "\n");
        if (!opt.path_csv_path.empty()) xmint::write_path_csv(opt.path_csv_path, res);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "xmint fit: %s\n", e.what());
        return 3;
    }

    std::printf("selected %zu mediator(s), %zu interaction(s); report in %s\n",
                best.state.mediators.size(), best.state.interactions.size(),
                opt.out_path.c_str());
    return 0;
}

int run_simulate(const SimulateOptions& opt) {
    for (double es : opt.ESs)
        if (!(es > 0.0)) {
            std::fprintf(stderr, "xmint simulate: ES must be positive, got %g\n", es);
            return 2;
        }
    for (int n : opt.Ns)
        if (n < 3) {
            std::fprintf(stderr, "xmint simulate: N must be at least 3, got %d\n", n);
            return 2;
        }
    for (int v : opt.Vs)
        if (v < 1) {
            std::fprintf(stderr, "xmint simulate: V must be at least 1, got %d\n", v);
            return 2;
        }
    if (opt.runs < 1) {
        std::fprintf(stderr, "xmint simulate: runs must be positive\n");
        return 2;
    }

    xmint::DatasetSink sink;
    if (!opt.dump_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(opt.dump_dir, ec);
        if (ec) {
            std::fprintf(stderr, "xmint simulate: cannot create '%s': %s\n",
                         opt.dump_dir.c_str(), ec.message().c_str());
            return 2;
        }
        const std::string dir = opt.dump_dir;
        sink = [dir](int N, int V, double ES, int run, const xmint::Dataset& d) {
            char name[128];
            std::snprintf(name, sizeof(name), "data_N%d_V%d_ES%g_run%d.csv", N, V, ES, run + 1);
            xmint::write_dataset_csv((std::filesystem::path(dir) / name).string(), d);
        };
    }

    std::vector<xmint::GridRow> table;
    try {
        table = xmint::run_grid(opt.Ns, opt.Vs, opt.ESs, opt.runs, opt.seed, opt.cfg, opt.jobs,
                                sink);
    } catch (const xmint::Error& e) {
        std::fprintf(stderr, "xmint simulate: %s\n", e.what());
        return 3;
    }

    for (const xmint::GridRow& r : table)
        std::printf("N=%d V=%d ES=%g: tpr_med=%.3f fdr_med=%.3f tpr_int=%.3f fdr_int=%.3f "
                    "(%d/%d converged)\n",
                    r.N, r.V, r.ES, r.tpr_med, r.fdr_med, r.tpr_int, r.fdr_int,
                    r.converged_runs, r.runs);

    try {
        xmint::write_grid_csv(opt.out_path, table);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "xmint simulate: %s\n", e.what());
        return 3;
    }
    log_at(LogLevel::info, "grid table written to " + opt.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mediator and exposure-interaction selection for high-dimensional "
                 "mediation models"};
    app.require_subcommand(1);

    FitOptions fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "Run the selection procedure on a CSV table");
    cmd_fit->add_option("--data", fit.data_path, "Input CSV with headered columns")->required();
    cmd_fit->add_option("--exposure", fit.exposure, "Exposure column name")->required();
    cmd_fit->add_option("--outcome", fit.outcome, "Outcome column name")->required();
    cmd_fit->add_option("--mediators", fit.mediators,
                        "Mediator column names (default: all remaining columns)")
        ->delimiter(',');
    cmd_fit->add_option("--out", fit.out_path, "Output JSON report path")->required();
    cmd_fit->add_option("--path-csv", fit.path_csv_path, "Optional HBIC path CSV for plotting");
    add_config_flags(cmd_fit, fit.cfg);

    SimulateOptions sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Reproduce the synthetic benchmark grid");
    cmd_sim->add_option("--N", sim.Ns, "Sample sizes")->required()->delimiter(',');
    cmd_sim->add_option("--V", sim.Vs, "Candidate mediator counts")->required()->delimiter(',');
    cmd_sim->add_option("--ES", sim.ESs, "Effect sizes")->required()->delimiter(',');
    cmd_sim->add_option("--runs", sim.runs, "Runs per grid cell")->required();
    cmd_sim->add_option("--seed", sim.seed, "Base seed; run r uses seed + r")->required();
    cmd_sim->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str();
    cmd_sim->add_option("--dump-data", sim.dump_dir, "Directory for per-run dataset CSVs");
    cmd_sim->add_option("--out", sim.out_path, "Output grid CSV path")->required();
    add_config_flags(cmd_sim, sim.cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (cmd_fit->parsed()) return run_fit(fit);
    return run_simulate(sim);
}
