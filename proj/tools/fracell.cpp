#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracell/experiments.hpp"

namespace fx = fracell::experiments;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fracell::ValidationError("cannot open output file '" + path + "'");
    out << content;
}

void append_oracle_rows(std::vector<fx::ErrorReport>& rows) {
    // one cross-check row per distinct (grid, alpha) pair in the result set
    std::vector<fx::ErrorReport> extra;
    for (const auto& row : rows) {
        bool seen = false;
        for (const auto& o : extra)
            if (o.n1 == row.n1 && o.n2 == row.n2 && o.alpha == row.alpha) seen = true;
        if (seen) continue;
        extra.push_back(fx::oracle_checks(fx::preset_paper_problem(row.n1, row.n2), row.alpha));
    }
    rows.insert(rows.end(), extra.begin(), extra.end());
}

int run_table(int id, const std::string& out_path, const std::string& format, bool verify) {
    fx::Table table = fx::reproduce_table(id);
    std::cout << fx::render_table(table);
    if (verify) append_oracle_rows(table.rows);
    const std::string content = format == "json" ? fx::to_json(table.rows) : fx::to_csv(table.rows);
    if (!out_path.empty()) write_output(out_path, content);
    return 0;
}

int run_solve(const std::string& config_path, const std::string& out_path, bool verify) {
    const fx::FileConfig config = fx::parse_config_file(config_path);
    std::vector<fx::ErrorReport> rows = fx::run_model(config.request);
    if (verify) append_oracle_rows(rows);
    const bool to_stdout = out_path.empty() || out_path == "-";
    write_output(out_path, fx::to_csv(rows));
    if (!to_stdout)
        for (const auto& row : rows)
            std::cout << row.scheme << " component " << row.component << ": eps = " << row.eps
                      << ", eps_A = " << row.eps_a << ", eps_ref = " << row.eps_ref << "\n";
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_path, bool verify) {
    const fx::FileConfig config = fx::parse_config_file(config_path);
    if (config.sweep_steps.empty())
        throw fracell::ValidationError("sweep: config needs sweep.steps with at least 3 entries");

    std::vector<fx::SweepCase> cases;
    const auto alphas = config.sweep_alpha.empty() ? std::vector<fx::Real>{config.request.alpha} : config.sweep_alpha;
    const auto grids = config.sweep_grid.empty() ? std::vector<int>{config.request.n1} : config.sweep_grid;
    const auto thetas = config.sweep_theta.empty() ? std::vector<fx::Real>{config.request.theta} : config.sweep_theta;
    const auto sigmas = config.sweep_sigma.empty()
                            ? std::vector<fx::Real>{config.request.scheme == "two_level" ? config.request.sigma
                                                                                          : config.request.sigma1}
                            : config.sweep_sigma;
    for (fx::Real alpha : alphas)
        for (int grid : grids)
            for (fx::Real theta : thetas)
                for (fx::Real sigma : sigmas) {
                    fx::SweepCase c;
                    c.request = config.request;
                    c.request.alpha = alpha;
                    c.request.n1 = c.request.n2 = grid;
                    c.request.theta = theta;
                    if (c.request.scheme == "two_level")
                        c.request.sigma = sigma;
                    else
                        c.request.sigma1 = c.request.sigma2 = sigma;
                    c.steps_list = config.sweep_steps;
                    cases.push_back(c);
                }

    fx::SweepResult result = fx::convergence_sweep(cases);
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& r = cases[i].request;
        std::cerr << r.scheme << " alpha=" << r.alpha << " grid=" << r.n1 << " theta=" << r.theta
                  << " sigma=" << (r.scheme == "two_level" ? r.sigma : r.sigma1)
                  << ": observed order " << result.orders[i]
                  << (result.monotone[i] ? "" : "  [warning: non-monotone error sequence]") << "\n";
    }
    if (verify) append_oracle_rows(result.rows);
    write_output(out_path, fx::to_csv(result.rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracell: fractional-power elliptic solver experiments"};
    app.require_subcommand(1);

    int table_id = 1;
    std::string table_out, table_format = "csv";
    bool table_verify = false;
    CLI::App* table = app.add_subcommand("table", "reproduce one of the six published tables");
    table->add_option("--id", table_id, "table id, 1..6")->required()->check(CLI::Range(1, 6));
    table->add_option("--out", table_out, "output file (csv/json rows)");
    table->add_option("--format", table_format, "output format")->check(CLI::IsMember({"csv", "json"}));
    table->add_flag("--verify", table_verify, "append oracle cross-check rows");

    std::string solve_config, solve_out = "-";
    bool solve_verify = false;
    CLI::App* solve = app.add_subcommand("solve", "run one configured model-problem solve");
    solve->add_option("--config", solve_config, "flat key=value config file")->required();
    solve->add_option("--out", solve_out, "output CSV path ('-' for stdout)");
    solve->add_flag("--verify", solve_verify, "append oracle cross-check rows");

    std::string sweep_config, sweep_out = "-";
    bool sweep_verify = false;
    CLI::App* sweep = app.add_subcommand("sweep", "convergence sweep over time-step counts");
    sweep->add_option("--config", sweep_config, "flat key=value config file with sweep.* lists")->required();
    sweep->add_option("--out", sweep_out, "output CSV path ('-' for stdout)");
    sweep->add_flag("--verify", sweep_verify, "append oracle cross-check rows");

    try {
        app.parse(argc, argv);
        if (table->parsed()) return run_table(table_id, table_out, table_format, table_verify);
        if (solve->parsed()) return run_solve(solve_config, solve_out, solve_verify);
        if (sweep->parsed()) return run_sweep(sweep_config, sweep_out, sweep_verify);
        return kExitValidation;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    } catch (const fracell::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const fracell::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
}
