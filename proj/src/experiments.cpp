#include "fracell/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fracell::experiments {

namespace {

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_value(Real v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_fixed(Real v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
}

// Run a batch of independent jobs, at most hardware_concurrency at a time,
// results ordered by index.
template <typename Job>
std::vector<std::vector<ErrorReport>> run_parallel(const std::vector<Job>& jobs) {
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::vector<ErrorReport>> results(jobs.size());
    std::size_t next = 0;
    while (next < jobs.size()) {
        const std::size_t batch = std::min(workers, jobs.size() - next);
        std::vector<std::future<std::vector<ErrorReport>>> futures;
        futures.reserve(batch);
        for (std::size_t k = 0; k < batch; ++k)
            futures.push_back(std::async(std::launch::async, [&jobs, i = next + k] { return run_model(jobs[i]); }));
        for (std::size_t k = 0; k < batch; ++k) results[next + k] = futures[k].get();
        next += batch;
    }
    return results;
}

}  // namespace

ModelProblem preset_paper_problem(int n1, int n2) {
    ModelProblem problem;
    problem.grid = Grid2D<Real>(1.0, 1.0, n1, n2);
    problem.coeff = CoefficientField<Real>::constant(problem.grid, 1.0, 0.0);
    problem.a1 = assemble_direction_operator(problem.grid, problem.coeff, 1);
    problem.a2 = assemble_direction_operator(problem.grid, problem.coeff, 2);
    problem.a = make_full_operator(problem.a1, problem.a2);
    problem.delta1 = spectral_lower_bound(problem.grid, problem.coeff, 1);
    problem.delta2 = spectral_lower_bound(problem.grid, problem.coeff, 2);
    problem.delta = problem.delta1 + problem.delta2;
    const Real pi = EIGEN_PI;
    problem.f = GridFunction<Real>::sample(problem.grid, [pi](Real x1, Real x2) {
        return std::sin(pi * x1) * std::sin(pi * x2) + std::sin(3 * pi * x1) * std::sin(2 * pi * x2);
    });
    return problem;
}

FullOperator<Real> pseudo_time_operator(const ModelProblem& problem, Real theta) {
    warn_if_semidefinite_shift(theta);
    return make_full_operator(problem.a1, problem.a2, theta * problem.delta);
}

SplittingSetup<Real> splitting_setup(const ModelProblem& problem, Real alpha, Real theta, Real sigma1, Real sigma2,
                                     int steps) {
    return make_splitting_setup<Real>({problem.a1, problem.a2}, {problem.delta1, problem.delta2}, alpha, theta, sigma1,
                                      sigma2, steps);
}

void RunRequest::validate() const {
    if (scheme != "two_level" && scheme != "splitting")
        throw ValidationError("run: scheme must be two_level or splitting");
    if (n1 < 2 || n2 < 2) throw ValidationError("run: grid subdivisions must be >= 2");
    if (l1 != Real(1) || l2 != Real(1)) throw ValidationError("run: the paper preset is defined on the unit square");
    if (steps < 1) throw ValidationError("run: steps must be >= 1");
    if (!(alpha > 0) || alpha > 1) throw ValidationError("run: alpha must lie in (0, 1]");
    if (!(theta > 0) || theta > 1) throw ValidationError("run: theta must lie in (0, 1]");
    if (!(solver_tol > 0)) throw ValidationError("run: solver tolerance must be positive");
}

ErrorReport compute_errors(const GridFunction<Real>& y, Real alpha, const ModelProblem& problem,
                           const GridFunction<Real>& reference) {
    const GridFunction<Real> u = exact_continuous_solution(problem.grid, alpha);
    GridFunction<Real> diff = y;
    diff.values -= u.values;
    ErrorReport report;
    report.alpha = alpha;
    report.n1 = problem.grid.n1;
    report.n2 = problem.grid.n2;
    report.eps = norm_h(diff);
    report.eps_a = norm_energy(diff, problem.a);
    diff.values = y.values - reference.values;
    report.eps_ref = norm_h(diff);
    return report;
}

std::vector<ErrorReport> run_model(const RunRequest& request) {
    request.validate();
    const ModelProblem problem = preset_paper_problem(request.n1, request.n2);
    const EigenBasis<Real> basis = analytic_laplacian_basis(problem.grid);
    const GridFunction<Real> reference = reference_solve(basis, request.alpha, problem.f);

    std::vector<ErrorReport> rows;
    if (request.scheme == "two_level") {
        SchemeConfig<Real> cfg;
        cfg.alpha = request.alpha;
        cfg.theta = request.theta;
        cfg.sigma = request.sigma;
        cfg.steps = request.steps;
        cfg.solver_tol = request.solver_tol;
        const FullOperator<Real> d_op = pseudo_time_operator(problem, request.theta);
        const auto t0 = std::chrono::steady_clock::now();
        const TwoLevelResult<Real> result = run_two_level(problem.f, cfg, d_op, problem.delta);
        const double ms = wall_since(t0);
        ErrorReport row = compute_errors(result.y, request.alpha, problem, reference);
        row.scheme = "two_level";
        row.theta = request.theta;
        row.sigma1 = request.sigma;
        row.sigma2 = request.sigma;
        row.steps = request.steps;
        row.component = 0;
        row.wall_ms = ms;
        rows.push_back(row);
    } else {
        const SplittingSetup<Real> setup =
            splitting_setup(problem, request.alpha, request.theta, request.sigma1, request.sigma2, request.steps);
        const auto t0 = std::chrono::steady_clock::now();
        const SplittingResult<Real> result = run_splitting(problem.f, setup, /*record_energies=*/false);
        const double ms = wall_since(t0);
        for (int i = 0; i < setup.p(); ++i) {
            ErrorReport row = compute_errors(result.state.current[std::size_t(i)], request.alpha, problem, reference);
            row.scheme = "splitting";
            row.theta = request.theta;
            row.sigma1 = request.sigma1;
            row.sigma2 = request.sigma2;
            row.steps = request.steps;
            row.component = i + 1;
            row.wall_ms = ms;
            rows.push_back(row);
        }
    }
    return rows;
}

Table reproduce_table(int id) {
    if (id < 1 || id > 6) throw ValidationError("reproduce_table: id must lie in 1..6");
    const std::vector<int> step_list{5, 10, 20, 40, 80};
    std::vector<RunRequest> jobs;
    auto push = [&jobs](const char* scheme, int grid, Real alpha, Real theta, Real sigma, int steps) {
        RunRequest r;
        r.scheme = scheme;
        r.n1 = r.n2 = grid;
        r.alpha = alpha;
        r.theta = theta;
        if (r.scheme == "two_level") {
            r.sigma = sigma;
        } else {
            r.sigma1 = r.sigma2 = sigma;
        }
        r.steps = steps;
        jobs.push_back(r);
    };

    switch (id) {
        case 1:
        case 2: {
            const Real sigma = id == 1 ? 1.0 : 0.5;
            for (Real theta : {1.0, 0.5})
                for (int steps : step_list) push("two_level", 100, 0.5, theta, sigma, steps);
            break;
        }
        case 3:
            for (Real sigma : {1.0, 0.5})
                for (int grid : {25, 50, 100, 200, 400}) push("two_level", grid, 0.5, 1.0, sigma, 80);
            break;
        case 4:
            for (Real sigma : {1.0, 0.5})
                for (Real alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) push("two_level", 100, alpha, 1.0, sigma, 80);
            break;
        case 5:
        case 6: {
            const Real theta = id == 5 ? 1.0 : 0.5;
            for (int steps : step_list) push("splitting", 100, 0.5, theta, 1.0, steps);
            break;
        }
    }

    Table table;
    table.id = id;
    for (auto& result : run_parallel(jobs))
        table.rows.insert(table.rows.end(), result.begin(), result.end());
    return table;
}

SweepResult convergence_sweep(const std::vector<SweepCase>& cases) {
    SweepResult result;
    for (const SweepCase& sweep : cases) {
        if (sweep.steps_list.size() < 3)
            throw ValidationError("convergence_sweep: need at least 3 step counts per case");
        std::vector<RunRequest> jobs;
        for (int steps : sweep.steps_list) {
            RunRequest r = sweep.request;
            r.steps = steps;
            jobs.push_back(r);
        }
        std::vector<Real> log_tau, log_eps;
        bool monotone = true;
        Real previous = -1;
        for (auto& rows : run_parallel(jobs)) {
            const ErrorReport& row = rows.front();   // component 1 for splitting
            result.rows.insert(result.rows.end(), rows.begin(), rows.end());
            log_tau.push_back(std::log(Real(1) / Real(row.steps)));
            log_eps.push_back(std::log(row.eps_ref));
            if (previous >= 0 && row.eps_ref >= previous) monotone = false;
            previous = row.eps_ref;
        }
        const auto n = Real(log_tau.size());
        Real sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < log_tau.size(); ++i) {
            sx += log_tau[i];
            sy += log_eps[i];
            sxx += log_tau[i] * log_tau[i];
            sxy += log_tau[i] * log_eps[i];
        }
        result.orders.push_back((n * sxy - sx * sy) / (n * sxx - sx * sx));
        result.monotone.push_back(monotone);
    }
    return result;
}

ErrorReport oracle_checks(const ModelProblem& problem, Real alpha) {
    const EigenBasis<Real> basis = analytic_laplacian_basis(problem.grid);
    const GridFunction<Real> w = reference_solve(basis, alpha, problem.f);
    GridFunction<Real> round_trip = apply_fractional_power(basis, alpha, w);
    round_trip.values -= problem.f.values;

    Real worst_residual = 0;
    const auto m = basis.modes();
    for (std::int64_t idx : {std::int64_t(0), m / 4, m / 2, 3 * m / 4, m - 1}) {
        const GridFunction<Real> phi = basis.eigenvector(idx);
        GridFunction<Real> r = apply(problem.a, phi);
        r.values -= basis.eigenvalues[idx] * phi.values;
        worst_residual = std::max(worst_residual, norm_h(r) / (basis.eigenvalues[idx] * norm_h(phi)));
    }

    ErrorReport row;
    row.scheme = "oracle";
    row.alpha = alpha;
    row.n1 = problem.grid.n1;
    row.n2 = problem.grid.n2;
    row.eps = norm_h(round_trip) / norm_h(problem.f);
    row.eps_a = worst_residual;
    row.eps_ref = std::abs(basis.eigenvalues[0] - problem.delta) / problem.delta;
    return row;
}

std::string to_csv(const std::vector<ErrorReport>& rows) {
    std::string out = "scheme,alpha,theta,sigma1,sigma2,n1,n2,steps,component,eps,eps_A,eps_ref,wall_ms\n";
    for (const ErrorReport& r : rows) {
        out += r.scheme;
        out += ',' + format_value(r.alpha) + ',' + format_value(r.theta);
        out += ',' + format_value(r.sigma1) + ',' + format_value(r.sigma2);
        out += ',' + std::to_string(r.n1) + ',' + std::to_string(r.n2) + ',' + std::to_string(r.steps);
        out += ',' + std::to_string(r.component);
        out += ',' + format_value(r.eps) + ',' + format_value(r.eps_a) + ',' + format_value(r.eps_ref);
        out += ',' + format_fixed(r.wall_ms, 3) + '\n';
    }
    return out;
}

std::string to_json(const std::vector<ErrorReport>& rows) {
    nlohmann::json array = nlohmann::json::array();
    for (const ErrorReport& r : rows) {
        array.push_back({{"scheme", r.scheme},
                         {"alpha", r.alpha},
                         {"theta", r.theta},
                         {"sigma1", r.sigma1},
                         {"sigma2", r.sigma2},
                         {"n1", r.n1},
                         {"n2", r.n2},
                         {"steps", r.steps},
                         {"component", r.component},
                         {"eps", r.eps},
                         {"eps_A", r.eps_a},
                         {"eps_ref", r.eps_ref},
                         {"wall_ms", r.wall_ms}});
    }
    return array.dump(2) + "\n";
}

namespace {

std::string layout_grid(const std::string& column_label, const std::vector<std::string>& column_values,
                        const std::vector<std::pair<std::string, std::vector<std::pair<Real, Real>>>>& row_groups) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-18s", column_label.c_str());
    out << buf;
    for (const auto& v : column_values) {
        std::snprintf(buf, sizeof(buf), "%11s", v.c_str());
        out << buf;
    }
    out << '\n';
    for (const auto& [label, cells] : row_groups) {
        for (const bool energy_norm : {false, true}) {
            std::snprintf(buf, sizeof(buf), "%s %-12s", energy_norm ? "eps_A" : "eps  ", label.c_str());
            out << buf;
            for (const auto& c : cells) out << "  " << format_fixed(energy_norm ? c.second : c.first, 7);
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace

std::string render_table(const Table& table) {
    std::ostringstream head;
    std::vector<std::string> columns;
    std::vector<std::pair<std::string, std::vector<std::pair<Real, Real>>>> groups;
    auto cells_matching = [&](auto&& predicate) {
        std::vector<std::pair<Real, Real>> cells;
        for (const ErrorReport& r : table.rows)
            if (r.scheme != "oracle" && predicate(r)) cells.emplace_back(r.eps, r.eps_a);
        return cells;
    };

    switch (table.id) {
        case 1:
        case 2:
            head << "Two-level scheme, sigma = " << (table.id == 1 ? "1" : "0.5")
                 << " (grid 100x100, alpha = 0.5)\n";
            columns = {"5", "10", "20", "40", "80"};
            for (Real theta : {1.0, 0.5})
                groups.emplace_back("(theta=" + format_fixed(theta, 1) + ")",
                                    cells_matching([theta](const ErrorReport& r) { return r.theta == theta; }));
            return head.str() + layout_grid("N", columns, groups);
        case 3:
            head << "Two-level scheme over spatial grids (theta = 1, N = 80, alpha = 0.5)\n";
            columns = {"25", "50", "100", "200", "400"};
            for (Real sigma : {1.0, 0.5})
                groups.emplace_back("(sigma=" + format_fixed(sigma, 1) + ")",
                                    cells_matching([sigma](const ErrorReport& r) { return r.sigma1 == sigma; }));
            return head.str() + layout_grid("N1=N2", columns, groups);
        case 4:
            head << "Two-level scheme over alpha (grid 100x100, theta = 1, N = 80)\n";
            columns = {"0.1", "0.3", "0.5", "0.7", "0.9"};
            for (Real sigma : {1.0, 0.5})
                groups.emplace_back("(sigma=" + format_fixed(sigma, 1) + ")",
                                    cells_matching([sigma](const ErrorReport& r) { return r.sigma1 == sigma; }));
            return head.str() + layout_grid("alpha", columns, groups);
        case 5:
        case 6:
            head << "Splitting scheme, theta = " << (table.id == 5 ? "1" : "0.5")
                 << " (grid 100x100, alpha = 0.5, sigma1 = sigma2 = 1)\n";
            columns = {"5", "10", "20", "40", "80"};
            for (int component : {1, 2})
                groups.emplace_back("comp " + std::to_string(component),
                                    cells_matching([component](const ErrorReport& r) { return r.component == component; }));
            return head.str() + layout_grid("N", columns, groups);
        default:
            throw ValidationError("render_table: id must lie in 1..6");
    }
}

namespace {

Real parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    Real value{};
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ValidationError("config: value of '" + key + "' is not a number: " + text);
    }
    if (used != text.size()) throw ValidationError("config: trailing characters in value of '" + key + "'");
    return value;
}

int parse_int(const std::string& key, const std::string& text) {
    const Real v = parse_real(key, text);
    const int i = int(v);
    if (Real(i) != v) throw ValidationError("config: value of '" + key + "' is not an integer");
    return i;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    return items;
}

}  // namespace

FileConfig parse_config_text(const std::string& text) {
    FileConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(line_no) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ValidationError("config: empty value for '" + key + "'");

        if (key == "problem.preset") {
            if (value != "paper") throw ValidationError("config: unknown problem preset '" + value + "'");
        } else if (key == "grid.n1") {
            config.request.n1 = parse_int(key, value);
        } else if (key == "grid.n2") {
            config.request.n2 = parse_int(key, value);
        } else if (key == "grid.l1") {
            config.request.l1 = parse_real(key, value);
        } else if (key == "grid.l2") {
            config.request.l2 = parse_real(key, value);
        } else if (key == "alpha") {
            config.request.alpha = parse_real(key, value);
        } else if (key == "theta") {
            config.request.theta = parse_real(key, value);
        } else if (key == "scheme.kind") {
            if (value != "two_level" && value != "splitting")
                throw ValidationError("config: scheme.kind must be two_level or splitting");
            config.request.scheme = value;
        } else if (key == "scheme.sigma") {
            config.request.sigma = parse_real(key, value);
        } else if (key == "scheme.sigma1") {
            config.request.sigma1 = parse_real(key, value);
        } else if (key == "scheme.sigma2") {
            config.request.sigma2 = parse_real(key, value);
        } else if (key == "steps") {
            config.request.steps = parse_int(key, value);
        } else if (key == "solver.tol") {
            config.request.solver_tol = parse_real(key, value);
        } else if (key == "sweep.steps") {
            for (const auto& item : split_list(value)) config.sweep_steps.push_back(parse_int(key, item));
        } else if (key == "sweep.alpha") {
            for (const auto& item : split_list(value)) config.sweep_alpha.push_back(parse_real(key, item));
        } else if (key == "sweep.grid") {
            for (const auto& item : split_list(value)) config.sweep_grid.push_back(parse_int(key, item));
        } else if (key == "sweep.theta") {
            for (const auto& item : split_list(value)) config.sweep_theta.push_back(parse_real(key, item));
        } else if (key == "sweep.sigma") {
            for (const auto& item : split_list(value)) config.sweep_sigma.push_back(parse_real(key, item));
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    return config;
}

FileConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

}  // namespace fracell::experiments
