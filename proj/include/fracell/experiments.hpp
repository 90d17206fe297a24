#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracell/evolution.hpp"
#include "fracell/spectral.hpp"
#include "fracell/splitting.hpp"

namespace fracell::experiments {

using Real = double;

/// Unit-square model problem: k = 1, c = 0,
/// f = sin(pi x1) sin(pi x2) + sin(3 pi x1) sin(2 pi x2).
struct ModelProblem {
    Grid2D<Real> grid;
    CoefficientField<Real> coeff;
    SplitOperator<Real> a1, a2;
    FullOperator<Real> a;          // A = A1 + A2
    Real delta1{0}, delta2{0}, delta{0};
    GridFunction<Real> f;
};

ModelProblem preset_paper_problem(int n1, int n2);

/// D = A - theta*delta*I for the two-level scheme.
FullOperator<Real> pseudo_time_operator(const ModelProblem& problem, Real theta);

/// Splitting setup with D_i = A_i - theta*delta_i*I.
SplittingSetup<Real> splitting_setup(const ModelProblem& problem, Real alpha, Real theta, Real sigma1, Real sigma2,
                                     int steps);

struct ErrorReport {
    std::string scheme;   // "two_level" | "splitting" | "oracle"
    Real alpha{0}, theta{0}, sigma1{0}, sigma2{0};
    int n1{0}, n2{0}, steps{0};
    int component{0};     // 0 for two_level, 1..p for splitting components
    Real eps{0}, eps_a{0}, eps_ref{0};
    double wall_ms{0};
};

struct RunRequest {
    std::string scheme{"two_level"};   // "two_level" | "splitting"
    int n1{100}, n2{100};
    Real l1{1}, l2{1};
    Real alpha{0.5};
    Real theta{1};
    Real sigma{1};                     // two-level weight
    Real sigma1{1}, sigma2{1};         // splitting weights
    int steps{20};
    Real solver_tol{1e-12};

    void validate() const;
};

/// Errors of a computed solution against the sampled continuous solution
/// (eps, eps_a) and the discrete spectral reference (eps_ref).
ErrorReport compute_errors(const GridFunction<Real>& y, Real alpha, const ModelProblem& problem,
                           const GridFunction<Real>& reference);

/// Execute one model-problem run; one row for two_level, p rows for splitting.
std::vector<ErrorReport> run_model(const RunRequest& request);

struct Table {
    int id{0};
    std::vector<ErrorReport> rows;
};

/// Re-run the exact parameter grid of one of the six published tables.
Table reproduce_table(int id);

struct SweepCase {
    RunRequest request;                 // steps field is overridden by `steps_list`
    std::vector<int> steps_list;
};

struct SweepResult {
    std::vector<ErrorReport> rows;
    // least-squares slope of log(eps_ref) vs log(tau), one per case
    std::vector<Real> orders;
    std::vector<bool> monotone;         // error decreased at every step-count increase
};

/// Observed convergence order in tau against the discrete spectral reference.
SweepResult convergence_sweep(const std::vector<SweepCase>& cases);

/// Oracle cross-checks for one grid/alpha pair, reported as an ErrorReport row:
/// eps = relative round-trip residual of A^alpha(reference_solve(f)) vs f,
/// eps_a = worst relative eigen-residual over a few modes,
/// eps_ref = relative gap between lambda_1 and the certified bound delta.
ErrorReport oracle_checks(const ModelProblem& problem, Real alpha);

std::string to_csv(const std::vector<ErrorReport>& rows);
std::string to_json(const std::vector<ErrorReport>& rows);
/// Paper-layout rendering with 7-decimal values.
std::string render_table(const Table& table);

/// Flat key-value config file (`key = value`, '#' comments). Unknown keys are
/// rejected. List-valued sweep keys take comma-separated entries.
struct FileConfig {
    RunRequest request;
    std::vector<int> sweep_steps;
    std::vector<Real> sweep_alpha;
    std::vector<int> sweep_grid;
    std::vector<Real> sweep_theta;
    std::vector<Real> sweep_sigma;
};

FileConfig parse_config_text(const std::string& text);
FileConfig parse_config_file(const std::string& path);

}  // namespace fracell::experiments
