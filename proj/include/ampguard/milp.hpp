#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ampguard/lp.hpp"
#include "ampguard/simplex.hpp"

namespace ampguard::milp {

enum class MilpStatus { optimal, gap_feasible, infeasible, time_limit, unbounded };

const char* to_string(MilpStatus s);

struct MilpResult {
    MilpStatus status = MilpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;  // relative
    long nodes = 0;
    long lp_iterations = 0;
    bool no_incumbent = false;  // time limit hit before any feasible point
};

struct MilpOptions {
    double gap_tol = 0.01;
    double time_limit_s = 120.0;
    double integrality_tol = 1e-6;
    long max_nodes = 2000000;
    int threads = 1;  // >1 trades deterministic node order for speed
    SimplexSolver::Options lp;
};

/// Best-first branch and bound with depth-first plunging over LP relaxations.
/// Branching is on the most-fractional integer (largest distance to its
/// nearest allowed value); non-contiguous allowed sets like {0,2,3,4} split
/// on value intervals. A round-and-fix heuristic runs at the root to seed the
/// incumbent. Single-threaded mode is deterministic.
MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& opt = {});

/// Reusable solver that keeps the simplex instance alive between calls so a
/// controller can warm start consecutive, structurally identical problems.
class MilpSolver {
public:
    MilpSolver(MilpProblem problem, MilpOptions opt = {});

    MilpResult solve();

    /// Replace objective/rhs/bounds (same sparsity pattern and sizes) and
    /// keep the previous basis as a warm start for the next solve().
    void update_problem(const MilpProblem& problem, bool warm_start);

    const MilpProblem& problem() const { return problem_; }

private:
    MilpResult branch_and_bound(SimplexSolver& solver, bool use_warm_basis);

    MilpProblem problem_;
    MilpOptions opt_;
    bool warm_enabled_ = false;
    bool have_warm_basis_ = false;
    BasisSnapshot warm_basis_;
};

}  // namespace ampguard::milp
