#pragma once

#include <cstdint>
#include <vector>

#include "ampguard/lp.hpp"

namespace ampguard::milp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;      // structural variables only
    std::vector<double> duals;  // one per row (eq rows first, then ineq)
    long iterations = 0;
};

/// Snapshot of a simplex basis so branch-and-bound can warm start nodes.
struct BasisSnapshot {
    std::vector<int> basic_of_row;
    std::vector<std::uint8_t> state;  // VarState per column
};

/// Bounded-variable revised primal simplex with a product-form inverse
/// (eta file rebuilt by periodic reinversion). Rows are internally augmented
/// with one logical column each: equality rows get a fixed [0,0] logical,
/// inequality rows a slack in [0, inf). Phase 1 minimizes total bound
/// violation of the basic variables from an arbitrary starting basis, which
/// is what makes warm starts after bound changes cheap.
///
/// Determinism: entering/leaving ties break toward the lowest index; Dantzig
/// pricing switches to Bland's rule after a run of degenerate steps and back
/// once the objective moves.
class SimplexSolver {
public:
    struct Options {
        double feas_tol = 1e-7;
        double pivot_tol = 1e-9;
        long max_iterations = 2000000;
        int refactor_interval = 96;
        int stall_limit = 600;  // degenerate steps before Bland mode
    };

    explicit SimplexSolver(const LinearProgram& lp, Options opt = {});

    /// Solve from the all-logical basis.
    LpResult solve();

    /// Solve keeping the current basis (after set_bounds changes). Pass
    /// refactor = false when only bounds changed since the last run, so the
    /// existing factorization is still valid.
    LpResult resolve(bool refactor = true);

    /// Override a structural variable's bounds (branching, warm restarts).
    void set_bounds(int var, double lo, double hi);
    void get_bounds(int var, double* lo, double* hi) const;

    BasisSnapshot snapshot() const;
    void restore(const BasisSnapshot& snap);

    int num_structural() const { return n_; }
    int num_rows() const { return m_; }

private:
    enum VarState : std::uint8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeNb = 3 };

    struct Eta {
        int pivot_row;
        std::vector<int> idx;
        std::vector<double> val;  // full eta column (includes pivot entry)
    };

    // Column access: j < n_ structural (CSC), j >= n_ logical unit column.
    void column(int j, std::vector<int>& idx, std::vector<double>& val) const;
    double col_dot(int j, const std::vector<double>& y) const;

    void ftran(std::vector<double>& v) const;
    void btran(std::vector<double>& v) const;

    bool reinvert();             // rebuild eta file from basic_of_row_
    void compute_basics();       // x_B = B^-1 (b - N x_N)
    void set_nonbasic_values();  // snap nonbasics to their bounds
    double infeasibility() const;

    LpResult run();
    bool price(bool phase1, int& enter, int& direction);
    int ratio_test(int enter, int direction, const std::vector<double>& w,
                   bool phase1, double& step, bool& bound_flip);
    void pivot(int enter, int direction, int leave_row, double step,
               const std::vector<double>& w);

    double lower_of(int j) const { return j < n_ ? lower_[j] : logical_lower_[j - n_]; }
    double upper_of(int j) const { return j < n_ ? upper_[j] : logical_upper_[j - n_]; }
    double cost_of(int j) const { return j < n_ ? objective_[j] : 0.0; }

    Options opt_;
    int n_ = 0;  // structural columns
    int m_ = 0;  // rows
    SparseMatrix cols_;            // m_ x n_, all rows stacked (eq then ineq)
    std::vector<double> rhs_;      // b
    std::vector<double> objective_;
    std::vector<double> lower_, upper_;            // structural bounds
    std::vector<double> logical_lower_, logical_upper_;

    std::vector<int> basic_of_row_;
    std::vector<std::uint8_t> state_;
    std::vector<double> x_;  // all columns
    std::vector<Eta> etas_;

    std::vector<double> work_dense_;
    std::vector<double> price_buffer_;
    long total_iterations_ = 0;
    bool bland_mode_ = false;
    int stall_count_ = 0;
};

/// One-call convenience wrapper.
LpResult solve_lp(const LinearProgram& lp, SimplexSolver::Options opt = {});

}  // namespace ampguard::milp
