#include "ampguard/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace ampguard::milp {

const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::optimal: return "optimal";
        case MilpStatus::gap_feasible: return "gap_feasible";
        case MilpStatus::infeasible: return "infeasible";
        case MilpStatus::time_limit: return "time_limit";
        case MilpStatus::unbounded: return "unbounded";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

struct BoundChange {
    int var;
    double lo, hi;
};

struct Node {
    double bound;  // parent LP objective
    long id;
    std::vector<BoundChange> changes;
    std::shared_ptr<const BasisSnapshot> basis;  // shared between siblings
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap
        return a.id > b.id;
    }
};

double nearest_allowed(const std::vector<double>& allowed, double x, double lo,
                       double hi) {
    double best = allowed.front();
    double best_d = std::abs(x - best) + (best < lo || best > hi ? 1e18 : 0.0);
    for (double v : allowed) {
        double d = std::abs(x - v) + (v < lo || v > hi ? 1e18 : 0.0);
        if (d < best_d) {
            best_d = d;
            best = v;
        }
    }
    return best;
}

class BranchAndBound {
public:
    BranchAndBound(const MilpProblem& problem, const MilpOptions& opt,
                   SimplexSolver& solver, bool use_warm,
                   const BasisSnapshot* warm, BasisSnapshot* root_basis_out)
        : p_(problem),
          opt_(opt),
          solver_(solver),
          use_warm_(use_warm),
          warm_(warm),
          root_basis_out_(root_basis_out) {}

    MilpResult run() {
        start_ = Clock::now();

        // Bound tightening: integer bounds can't exceed the allowed span.
        root_lo_.resize(p_.integers.size());
        root_hi_.resize(p_.integers.size());
        for (size_t i = 0; i < p_.integers.size(); ++i) {
            const auto& iv = p_.integers[i];
            double lo, hi;
            solver_.get_bounds(iv.index, &lo, &hi);
            lo = std::max(lo, iv.allowed.front());
            hi = std::min(hi, iv.allowed.back());
            solver_.set_bounds(iv.index, lo, hi);
            root_lo_[i] = lo;
            root_hi_[i] = hi;
        }

        LpResult root;
        if (use_warm_ && warm_) {
            solver_.restore(*warm_);
            root = solver_.resolve(true);
        } else {
            root = solver_.solve();
        }
        res_.lp_iterations += root.iterations;
        ++res_.nodes;
        if (root.status == LpStatus::infeasible) {
            res_.status = MilpStatus::infeasible;
            res_.no_incumbent = true;
            return res_;
        }
        if (root.status == LpStatus::unbounded) {
            res_.status = MilpStatus::unbounded;
            res_.no_incumbent = true;
            return res_;
        }
        if (root_basis_out_) *root_basis_out_ = solver_.snapshot();

        round_and_fix_heuristic(root);

        Node root_node{root.objective, next_id_++, {},
                       std::make_shared<BasisSnapshot>(solver_.snapshot())};
        dive(root_node, &root);

        while (!open_.empty()) {
            if (limit_hit()) return finish(true);
            Node node = open_.top();
            open_.pop();
            if (have_incumbent_ && node.bound >= incumbent_obj_ - prune_eps()) continue;
            if (gap_met(node.bound)) return finish(false);
            dive(node, nullptr);
        }
        // Tree exhausted: the incumbent is proven optimal.
        if (!have_incumbent_) {
            res_.status = MilpStatus::infeasible;
            res_.no_incumbent = true;
            return res_;
        }
        res_.status = MilpStatus::optimal;
        res_.best_bound = incumbent_obj_;
        res_.gap = 0.0;
        res_.x = incumbent_x_;
        res_.objective = incumbent_obj_;
        return res_;
    }

private:
    double prune_eps() const {
        return 1e-9 * std::max(1.0, std::abs(incumbent_obj_));
    }

    bool limit_hit() {
        if (res_.nodes >= opt_.max_nodes) return true;
        double elapsed =
            std::chrono::duration<double>(Clock::now() - start_).count();
        return elapsed > opt_.time_limit_s;
    }

    double global_lower_bound(double current) const {
        double lb = current;
        if (!open_.empty()) lb = std::min(lb, open_.top().bound);
        return lb;
    }

    bool gap_met(double current_bound) {
        if (!have_incumbent_) return false;
        double lb = global_lower_bound(current_bound);
        double gap = (incumbent_obj_ - lb) / std::max(1e-9, std::abs(incumbent_obj_));
        return gap <= opt_.gap_tol;
    }

    MilpResult finish(bool timed_out) {
        double lb = global_lower_bound(have_incumbent_ ? incumbent_obj_ : -kInf);
        res_.best_bound = lb;
        if (!have_incumbent_) {
            res_.status = MilpStatus::time_limit;
            res_.no_incumbent = true;
            res_.gap = kInf;
            return res_;
        }
        res_.x = incumbent_x_;
        res_.objective = incumbent_obj_;
        res_.gap = std::max(0.0, (incumbent_obj_ - lb) /
                                     std::max(1e-9, std::abs(incumbent_obj_)));
        res_.status = timed_out ? MilpStatus::time_limit : MilpStatus::gap_feasible;
        return res_;
    }

    void apply_node_bounds(const Node& node) {
        for (size_t i = 0; i < p_.integers.size(); ++i)
            solver_.set_bounds(p_.integers[i].index, root_lo_[i], root_hi_[i]);
        for (const auto& ch : node.changes) solver_.set_bounds(ch.var, ch.lo, ch.hi);
    }

    // Fractionality against the allowed set: index of the most fractional
    // integer, or -1 when everything is integral.
    int most_fractional(const std::vector<double>& x, double* nearest_out) const {
        int best = -1;
        double best_score = opt_.integrality_tol;
        for (size_t i = 0; i < p_.integers.size(); ++i) {
            const auto& iv = p_.integers[i];
            double v = x[iv.index];
            double near = nearest_allowed(iv.allowed, v, -kInf, kInf);
            double score = std::abs(v - near);
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(i);
                if (nearest_out) *nearest_out = near;
            }
        }
        return best;
    }

    void accept_incumbent(const LpResult& lp) {
        std::vector<double> x = lp.x;
        for (const auto& iv : p_.integers)
            x[iv.index] = nearest_allowed(iv.allowed, x[iv.index], -kInf, kInf);
        double obj = 0.0;
        for (int j = 0; j < p_.lp.num_vars; ++j) obj += p_.lp.objective[j] * x[j];
        if (!have_incumbent_ || obj < incumbent_obj_) {
            incumbent_obj_ = obj;
            incumbent_x_ = std::move(x);
            have_incumbent_ = true;
        }
    }

    void round_and_fix_heuristic(const LpResult& root) {
        for (size_t i = 0; i < p_.integers.size(); ++i) {
            const auto& iv = p_.integers[i];
            double v = nearest_allowed(iv.allowed, root.x[iv.index], root_lo_[i],
                                       root_hi_[i]);
            solver_.set_bounds(iv.index, v, v);
        }
        LpResult fixed = solver_.resolve(false);
        res_.lp_iterations += fixed.iterations;
        if (fixed.status == LpStatus::optimal) accept_incumbent(fixed);
        for (size_t i = 0; i < p_.integers.size(); ++i)
            solver_.set_bounds(p_.integers[i].index, root_lo_[i], root_hi_[i]);
        // Leave the solver on the root basis for the dive.
        solver_.resolve(false);
    }

    // Processes a node and plunges depth-first, pushing siblings onto the
    // heap. `presolved` carries the root relaxation on the first call.
    void dive(Node node, const LpResult* presolved) {
        LpResult lp;
        if (presolved) {
            lp = *presolved;
        } else {
            apply_node_bounds(node);
            if (node.basis) {
                solver_.restore(*node.basis);
                lp = solver_.resolve(true);
            } else {
                lp = solver_.solve();
            }
            res_.lp_iterations += lp.iterations;
            ++res_.nodes;
        }

        while (true) {
            if (lp.status != LpStatus::optimal) return;  // pruned branch
            if (have_incumbent_ && lp.objective >= incumbent_obj_ - prune_eps())
                return;
            int bi = most_fractional(lp.x, nullptr);
            if (bi < 0) {
                accept_incumbent(lp);
                return;
            }
            if (limit_hit()) return;

            const auto& iv = p_.integers[bi];
            double lo, hi;
            solver_.get_bounds(iv.index, &lo, &hi);
            double v = lp.x[iv.index];
            // Split the allowed set around the fractional value.
            double left_hi = -kInf, right_lo = kInf;
            for (double a : iv.allowed) {
                if (a < lo - 1e-12 || a > hi + 1e-12) continue;
                if (a <= v) left_hi = std::max(left_hi, a);
                if (a > v) right_lo = std::min(right_lo, a);
            }
            bool has_left = left_hi > -kInf, has_right = right_lo < kInf;
            if (!has_left && !has_right) return;  // no allowed value in range

            double bound = lp.objective;
            bool dive_left =
                has_left && (!has_right || v - left_hi <= right_lo - v);

            if (has_left && has_right) {
                // Push the non-dived sibling; both children share the basis.
                Node sibling{bound, next_id_++, node.changes, nullptr};
                if (dive_left)
                    sibling.changes.push_back({iv.index, right_lo, hi});
                else
                    sibling.changes.push_back({iv.index, lo, left_hi});
                if (static_cast<long>(open_.size()) < kMaxStoredBases)
                    sibling.basis = std::make_shared<BasisSnapshot>(solver_.snapshot());
                open_.push(std::move(sibling));
            }

            node.bound = bound;
            node.id = next_id_++;
            if (dive_left)
                node.changes.push_back({iv.index, lo, left_hi});
            else
                node.changes.push_back({iv.index, right_lo, hi});

            // The solver already holds this node's parent basis; only one
            // bound changed, so the factorization is still valid.
            apply_node_bounds(node);
            lp = solver_.resolve(false);
            res_.lp_iterations += lp.iterations;
            ++res_.nodes;
        }
    }

    static constexpr long kMaxStoredBases = 8000;

    const MilpProblem& p_;
    const MilpOptions& opt_;
    SimplexSolver& solver_;
    bool use_warm_;
    const BasisSnapshot* warm_;
    BasisSnapshot* root_basis_out_;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
    std::vector<double> root_lo_, root_hi_;
    MilpResult res_;
    bool have_incumbent_ = false;
    double incumbent_obj_ = kInf;
    std::vector<double> incumbent_x_;
    long next_id_ = 0;
    Clock::time_point start_;
};

}  // namespace

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& opt) {
    problem.lp.validate();
    SimplexSolver solver(problem.lp, opt.lp);
    BranchAndBound bnb(problem, opt, solver, false, nullptr, nullptr);
    return bnb.run();
}

MilpSolver::MilpSolver(MilpProblem problem, MilpOptions opt)
    : problem_(std::move(problem)), opt_(opt) {
    problem_.lp.validate();
}

MilpResult MilpSolver::solve() {
    SimplexSolver solver(problem_.lp, opt_.lp);
    BasisSnapshot root_basis;
    BranchAndBound bnb(problem_, opt_, solver, have_warm_basis_, &warm_basis_,
                       &root_basis);
    MilpResult res = bnb.run();
    if (res.status != MilpStatus::infeasible && res.status != MilpStatus::unbounded) {
        warm_basis_ = std::move(root_basis);
        have_warm_basis_ = warm_enabled_;
    }
    return res;
}

void MilpSolver::update_problem(const MilpProblem& problem, bool warm_start) {
    if (problem.lp.num_vars != problem_.lp.num_vars ||
        problem.lp.b_eq.size() != problem_.lp.b_eq.size() ||
        problem.lp.b_in.size() != problem_.lp.b_in.size())
        have_warm_basis_ = false;
    problem_ = problem;
    problem_.lp.validate();
    warm_enabled_ = warm_start;
    if (!warm_start) have_warm_basis_ = false;
}

}  // namespace ampguard::milp
