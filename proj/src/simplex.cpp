#include "ampguard/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ampguard::milp {

namespace {
constexpr double kStepEps = 1e-11;
}

SimplexSolver::SimplexSolver(const LinearProgram& lp, Options opt) : opt_(opt) {
    lp.validate();
    n_ = lp.num_vars;
    int m_eq = static_cast<int>(lp.b_eq.size());
    int m_in = static_cast<int>(lp.b_in.size());
    m_ = m_eq + m_in;

    // Stack eq rows above ineq rows in one CSC matrix.
    cols_.rows = m_;
    cols_.cols = n_;
    cols_.col_start.assign(n_ + 1, 0);
    for (int c = 0; c < n_; ++c) {
        int cnt = (lp.a_eq.col_start[c + 1] - lp.a_eq.col_start[c]) +
                  (lp.a_in.col_start[c + 1] - lp.a_in.col_start[c]);
        cols_.col_start[c + 1] = cols_.col_start[c] + cnt;
    }
    cols_.row_index.resize(cols_.col_start[n_]);
    cols_.value.resize(cols_.col_start[n_]);
    for (int c = 0; c < n_; ++c) {
        int pos = cols_.col_start[c];
        for (int k = lp.a_eq.col_start[c]; k < lp.a_eq.col_start[c + 1]; ++k) {
            cols_.row_index[pos] = lp.a_eq.row_index[k];
            cols_.value[pos++] = lp.a_eq.value[k];
        }
        for (int k = lp.a_in.col_start[c]; k < lp.a_in.col_start[c + 1]; ++k) {
            cols_.row_index[pos] = m_eq + lp.a_in.row_index[k];
            cols_.value[pos++] = lp.a_in.value[k];
        }
    }

    rhs_.resize(m_);
    for (int i = 0; i < m_eq; ++i) rhs_[i] = lp.b_eq[i];
    for (int i = 0; i < m_in; ++i) rhs_[m_eq + i] = lp.b_in[i];

    objective_ = lp.objective;
    lower_ = lp.lower;
    upper_ = lp.upper;
    logical_lower_.assign(m_, 0.0);
    logical_upper_.assign(m_, 0.0);
    for (int i = 0; i < m_in; ++i) logical_upper_[m_eq + i] = kInf;

    basic_of_row_.resize(m_);
    state_.assign(n_ + m_, kAtLower);
    x_.assign(n_ + m_, 0.0);
    work_dense_.assign(m_, 0.0);
}

void SimplexSolver::set_bounds(int var, double lo, double hi) {
    if (var < 0 || var >= n_) throw std::invalid_argument("set_bounds: bad var");
    if (lo > hi) throw std::invalid_argument("set_bounds: lo > hi");
    lower_[var] = lo;
    upper_[var] = hi;
}

void SimplexSolver::get_bounds(int var, double* lo, double* hi) const {
    *lo = lower_[var];
    *hi = upper_[var];
}

BasisSnapshot SimplexSolver::snapshot() const {
    return BasisSnapshot{basic_of_row_, state_};
}

void SimplexSolver::restore(const BasisSnapshot& snap) {
    if (static_cast<int>(snap.basic_of_row.size()) != m_ ||
        static_cast<int>(snap.state.size()) != n_ + m_)
        throw std::invalid_argument("restore: snapshot shape mismatch");
    basic_of_row_ = snap.basic_of_row;
    state_ = snap.state;
}

void SimplexSolver::column(int j, std::vector<int>& idx,
                           std::vector<double>& val) const {
    idx.clear();
    val.clear();
    if (j < n_) {
        for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k) {
            idx.push_back(cols_.row_index[k]);
            val.push_back(cols_.value[k]);
        }
    } else {
        idx.push_back(j - n_);
        val.push_back(1.0);
    }
}

double SimplexSolver::col_dot(int j, const std::vector<double>& y) const {
    if (j >= n_) return y[j - n_];
    double acc = 0.0;
    for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
        acc += cols_.value[k] * y[cols_.row_index[k]];
    return acc;
}

void SimplexSolver::ftran(std::vector<double>& v) const {
    for (const Eta& e : etas_) {
        double t = v[e.pivot_row];
        if (t == 0.0) continue;
        v[e.pivot_row] = 0.0;
        for (size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] += e.val[k] * t;
    }
}

void SimplexSolver::btran(std::vector<double>& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = 0.0;
        for (size_t k = 0; k < it->idx.size(); ++k) s += it->val[k] * v[it->idx[k]];
        v[it->pivot_row] = s;
    }
}

bool SimplexSolver::reinvert() {
    etas_.clear();
    std::vector<int> cols(basic_of_row_.begin(), basic_of_row_.end());
    std::vector<bool> row_pivoted(m_, false);
    bool repaired = false;

    // Triangularity ordering: repeatedly strip rows covered by exactly one
    // remaining basic column, so their pivots produce no fill.
    std::vector<int> rowcount(m_, 0);
    std::vector<std::vector<int>> row_cols(m_);
    std::vector<int> ci;
    std::vector<double> cv;
    for (size_t c = 0; c < cols.size(); ++c) {
        column(cols[c], ci, cv);
        for (int r : ci) {
            ++rowcount[r];
            row_cols[r].push_back(static_cast<int>(c));
        }
    }
    std::vector<int> order;
    order.reserve(cols.size());
    std::vector<int> queue;
    for (int r = 0; r < m_; ++r)
        if (rowcount[r] == 1) queue.push_back(r);
    std::vector<bool> col_ordered(cols.size(), false);
    while (!queue.empty()) {
        int r = queue.back();
        queue.pop_back();
        if (rowcount[r] != 1) continue;
        int chosen = -1;
        for (int c : row_cols[r])
            if (!col_ordered[c]) chosen = c;
        if (chosen < 0) continue;
        col_ordered[chosen] = true;
        order.push_back(chosen);
        column(cols[chosen], ci, cv);
        for (int rr : ci) {
            if (--rowcount[rr] == 1) queue.push_back(rr);
        }
    }
    // Bump columns: whatever remains, smallest columns first.
    std::vector<int> bump;
    for (size_t c = 0; c < cols.size(); ++c)
        if (!col_ordered[c]) bump.push_back(static_cast<int>(c));
    std::stable_sort(bump.begin(), bump.end(), [&](int a, int b) {
        int na = cols[a] < n_ ? cols_.col_start[cols[a] + 1] - cols_.col_start[cols[a]] : 1;
        int nb = cols[b] < n_ ? cols_.col_start[cols[b] + 1] - cols_.col_start[cols[b]] : 1;
        return na < nb;
    });
    order.insert(order.end(), bump.begin(), bump.end());

    std::vector<double>& v = work_dense_;
    for (int c : order) {
        int j = cols[c];
        std::fill(v.begin(), v.end(), 0.0);
        column(j, ci, cv);
        for (size_t k = 0; k < ci.size(); ++k) v[ci[k]] = cv[k];
        ftran(v);
        int pivot = -1;
        double best = opt_.pivot_tol;
        for (int r = 0; r < m_; ++r) {
            if (row_pivoted[r]) continue;
            double a = std::abs(v[r]);
            if (a > best) {
                best = a;
                pivot = r;
            }
        }
        if (pivot < 0) {
            // Singular direction: drop this column to a bound; its row gets a
            // logical later.
            if (lower_of(j) > -kInf) state_[j] = kAtLower;
            else if (upper_of(j) < kInf) state_[j] = kAtUpper;
            else state_[j] = kFreeNb;
            repaired = true;
            continue;
        }
        Eta e;
        e.pivot_row = pivot;
        double inv = 1.0 / v[pivot];
        for (int r = 0; r < m_; ++r) {
            if (v[r] == 0.0) continue;
            e.idx.push_back(r);
            e.val.push_back(r == pivot ? inv : -v[r] * inv);
        }
        etas_.push_back(std::move(e));
        row_pivoted[pivot] = true;
        basic_of_row_[pivot] = j;
        state_[j] = kBasic;
    }
    for (int r = 0; r < m_; ++r) {
        if (row_pivoted[r]) continue;
        // Logical takes the row; its transformed column is still the unit
        // vector because row r was never pivoted.
        basic_of_row_[r] = n_ + r;
        state_[n_ + r] = kBasic;
        repaired = true;
    }
    return !repaired;
}

void SimplexSolver::set_nonbasic_values() {
    for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == kBasic) continue;
        double lo = lower_of(j), hi = upper_of(j);
        if (state_[j] == kAtLower && lo == -kInf)
            state_[j] = hi < kInf ? kAtUpper : kFreeNb;
        if (state_[j] == kAtUpper && hi == kInf)
            state_[j] = lo > -kInf ? kAtLower : kFreeNb;
        switch (state_[j]) {
            case kAtLower: x_[j] = lo; break;
            case kAtUpper: x_[j] = hi; break;
            default: x_[j] = 0.0; break;
        }
    }
}

void SimplexSolver::compute_basics() {
    std::vector<double>& v = work_dense_;
    v = rhs_;
    for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == kBasic || x_[j] == 0.0) continue;
        if (j < n_) {
            for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
                v[cols_.row_index[k]] -= cols_.value[k] * x_[j];
        } else {
            v[j - n_] -= x_[j];
        }
    }
    ftran(v);
    for (int r = 0; r < m_; ++r) x_[basic_of_row_[r]] = v[r];
}

double SimplexSolver::infeasibility() const {
    // Largest single bound violation among basics; pricing marks exactly the
    // rows this sees, so the phase decision and the gradient stay consistent.
    double worst = 0.0;
    for (int r = 0; r < m_; ++r) {
        int j = basic_of_row_[r];
        double lo = lower_of(j), hi = upper_of(j);
        if (x_[j] < lo) worst = std::max(worst, lo - x_[j]);
        else if (x_[j] > hi) worst = std::max(worst, x_[j] - hi);
    }
    return worst;
}

bool SimplexSolver::price(bool phase1, int& enter, int& direction) {
    std::vector<double>& y = price_buffer_;
    y.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
        int j = basic_of_row_[r];
        if (phase1) {
            double lo = lower_of(j), hi = upper_of(j);
            if (x_[j] < lo - opt_.feas_tol) y[r] = -1.0;
            else if (x_[j] > hi + opt_.feas_tol) y[r] = 1.0;
            else y[r] = 0.0;
        } else {
            y[r] = cost_of(j);
        }
    }
    btran(y);

    const double dual_tol = opt_.feas_tol;
    enter = -1;
    direction = 0;
    double best_score = dual_tol;
    for (int j = 0; j < n_ + m_; ++j) {
        std::uint8_t st = state_[j];
        if (st == kBasic) continue;
        double lo = lower_of(j), hi = upper_of(j);
        if (lo == hi) continue;  // fixed
        double d = (phase1 ? 0.0 : cost_of(j)) - col_dot(j, y);
        int dir = 0;
        double score = 0.0;
        if ((st == kAtLower || st == kFreeNb) && d < -dual_tol) {
            dir = +1;
            score = -d;
        } else if ((st == kAtUpper || st == kFreeNb) && d > dual_tol) {
            dir = -1;
            score = d;
        }
        if (dir == 0) continue;
        if (bland_mode_) {
            enter = j;
            direction = dir;
            return true;
        }
        if (score > best_score) {
            best_score = score;
            enter = j;
            direction = dir;
        }
    }
    return enter >= 0;
}

int SimplexSolver::ratio_test(int enter, int direction,
                              const std::vector<double>& w, bool phase1,
                              double& step, bool& bound_flip) {
    double lo_e = lower_of(enter), hi_e = upper_of(enter);
    double flip_limit = (lo_e > -kInf && hi_e < kInf) ? hi_e - lo_e : kInf;

    int leave_row = -1;
    double best_t = flip_limit;
    double best_pivot = 0.0;
    for (int r = 0; r < m_; ++r) {
        double rate = -direction * w[r];
        if (std::abs(rate) <= opt_.pivot_tol) continue;
        int j = basic_of_row_[r];
        double xv = x_[j], lo = lower_of(j), hi = upper_of(j);
        double t;
        if (phase1 && xv < lo - opt_.feas_tol) {
            if (rate <= 0.0) continue;
            t = (lo - xv) / rate;
        } else if (phase1 && xv > hi + opt_.feas_tol) {
            if (rate >= 0.0) continue;
            t = (hi - xv) / rate;
        } else if (rate > 0.0) {
            if (hi == kInf) continue;
            t = (hi - xv) / rate;
        } else {
            if (lo == -kInf) continue;
            t = (lo - xv) / rate;
        }
        if (t < 0.0) t = 0.0;
        double a = std::abs(w[r]);
        bool better;
        if (bland_mode_) {
            better = t < best_t - kStepEps ||
                     (leave_row >= 0 && t <= best_t + kStepEps &&
                      basic_of_row_[r] < basic_of_row_[leave_row]);
            if (leave_row < 0) better = t <= best_t;
        } else {
            better = t < best_t - kStepEps ||
                     (t <= best_t + kStepEps && a > best_pivot);
        }
        if (better) {
            best_t = std::min(best_t, std::max(t, 0.0));
            leave_row = r;
            best_pivot = a;
        }
    }
    if (leave_row < 0) {
        if (best_t == kInf) return -2;  // unbounded direction
        bound_flip = true;
        step = best_t;
        return -1;
    }
    bound_flip = false;
    step = best_t;
    return leave_row;
}

void SimplexSolver::pivot(int enter, int direction, int leave_row, double step,
                          const std::vector<double>& w) {
    for (int r = 0; r < m_; ++r) {
        if (w[r] == 0.0) continue;
        x_[basic_of_row_[r]] -= direction * step * w[r];
    }
    if (leave_row < 0) {  // bound flip
        if (direction > 0) {
            x_[enter] = upper_of(enter);
            state_[enter] = kAtUpper;
        } else {
            x_[enter] = lower_of(enter);
            state_[enter] = kAtLower;
        }
        return;
    }
    int leaving = basic_of_row_[leave_row];
    double lo = lower_of(leaving), hi = upper_of(leaving);
    // Snap the leaving variable to whichever bound it reached.
    double to_lo = std::abs(x_[leaving] - lo), to_hi = std::abs(x_[leaving] - hi);
    if (hi == kInf || (lo > -kInf && to_lo <= to_hi)) {
        x_[leaving] = lo;
        state_[leaving] = kAtLower;
    } else {
        x_[leaving] = hi;
        state_[leaving] = kAtUpper;
    }

    x_[enter] = (direction > 0 ? lower_of(enter) : upper_of(enter));
    if (state_[enter] == kFreeNb) x_[enter] = 0.0;
    x_[enter] += direction * step;
    state_[enter] = kBasic;
    basic_of_row_[leave_row] = enter;

    Eta e;
    e.pivot_row = leave_row;
    double piv = w[leave_row];
    double inv = 1.0 / piv;
    for (int r = 0; r < m_; ++r) {
        if (w[r] == 0.0) continue;
        e.idx.push_back(r);
        e.val.push_back(r == leave_row ? inv : -w[r] * inv);
    }
    etas_.push_back(std::move(e));
}

LpResult SimplexSolver::run() {
    LpResult res;
    res.iterations = 0;
    bland_mode_ = false;
    stall_count_ = 0;

    std::vector<double> w(m_, 0.0);
    std::vector<int> ci;
    std::vector<double> cv;
    int etas_since_refactor = 0;

    while (true) {
        if (res.iterations >= opt_.max_iterations) {
            res.status = LpStatus::iteration_limit;
            return res;
        }
        bool phase1 = infeasibility() > opt_.feas_tol;
        int enter = -1, direction = 0;
        if (!price(phase1, enter, direction)) {
            if (phase1) {
                res.status = LpStatus::infeasible;
                return res;
            }
            break;  // optimal
        }

        std::fill(w.begin(), w.end(), 0.0);
        column(enter, ci, cv);
        for (size_t k = 0; k < ci.size(); ++k) w[ci[k]] = cv[k];
        ftran(w);

        double step = 0.0;
        bool flip = false;
        int leave_row = ratio_test(enter, direction, w, phase1, step, flip);
        if (leave_row == -2) {
            if (phase1) {
                res.status = LpStatus::infeasible;  // numerically stuck
                return res;
            }
            res.status = LpStatus::unbounded;
            return res;
        }
        pivot(enter, direction, leave_row >= 0 ? leave_row : -1, step, w);
        ++res.iterations;
        ++total_iterations_;

        if (step <= kStepEps) {
            if (++stall_count_ > opt_.stall_limit) bland_mode_ = true;
        } else {
            stall_count_ = 0;
            bland_mode_ = false;
        }

        if (leave_row >= 0 && ++etas_since_refactor >= opt_.refactor_interval) {
            reinvert();
            compute_basics();
            etas_since_refactor = 0;
        }
    }

    res.status = LpStatus::optimal;
    res.x.assign(x_.begin(), x_.begin() + n_);
    res.objective = 0.0;
    for (int j = 0; j < n_; ++j) res.objective += objective_[j] * x_[j];
    std::vector<double> y(m_, 0.0);
    for (int r = 0; r < m_; ++r) y[r] = cost_of(basic_of_row_[r]);
    btran(y);
    res.duals = std::move(y);
    return res;
}

LpResult SimplexSolver::solve() {
    etas_.clear();
    for (int r = 0; r < m_; ++r) basic_of_row_[r] = n_ + r;
    for (int j = 0; j < n_ + m_; ++j) {
        if (j >= n_) {
            state_[j] = kBasic;
            continue;
        }
        if (lower_[j] > -kInf) state_[j] = kAtLower;
        else if (upper_[j] < kInf) state_[j] = kAtUpper;
        else state_[j] = kFreeNb;
    }
    set_nonbasic_values();
    compute_basics();
    return run();
}

LpResult SimplexSolver::resolve(bool refactor) {
    if (refactor) reinvert();
    set_nonbasic_values();
    compute_basics();
    return run();
}

LpResult solve_lp(const LinearProgram& lp, SimplexSolver::Options opt) {
    SimplexSolver solver(lp, opt);
    return solver.solve();
}

}  // namespace ampguard::milp
