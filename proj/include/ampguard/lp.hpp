#pragma once

#include <limits>
#include <string>
#include <vector>

namespace ampguard::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Compressed-sparse-column matrix.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> col_start;  // size cols + 1
    std::vector<int> row_index;
    std::vector<double> value;

    int nnz() const { return static_cast<int>(value.size()); }
};

/// Triplet accumulator compressed into column order.
class SparseBuilder {
public:
    SparseBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
    void add(int row, int col, double v);
    SparseMatrix compress() const;
    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    struct Entry {
        int row, col;
        double v;
    };
    int rows_, cols_;
    std::vector<Entry> entries_;
};

/// minimize c'x  s.t.  a_eq x = b_eq,  a_in x <= b_in,  lower <= x <= upper.
struct LinearProgram {
    int num_vars = 0;
    std::vector<double> objective;
    SparseMatrix a_eq;
    std::vector<double> b_eq;
    SparseMatrix a_in;
    std::vector<double> b_in;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> var_names;  // optional; generated when empty

    void validate() const;  // throws std::invalid_argument on inconsistency
    std::string name_of(int var) const;
};

/// Integer restriction: the variable may take only the listed values
/// (sorted ascending), e.g. {0,1} or {0,2,3,4}.
struct IntegerVar {
    int index = 0;
    std::vector<double> allowed;
};

struct MilpProblem {
    LinearProgram lp;
    std::vector<IntegerVar> integers;
};

/// Fixed-layout LP-file text (CPLEX-style sections). Non-contiguous allowed
/// sets are exported as general integers over [min,max] with a comment noting
/// the exact set, since the format cannot express holes.
std::string write_lp_file(const MilpProblem& p, const std::string& name = "ampguard");
void save_lp_file(const MilpProblem& p, const std::string& path,
                  const std::string& name = "ampguard");
MilpProblem parse_lp_file(const std::string& text);
MilpProblem load_lp_file(const std::string& path);

}  // namespace ampguard::milp
