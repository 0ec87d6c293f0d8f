#include "ampguard/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ampguard/csv.hpp"
#include "ampguard/kvfile.hpp"

namespace ampguard::milp {

void SparseBuilder::add(int row, int col, double v) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw std::invalid_argument("SparseBuilder: index out of range");
    if (v != 0.0) entries_.push_back({row, col, v});
}

SparseMatrix SparseBuilder::compress() const {
    SparseMatrix m;
    m.rows = rows_;
    m.cols = cols_;
    m.col_start.assign(cols_ + 1, 0);
    for (const auto& e : entries_) ++m.col_start[e.col + 1];
    for (int c = 0; c < cols_; ++c) m.col_start[c + 1] += m.col_start[c];
    m.row_index.resize(entries_.size());
    m.value.resize(entries_.size());
    std::vector<int> next(m.col_start.begin(), m.col_start.end() - 1);
    for (const auto& e : entries_) {
        int pos = next[e.col]++;
        m.row_index[pos] = e.row;
        m.value[pos] = e.v;
    }
    // Merge duplicates within each column (sorted by insertion row order).
    SparseMatrix out;
    out.rows = rows_;
    out.cols = cols_;
    out.col_start.assign(cols_ + 1, 0);
    std::vector<double> work(rows_, 0.0);
    std::vector<int> touched;
    for (int c = 0; c < cols_; ++c) {
        touched.clear();
        for (int k = m.col_start[c]; k < m.col_start[c + 1]; ++k) {
            int r = m.row_index[k];
            if (work[r] == 0.0) touched.push_back(r);
            work[r] += m.value[k];
        }
        std::sort(touched.begin(), touched.end());
        for (int r : touched) {
            if (work[r] != 0.0) {
                out.row_index.push_back(r);
                out.value.push_back(work[r]);
            }
            work[r] = 0.0;
        }
        out.col_start[c + 1] = static_cast<int>(out.value.size());
    }
    return out;
}

void LinearProgram::validate() const {
    auto check_dim = [&](const SparseMatrix& m, size_t nb, const char* what) {
        if (m.cols != num_vars || m.rows != static_cast<int>(nb))
            throw std::invalid_argument(std::string("LinearProgram: ") + what +
                                        " dimensions inconsistent");
    };
    if (static_cast<int>(objective.size()) != num_vars ||
        static_cast<int>(lower.size()) != num_vars ||
        static_cast<int>(upper.size()) != num_vars)
        throw std::invalid_argument("LinearProgram: vector sizes inconsistent");
    check_dim(a_eq, b_eq.size(), "a_eq");
    check_dim(a_in, b_in.size(), "a_in");
    for (int j = 0; j < num_vars; ++j)
        if (lower[j] > upper[j])
            throw std::invalid_argument("LinearProgram: lower > upper at var " +
                                        std::to_string(j));
}

std::string LinearProgram::name_of(int var) const {
    if (var < static_cast<int>(var_names.size()) && !var_names[var].empty())
        return var_names[var];
    return "x" + std::to_string(var);
}

namespace {

void append_terms(std::ostringstream& out, const std::vector<std::pair<int, double>>& terms,
                  const LinearProgram& lp) {
    bool first = true;
    for (const auto& [var, coef] : terms) {
        if (coef >= 0.0 && !first) out << " +";
        if (coef < 0.0) out << " -";
        else if (first) out << " ";
        out << " " << format_double(std::abs(coef)) << " " << lp.name_of(var);
        first = false;
    }
    if (first) out << " 0 " << lp.name_of(0);
}

// Row-major view of a CSC matrix.
std::vector<std::vector<std::pair<int, double>>> rows_of(const SparseMatrix& m) {
    std::vector<std::vector<std::pair<int, double>>> rows(m.rows);
    for (int c = 0; c < m.cols; ++c)
        for (int k = m.col_start[c]; k < m.col_start[c + 1]; ++k)
            rows[m.row_index[k]].push_back({c, m.value[k]});
    return rows;
}

}  // namespace

std::string write_lp_file(const MilpProblem& p, const std::string& name) {
    const LinearProgram& lp = p.lp;
    lp.validate();
    std::ostringstream out;
    out << "\\ " << name << "\n";
    for (const auto& iv : p.integers) {
        bool contiguous = true;
        for (size_t i = 1; i < iv.allowed.size(); ++i)
            contiguous &= (iv.allowed[i] - iv.allowed[i - 1] == 1.0);
        if (!contiguous) {
            out << "\\ allowed-set " << lp.name_of(iv.index) << " :";
            for (double v : iv.allowed) out << " " << format_double(v);
            out << "\n";
        }
    }
    out << "Minimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.objective[j] != 0.0) obj.push_back({j, lp.objective[j]});
    append_terms(out, obj, lp);
    out << "\nSubject To\n";
    auto eq_rows = rows_of(lp.a_eq);
    for (size_t r = 0; r < eq_rows.size(); ++r) {
        out << " e" << r << ":";
        append_terms(out, eq_rows[r], lp);
        out << " = " << format_double(lp.b_eq[r]) << "\n";
    }
    auto in_rows = rows_of(lp.a_in);
    for (size_t r = 0; r < in_rows.size(); ++r) {
        out << " i" << r << ":";
        append_terms(out, in_rows[r], lp);
        out << " <= " << format_double(lp.b_in[r]) << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < lp.num_vars; ++j) {
        double lo = lp.lower[j], hi = lp.upper[j];
        if (lo == -kInf && hi == kInf) {
            out << " " << lp.name_of(j) << " free\n";
        } else if (lo == -kInf) {
            out << " -inf <= " << lp.name_of(j) << " <= " << format_double(hi) << "\n";
        } else if (hi == kInf) {
            out << " " << format_double(lo) << " <= " << lp.name_of(j) << "\n";
        } else {
            out << " " << format_double(lo) << " <= " << lp.name_of(j) << " <= "
                << format_double(hi) << "\n";
        }
    }
    if (!p.integers.empty()) {
        out << "General\n";
        for (const auto& iv : p.integers) out << " " << lp.name_of(iv.index) << "\n";
    }
    out << "End\n";
    return out.str();
}

void save_lp_file(const MilpProblem& p, const std::string& path,
                  const std::string& name) {
    write_file_atomic(path, write_lp_file(p, name));
}

namespace {

struct Token {
    std::string text;
};

std::vector<std::string> tokenize_lp(const std::string& text,
                                     std::map<std::string, std::vector<double>>* sets) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '\\') {
            std::istringstream ls(line.substr(1));
            std::string word;
            ls >> word;
            if (word == "allowed-set" && sets) {
                std::string var, colon;
                ls >> var >> colon;
                std::vector<double> vals;
                double v;
                while (ls >> v) vals.push_back(v);
                (*sets)[var] = vals;
            }
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            // Split leading sign characters glued to names/numbers.
            while (tok.size() > 1 && (tok[0] == '+' || tok[0] == '-') &&
                   !(std::isdigit(tok[1]) || tok[1] == '.')) {
                tokens.push_back(std::string(1, tok[0]));
                tok.erase(0, 1);
            }
            tokens.push_back(tok);
        }
    }
    return tokens;
}

bool is_number(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
    *out = v;
    return true;
}

}  // namespace

MilpProblem parse_lp_file(const std::string& text) {
    std::map<std::string, std::vector<double>> allowed_sets;
    auto tokens = tokenize_lp(text, &allowed_sets);

    enum Section { NONE, OBJ, CONS, BOUNDS, GENERAL, BINARY, DONE };
    Section section = NONE;

    std::map<std::string, int> var_index;
    std::vector<std::string> var_names;
    auto var_of = [&](const std::string& name) {
        auto it = var_index.find(name);
        if (it != var_index.end()) return it->second;
        int idx = static_cast<int>(var_names.size());
        var_index[name] = idx;
        var_names.push_back(name);
        return idx;
    };

    struct Row {
        std::vector<std::pair<int, double>> terms;
        char sense;  // '=', '<', '>'
        double rhs;
    };
    std::vector<std::pair<int, double>> obj;
    std::vector<Row> rows;
    struct BoundSpec {
        double lo = 0.0, hi = kInf;
        bool lo_set = false, hi_set = false, free_var = false;
    };
    std::map<int, BoundSpec> bounds;
    std::vector<std::string> generals, binaries;

    size_t i = 0;
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(c));
        return s;
    };
    // Expression parser shared by objective and constraints: reads sign/coef/var
    // triples until a terminator token.
    auto parse_expr = [&](size_t& pos, std::vector<std::pair<int, double>>& terms,
                          const std::vector<std::string>& stops) {
        double sign = 1.0;
        std::optional<double> coef;
        while (pos < tokens.size()) {
            const std::string& t = tokens[pos];
            std::string lt = lower(t);
            bool stop = t == "=" || t == "<=" || t == ">=" || t == "<" || t == ">";
            for (const auto& s : stops) stop |= (lt == s);
            if (stop && !coef) break;
            ++pos;
            if (t == "+") continue;
            if (t == "-") {
                sign = -sign;
                continue;
            }
            double num;
            if (is_number(t, &num)) {
                coef = (coef ? *coef : 1.0) * num;
                continue;
            }
            if (t.size() > 1 && t.back() == ':') continue;  // row label
            terms.push_back({var_of(t), sign * (coef ? *coef : 1.0)});
            sign = 1.0;
            coef.reset();
        }
    };

    while (i < tokens.size()) {
        std::string lt = lower(tokens[i]);
        if (lt == "minimize" || lt == "min") {
            section = OBJ;
            ++i;
            if (i < tokens.size() && tokens[i] == "obj:") ++i;
            parse_expr(i, obj, {"subject", "st", "s.t.", "end"});
            continue;
        }
        if (lt == "subject") {
            section = CONS;
            i += 2;  // "Subject To"
            continue;
        }
        if (lt == "st" || lt == "s.t.") {
            section = CONS;
            ++i;
            continue;
        }
        if (lt == "bounds") {
            section = BOUNDS;
            ++i;
            continue;
        }
        if (lt == "general" || lt == "generals" || lt == "integer" ||
            lt == "integers") {
            section = GENERAL;
            ++i;
            continue;
        }
        if (lt == "binary" || lt == "binaries" || lt == "bin") {
            section = BINARY;
            ++i;
            continue;
        }
        if (lt == "end") break;

        if (section == CONS) {
            Row row;
            parse_expr(i, row.terms, {"bounds", "general", "binary", "end"});
            if (i >= tokens.size())
                throw std::runtime_error("LP file: constraint missing relation");
            std::string rel = tokens[i++];
            row.sense = rel == "=" ? '=' : (rel[0] == '<' ? '<' : '>');
            double rhs;
            if (i >= tokens.size() || !is_number(tokens[i], &rhs))
                throw std::runtime_error("LP file: constraint missing rhs");
            ++i;
            row.rhs = rhs;
            rows.push_back(std::move(row));
            continue;
        }
        if (section == BOUNDS) {
            // Forms:  L <= x <= U | L <= x | x <= U | x free | x >= L | x = V
            std::vector<std::string> stmt;
            double num;
            // Gather until the pattern completes; detect section keywords.
            if (lower(tokens[i]) == "end") break;
            if (is_number(tokens[i], &num) || tokens[i] == "-inf" ||
                tokens[i] == "+inf") {
                // L <= x [<= U]
                double lo = tokens[i] == "-inf" ? -kInf : num;
                i += 2;  // skip "<="
                int v = var_of(tokens[i++]);
                auto& b = bounds[v];
                b.lo = lo;
                b.lo_set = true;
                if (i < tokens.size() && (tokens[i] == "<=" || tokens[i] == "<")) {
                    ++i;
                    double hi = tokens[i] == "+inf" ? kInf : std::stod(tokens[i]);
                    ++i;
                    b.hi = hi;
                    b.hi_set = true;
                }
            } else {
                int v = var_of(tokens[i++]);
                auto& b = bounds[v];
                if (i < tokens.size() && lower(tokens[i]) == "free") {
                    b.free_var = true;
                    ++i;
                } else if (i < tokens.size()) {
                    std::string rel = tokens[i++];
                    double val = tokens[i] == "+inf"  ? kInf
                                 : tokens[i] == "-inf" ? -kInf
                                                       : std::stod(tokens[i]);
                    ++i;
                    if (rel == "<=" || rel == "<") {
                        b.hi = val;
                        b.hi_set = true;
                    } else if (rel == ">=" || rel == ">") {
                        b.lo = val;
                        b.lo_set = true;
                    } else {  // '='
                        b.lo = b.hi = val;
                        b.lo_set = b.hi_set = true;
                    }
                }
            }
            continue;
        }
        if (section == GENERAL || section == BINARY) {
            (section == GENERAL ? generals : binaries).push_back(tokens[i++]);
            continue;
        }
        ++i;
    }

    MilpProblem p;
    LinearProgram& lp = p.lp;
    lp.num_vars = static_cast<int>(var_names.size());
    lp.var_names = var_names;
    lp.objective.assign(lp.num_vars, 0.0);
    for (const auto& [v, c] : obj) lp.objective[v] += c;
    lp.lower.assign(lp.num_vars, 0.0);
    lp.upper.assign(lp.num_vars, kInf);
    for (const auto& [v, b] : bounds) {
        if (b.free_var) {
            lp.lower[v] = -kInf;
            lp.upper[v] = kInf;
        } else {
            if (b.lo_set) lp.lower[v] = b.lo;
            if (b.hi_set) lp.upper[v] = b.hi;
        }
    }

    int n_eq = 0, n_in = 0;
    for (const auto& r : rows) (r.sense == '=' ? n_eq : n_in)++;
    SparseBuilder eq(n_eq, lp.num_vars), in(n_in, lp.num_vars);
    lp.b_eq.resize(n_eq);
    lp.b_in.resize(n_in);
    int ie = 0, ii = 0;
    for (const auto& r : rows) {
        if (r.sense == '=') {
            for (auto& [v, c] : r.terms) eq.add(ie, v, c);
            lp.b_eq[ie++] = r.rhs;
        } else {
            double flip = r.sense == '>' ? -1.0 : 1.0;
            for (auto& [v, c] : r.terms) in.add(ii, v, flip * c);
            lp.b_in[ii++] = flip * r.rhs;
        }
    }
    lp.a_eq = eq.compress();
    lp.a_in = in.compress();

    for (const auto& name : binaries) {
        int v = var_of(name);
        p.integers.push_back({v, {0.0, 1.0}});
        lp.lower[v] = std::max(lp.lower[v], 0.0);
        lp.upper[v] = std::min(lp.upper[v], 1.0);
    }
    for (const auto& name : generals) {
        int v = var_of(name);
        auto it = allowed_sets.find(name);
        if (it != allowed_sets.end()) {
            p.integers.push_back({v, it->second});
        } else {
            double lo = std::ceil(lp.lower[v]);
            double hi = lp.upper[v] == kInf ? lo + 1e6 : std::floor(lp.upper[v]);
            std::vector<double> allowed;
            for (double x = lo; x <= hi && allowed.size() < 2000000; x += 1.0)
                allowed.push_back(x);
            p.integers.push_back({v, std::move(allowed)});
        }
    }
    lp.validate();
    return p;
}

MilpProblem load_lp_file(const std::string& path) {
    return parse_lp_file(read_file(path));
}

}  // namespace ampguard::milp
