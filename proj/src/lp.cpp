#include "lp.hpp"

#include <cmath>
#include <vector>

#include "error.hpp"

namespace hmmlab {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau rows: constraints, last row: reduced costs with negated objective
// value in the rhs slot. Bland's rule keeps degenerate LPs from cycling.
class Tableau {
  public:
    Tableau(const Matrix& A, const Vector& b, int extra_cols)
        : rows_(static_cast<int>(A.rows())), cols_(static_cast<int>(A.cols()) + extra_cols) {
        body_ = Matrix::Zero(rows_ + 1, cols_ + 1);
        body_.topLeftCorner(rows_, A.cols()) = A;
        body_.col(cols_).head(rows_) = b;
        basis_.assign(rows_, -1);
    }

    double& at(int r, int c) { return body_(r, c); }
    double rhs(int r) const { return body_(r, cols_); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(int row, int col) {
        body_.row(row) /= body_(row, col);
        for (int r = 0; r <= rows_; ++r) {
            if (r == row) continue;
            double f = body_(r, col);
            if (f != 0.0) body_.row(r) -= f * body_.row(row);
        }
        basis_[row] = col;
    }

    // Returns false when the objective is unbounded below.
    bool optimize(const std::vector<char>& allowed) {
        for (;;) {
            int enter = -1;
            for (int c = 0; c < cols_; ++c) {
                if (!allowed[c]) continue;
                if (body_(rows_, c) < -kPivotTol) {
                    enter = c;
                    break;  // Bland: smallest eligible index
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best_ratio = 0.0;
            for (int r = 0; r < rows_; ++r) {
                double a = body_(r, enter);
                if (a <= kPivotTol) continue;
                double ratio = body_(r, cols_) / a;
                if (leave < 0 || ratio < best_ratio - kPivotTol ||
                    (std::abs(ratio - best_ratio) <= kPivotTol && basis_[r] < basis_[leave])) {
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void set_costs(const Vector& c) {
        body_.row(rows_).setZero();
        body_.row(rows_).head(c.size()) = c.transpose();
        // canonicalize against the current basis
        for (int r = 0; r < rows_; ++r) {
            int bc = basis_[r];
            double f = body_(rows_, bc);
            if (f != 0.0) body_.row(rows_) -= f * body_.row(r);
        }
    }

  private:
    int rows_, cols_;
    Matrix body_;
    std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp_equality(const Matrix& A, const Vector& b, const Vector& c) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (b.size() != m || c.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "LP shapes disagree");

    // Flip rows so b >= 0, then start phase 1 from an artificial basis.
    Matrix A2 = A;
    Vector b2 = b;
    for (int r = 0; r < m; ++r)
        if (b2[r] < 0.0) {
            A2.row(r) = -A2.row(r);
            b2[r] = -b2[r];
        }

    Tableau tab(A2, b2, m);
    for (int r = 0; r < m; ++r) {
        tab.at(r, n + r) = 1.0;
        tab.basis()[r] = n + r;
    }

    std::vector<char> allowed(static_cast<size_t>(n + m), 1);
    Vector phase1_costs = Vector::Zero(n + m);
    phase1_costs.tail(m).setConstant(1.0);
    tab.set_costs(phase1_costs);
    tab.optimize(allowed);

    double infeas = -tab.at(m, n + m);
    if (infeas > 1e-8) {
        LpResult res;
        res.feasible = false;
        return res;
    }

    // Drive remaining artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
        if (tab.basis()[r] < n) continue;
        int col = -1;
        for (int cidx = 0; cidx < n; ++cidx)
            if (std::abs(tab.at(r, cidx)) > 1e-9) {
                col = cidx;
                break;
            }
        if (col >= 0) tab.pivot(r, col);
        // else: redundant row; the artificial stays basic at zero
    }
    for (int j = n; j < n + m; ++j) allowed[static_cast<size_t>(j)] = 0;

    Vector phase2_costs = Vector::Zero(n + m);
    phase2_costs.head(n) = c;
    tab.set_costs(phase2_costs);
    bool bounded = tab.optimize(allowed);

    LpResult res;
    res.feasible = true;
    res.bounded = bounded;
    res.x = Vector::Zero(n);
    for (int r = 0; r < m; ++r)
        if (tab.basis()[r] < n) res.x[tab.basis()[r]] = tab.rhs(r);
    res.value = c.dot(res.x);
    return res;
}

}  // namespace hmmlab
