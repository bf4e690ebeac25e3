#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "json.hpp"

#include "error.hpp"
#include "lp.hpp"
#include "rng.hpp"

namespace hmmlab {

using nlohmann::json;

double sigma_min_l2(const Matrix& M) {
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    return sv[sv.size() - 1];
}

namespace {

// Face LP for a fixed sign pattern s: minimize ||T diag(s) z||_1 over the
// simplex z >= 0, sum z = 1, via the split p - q = T diag(s) z.
double face_minimum(const Matrix& T, const std::vector<int>& signs) {
    const int n = static_cast<int>(T.cols());
    const int r = static_cast<int>(T.rows());
    Matrix A = Matrix::Zero(r + 1, n + 2 * r);
    for (int j = 0; j < n; ++j) A.col(j).head(r) = T.col(j) * static_cast<double>(signs[j]);
    A.block(0, n, r, r) = -Matrix::Identity(r, r);
    A.block(0, n + r, r, r) = Matrix::Identity(r, r);
    A.row(r).head(n).setOnes();
    Vector b = Vector::Zero(r + 1);
    b[r] = 1.0;
    Vector c = Vector::Zero(n + 2 * r);
    c.tail(2 * r).setOnes();
    LpResult res = solve_lp_equality(A, b, c);
    if (!res.feasible || !res.bounded)
        throw Error(ErrorCode::Internal, "face LP unexpectedly infeasible or unbounded");
    return res.value;
}

double l1_gain(const Matrix& T, const Vector& x) {
    return (T * x).lpNorm<1>() / x.lpNorm<1>();
}

}  // namespace

SigmaMinL1 sigma_min_l1(const Matrix& T, SigmaMethod mode, const SigmaBudget& budget,
                        uint64_t seed) {
    if (T.rows() != T.cols())
        throw Error(ErrorCode::InvalidArgument, "sigma_min_l1 expects a square matrix");
    const int n = static_cast<int>(T.cols());
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "empty matrix");

    if (mode == SigmaMethod::Exact) {
        if (n > budget.exact_n_cap)
            throw Error(ErrorCode::BudgetExceeded,
                        "exact mode caps at n <= " + std::to_string(budget.exact_n_cap));
        // x and -x give the same gain, so fix the first sign positive.
        std::vector<int> signs(n, 1);
        double best = std::numeric_limits<double>::infinity();
        const uint64_t patterns = uint64_t{1} << (n - 1);
        for (uint64_t bits = 0; bits < patterns; ++bits) {
            for (int j = 1; j < n; ++j) signs[j] = (bits >> (j - 1)) & 1 ? -1 : 1;
            best = std::min(best, face_minimum(T, signs));
        }
        return {best, SigmaMethod::Exact};
    }

    // Projected subgradient descent on the l1 sphere, best restart polished
    // with one exact face LP. Result is an upper bound on the true gain.
    Rng rng(derive_seed(seed, "sigma1-heuristic"));
    Vector best_x;
    double best_val = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < budget.restarts; ++restart) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        x /= x.lpNorm<1>();
        for (int it = 0; it < budget.iterations; ++it) {
            Vector y = T * x;
            Vector g = T.transpose() * y.unaryExpr([](double v) {
                return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            });
            double step = 0.3 / std::sqrt(static_cast<double>(it + 1));
            x -= step * g;
            double norm = x.lpNorm<1>();
            if (norm < 1e-12) break;
            x /= norm;
            double val = l1_gain(T, x);
            if (val < best_val) {
                best_val = val;
                best_x = x;
            }
        }
    }
    if (best_x.size() == n) {
        std::vector<int> signs(n);
        for (int i = 0; i < n; ++i) signs[i] = best_x[i] < 0.0 ? -1 : 1;
        if (signs[0] < 0)
            for (int& s : signs) s = -s;
        best_val = std::min(best_val, face_minimum(T, signs));
    }
    return {best_val, SigmaMethod::HeuristicUpperBound};
}

VisitStatistic visit_statistic(const Matrix& T, int walk_len, int distinct_target,
                               int64_t trials, uint64_t seed) {
    if (T.rows() != T.cols()) throw Error(ErrorCode::InvalidArgument, "square matrix required");
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    const int n = static_cast<int>(T.rows());

    std::vector<std::vector<double>> cdfs(n);
    for (int j = 0; j < n; ++j) {
        cdfs[j].resize(n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += T(i, j);
            cdfs[j][i] = acc;
        }
    }

    Rng rng(derive_seed(seed, "visit"));
    std::vector<int> mark(n, -1);
    int epoch = 0;
    int64_t failures = 0;
    double worst = 0.0;
    for (int s0 = 0; s0 < n; ++s0) {
        int64_t state_trials = trials / n + (s0 < trials % n ? 1 : 0);
        if (state_trials == 0) state_trials = 1;
        int64_t state_failures = 0;
        for (int64_t t = 0; t < state_trials; ++t) {
            ++epoch;
            int cur = s0;
            mark[cur] = epoch;
            int distinct = 1;
            for (int step = 0; step < walk_len && distinct < distinct_target; ++step) {
                cur = rng.categorical_cdf(cdfs[cur]);
                if (mark[cur] != epoch) {
                    mark[cur] = epoch;
                    ++distinct;
                }
            }
            if (distinct < distinct_target) ++state_failures;
        }
        failures += state_failures;
        worst = std::max(worst,
                         static_cast<double>(state_failures) / static_cast<double>(state_trials));
    }

    VisitStatistic out;
    int64_t total = 0;
    for (int s0 = 0; s0 < n; ++s0) {
        int64_t st = trials / n + (s0 < trials % n ? 1 : 0);
        total += st == 0 ? 1 : st;
    }
    out.trials = total;
    out.delta_mean = static_cast<double>(failures) / static_cast<double>(total);
    out.delta_worst_state = worst;
    out.stderr_mean =
        std::sqrt(std::max(out.delta_mean * (1.0 - out.delta_mean), 0.0) /
                  static_cast<double>(total));
    return out;
}

MassProfile mass_profile(const Matrix& M, int d) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "d must be >= 1");
    MassProfile out;
    out.residuals.resize(static_cast<size_t>(M.cols()));
    std::vector<double> col(static_cast<size_t>(M.rows()));
    for (int j = 0; j < M.cols(); ++j) {
        for (int i = 0; i < M.rows(); ++i) col[static_cast<size_t>(i)] = M(i, j);
        std::sort(col.begin(), col.end(), std::greater<>());
        double residual = 0.0;
        for (size_t i = static_cast<size_t>(d); i < col.size(); ++i) residual += col[i];
        out.residuals[static_cast<size_t>(j)] = residual;
        out.max_residual = std::max(out.max_residual, residual);
    }
    return out;
}

int numerical_rank(const Matrix& M, double rel_tol) {
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > rel_tol * sv[0]) ++rank;
    return rank;
}

KruskalReport kruskal_check(const Matrix& A, const Matrix& B, const Matrix& C, double tol) {
    if (A.cols() != B.cols() || A.cols() != C.cols())
        throw Error(ErrorCode::DimensionMismatch, "factor column counts differ");
    const int k = static_cast<int>(A.cols());
    KruskalReport rep;
    rep.rank_a = numerical_rank(A, tol);
    rep.rank_b = numerical_rank(B, tol);
    double min_sep = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        double ni = C.col(i).norm();
        for (int j = i + 1; j < k; ++j) {
            double nj = C.col(j).norm();
            double sep = (ni == 0.0 || nj == 0.0)
                             ? 0.0
                             : (C.col(i) / ni - C.col(j) / nj).norm();
            min_sep = std::min(min_sep, sep);
        }
    }
    if (k == 1) min_sep = std::numeric_limits<double>::infinity();
    rep.min_c_pair_separation = min_sep;
    rep.satisfied = rep.rank_a == k && rep.rank_b == k && min_sep > tol;
    return rep;
}

uint64_t counting_rank_bound(int c, int m, int t) {
    if (c < 1 || t < c || m < 1)
        throw Error(ErrorCode::InvalidArgument, "need c >= 1, t >= c, m >= 1");
    double alphabet = std::pow(static_cast<double>(m), static_cast<double>(c));
    double base = 2.0 * t / c;
    double log2_result = alphabet * std::log2(base);
    if (log2_result >= 63.0) return std::numeric_limits<uint64_t>::max();
    double value = std::pow(base, alphabet);
    return static_cast<uint64_t>(std::ceil(value - 1e-9));
}

namespace {

uint64_t count_compositions(int symbols, int total) {
    // number of nonnegative integer vectors of length `symbols` summing to `total`
    if (symbols == 1) return 1;
    uint64_t count = 0;
    for (int x = 0; x <= total; ++x) count += count_compositions(symbols - 1, total - x);
    return count;
}

}  // namespace

uint64_t exact_count_vectors(int m, int c, int t) {
    if (c < 1 || t < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "bad arguments");
    double alphabet_d = std::pow(static_cast<double>(m), static_cast<double>(c));
    if (alphabet_d > (1 << 20))
        throw Error(ErrorCode::BudgetExceeded, "block alphabet m^c too large to enumerate");
    int alphabet = static_cast<int>(alphabet_d);
    uint64_t blocks = count_compositions(alphabet, t / c);
    uint64_t tail = 1;
    for (int i = 0; i < t % c; ++i) tail *= static_cast<uint64_t>(m);
    return blocks * tail;
}

double condition_number(const Matrix& A, int n) {
    Eigen::BDCSVD<Matrix> svd(A);
    const auto& sv = svd.singularValues();
    const double inf = std::numeric_limits<double>::infinity();
    if (sv.size() < n) return inf;
    double smax = sv[0], sn = sv[n - 1];
    if (sn < 1e-13 * smax) return inf;
    return smax / sn;
}

double condition_number_A(const Hmm& h, int tau, int64_t row_cap) {
    return condition_number(likelihood_matrix(h, tau, row_cap), h.n);
}

AssumptionProfile assumption_profile(const Hmm& h, const ProfileOptions& opts) {
    if (h.n < 2 || h.m < 2)
        throw Error(ErrorCode::InvalidArgument, "profile needs n >= 2 and m >= 2");
    AssumptionProfile p;
    const Vector pi = stationary(h);
    const Matrix Trev = time_reverse(h.T, pi);

    p.sigma2_T = sigma_min_l2(h.T);
    p.sigma2_Trev = sigma_min_l2(Trev);

    SigmaMethod mode = h.n <= opts.sigma_budget.exact_n_cap ? SigmaMethod::Exact
                                                            : SigmaMethod::HeuristicUpperBound;
    p.sigma1_T = sigma_min_l1(h.T, mode, opts.sigma_budget, derive_seed(opts.seed, "s1T")).value;
    p.sigma1_Trev =
        sigma_min_l1(Trev, mode, opts.sigma_budget, derive_seed(opts.seed, "s1R")).value;
    p.sigma1_exact = mode == SigmaMethod::Exact;

    const double logm = std::log(static_cast<double>(h.m));
    const double logn = std::log(static_cast<double>(h.n));
    p.walk_len = static_cast<int>(std::ceil(15.0 * logn / logm));
    // the asymptotic target 10 log_m n can exceed n at desk scale; a chain
    // can never visit more than n distinct states
    p.distinct_target = std::min(static_cast<int>(std::ceil(10.0 * logn / logm)), h.n);
    p.visit_T = visit_statistic(h.T, p.walk_len, p.distinct_target, opts.visit_trials,
                                derive_seed(opts.seed, "visitT"));
    p.visit_Trev = visit_statistic(Trev, p.walk_len, p.distinct_target, opts.visit_trials,
                                   derive_seed(opts.seed, "visitR"));

    const double delta_target = opts.delta_target > 0.0 ? opts.delta_target : 1.0 / h.n;
    auto smallest_support = [&delta_target](const Matrix& M) {
        int need = 1;
        for (int j = 0; j < M.cols(); ++j) {
            std::vector<double> col(static_cast<size_t>(M.rows()));
            for (int i = 0; i < M.rows(); ++i) col[static_cast<size_t>(i)] = M(i, j);
            std::sort(col.begin(), col.end(), std::greater<>());
            double residual = 1.0;
            for (int d = 1; d <= static_cast<int>(col.size()); ++d) {
                residual -= col[static_cast<size_t>(d - 1)];
                if (residual <= delta_target + 1e-15) {
                    need = std::max(need, d);
                    break;
                }
                if (d == static_cast<int>(col.size())) need = std::max(need, d);
            }
        }
        return need;
    };

    p.degree = opts.degree_target > 0
                   ? opts.degree_target
                   : std::max(smallest_support(h.T), smallest_support(Trev));
    p.delta2 = std::max(mass_profile(h.T, p.degree).max_residual,
                        mass_profile(Trev, p.degree).max_residual);
    p.support = opts.support_target > 0 ? opts.support_target : smallest_support(h.O);
    p.delta3 = mass_profile(h.O, p.support).max_residual;

    p.degree_bound = std::pow(static_cast<double>(h.m), 1.0 / p.c2);
    p.support_bound = std::pow(static_cast<double>(h.m), 1.0 / p.c3);

    const double sigma1_min = std::min(p.sigma1_T, p.sigma1_Trev);
    const double inf = std::numeric_limits<double>::infinity();
    p.c_min = sigma1_min > 0.0 ? std::max(0.0, -p.c1 * std::log(sigma1_min) / logm) : inf;
    double delta1 = std::max(p.visit_T.delta_worst_state, p.visit_Trev.delta_worst_state);
    double delta = std::max({delta1, p.delta2, p.delta3});
    p.c_max = delta > 0.0 ? -std::log(delta) / logn : inf;
    p.feasible = p.c_min < inf && p.c_min <= p.c_max;
    return p;
}

std::string AssumptionProfile::to_json() const {
    json j;
    j["sigma1_T"] = sigma1_T;
    j["sigma1_Trev"] = sigma1_Trev;
    j["sigma1_method"] = sigma1_exact ? "exact" : "heuristic-upper-bound";
    j["sigma2_T"] = sigma2_T;
    j["sigma2_Trev"] = sigma2_Trev;
    j["walk_len"] = walk_len;
    j["distinct_target"] = distinct_target;
    auto visit_json = [](const VisitStatistic& v) {
        json vj;
        vj["delta_mean"] = v.delta_mean;
        vj["delta_worst_state"] = v.delta_worst_state;
        vj["stderr"] = v.stderr_mean;
        vj["trials"] = v.trials;
        return vj;
    };
    j["visit_T"] = visit_json(visit_T);
    j["visit_Trev"] = visit_json(visit_Trev);
    j["degree"] = degree;
    j["delta2"] = delta2;
    j["support"] = support;
    j["delta3"] = delta3;
    j["constants"] = {{"c1", c1}, {"c2", c2}, {"c3", c3}};
    j["degree_bound"] = degree_bound;
    j["support_bound"] = support_bound;
    j["c_min"] = c_min;
    j["c_max"] = std::isinf(c_max) ? json(nullptr) : json(c_max);
    j["feasible"] = feasible;
    return j.dump(2);
}

}  // namespace hmmlab
