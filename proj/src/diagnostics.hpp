#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmm.hpp"
#include "types.hpp"

namespace hmmlab {

// smallest singular value
double sigma_min_l2(const Matrix& M);

enum class SigmaMethod { Exact, HeuristicUpperBound };

struct SigmaBudget {
    int restarts = 20;
    int iterations = 300;
    int exact_n_cap = 16;
};

struct SigmaMinL1 {
    double value = 0.0;
    SigmaMethod method = SigmaMethod::Exact;
};

// Minimum l1 gain min_x ||Tx||_1 / ||x||_1. Exact mode enumerates the
// 2^(n-1) sign patterns and solves one LP per face (n <= budget.exact_n_cap,
// else BudgetExceeded). Heuristic mode runs projected subgradient descent
// with restarts, polishes the best face with one LP, and is tagged as an
// upper bound only.
SigmaMinL1 sigma_min_l1(const Matrix& T, SigmaMethod mode, const SigmaBudget& budget = {},
                        uint64_t seed = 0);

struct VisitStatistic {
    double delta_mean = 0.0;        // failure fraction, uniform over start states
    double delta_worst_state = 0.0; // worst per-start-state failure fraction
    double stderr_mean = 0.0;
    int64_t trials = 0;
};

// Fraction of length-walk_len walks that visit fewer than distinct_target
// distinct states; trials stratified across start states.
VisitStatistic visit_statistic(const Matrix& T, int walk_len, int distinct_target,
                               int64_t trials, uint64_t seed);

struct MassProfile {
    std::vector<double> residuals;  // per column, mass outside the top d entries
    double max_residual = 0.0;
};

MassProfile mass_profile(const Matrix& M, int d);

struct KruskalReport {
    int rank_a = 0;
    int rank_b = 0;
    double min_c_pair_separation = 0.0;  // min over pairs of normalized column distance
    bool satisfied = false;
};

KruskalReport kruskal_check(const Matrix& A, const Matrix& B, const Matrix& C,
                            double tol = 1e-8);

// (2t/c)^(m^c), saturating instead of overflowing.
uint64_t counting_rank_bound(int c, int m, int t);

// Exact number of distinct (block count vector, partial block) outcomes for
// windows of length t over unions of c-cycles: enumerated count vectors of
// floor(t/c) blocks over the m^c block alphabet, times m^(t mod c).
uint64_t exact_count_vectors(int m, int c, int t);

int numerical_rank(const Matrix& M, double rel_tol = 1e-8);

// sigma_max / sigma_n with a +infinity sentinel when sigma_n underflows
// relative to sigma_max.
double condition_number(const Matrix& A, int n);

double condition_number_A(const Hmm& h, int tau, int64_t row_cap = kDefaultRowCap);

struct ProfileOptions {
    int degree_target = 0;      // 0: derive smallest d' per state for delta_target
    int support_target = 0;     // 0: derive smallest k' per state
    double delta_target = 0.0;  // 0: defaults to 1/n
    int64_t visit_trials = 100000;
    SigmaBudget sigma_budget;
    uint64_t seed = 0;
};

// Everything the learnability conditions measure, with the implied feasible
// range for the exponent c (assumption 1 lower-bounds c, assumptions 2-4
// upper-bound it through delta <= 1/n^c).
struct AssumptionProfile {
    double sigma1_T = 0.0, sigma1_Trev = 0.0;
    bool sigma1_exact = false;
    double sigma2_T = 0.0, sigma2_Trev = 0.0;
    int walk_len = 0, distinct_target = 0;
    VisitStatistic visit_T, visit_Trev;
    int degree = 0;          // max over states of the minimal d'
    double delta2 = 0.0;     // max residual outside the top `degree` targets (T and T')
    int support = 0;         // max over states of the minimal k'
    double delta3 = 0.0;     // max residual outside the top `support` outputs
    double c1 = 20.0, c2 = 16.0, c3 = 10.0;
    double degree_bound = 0.0;   // m^(1/c2)
    double support_bound = 0.0;  // m^(1/c3)
    double c_min = 0.0;   // from sigma1 >= 1/m^(c/c1)
    double c_max = 0.0;   // from delta_i <= 1/n^c
    bool feasible = false;

    std::string to_json() const;
};

AssumptionProfile assumption_profile(const Hmm& h, const ProfileOptions& opts = {});

}  // namespace hmmlab
