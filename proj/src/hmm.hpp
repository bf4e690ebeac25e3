#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "types.hpp"

namespace hmmlab {

// Columns of T and O are distributions: T(i, j) = P[h_{t+1} = i | h_t = j],
// O(i, j) = P[y_t = i | h_t = j]. Instances are immutable after construction.
struct Hmm {
    int n = 0;  // hidden states
    int m = 0;  // output symbols
    Matrix T;   // n x n, column-stochastic
    Matrix O;   // m x n, column-stochastic
    std::optional<Vector> pi;  // stationary distribution, if computed

    static Hmm make(Matrix transition, Matrix observation);
    static Hmm make_with_stationary(Matrix transition, Matrix observation);

    std::string to_json() const;
    static Hmm from_json(const std::string& text);
};

struct Violation {
    std::string what;
    int index = -1;      // offending column, or -1
    double residual = 0.0;
};

// past/future half-window likelihoods plus the joint output/state factor
struct LikelihoodFactors {
    int tau = 0;
    Matrix A;  // m^tau x n, P[future string | h_0]
    Matrix B;  // m^tau x n, P[past string | h_0]
    Matrix C;  // m x n,     P[y_0, h_0]
};

struct ObservationWindow {
    std::vector<int> symbols;  // length 2*tau + 1, center at index tau
};

std::vector<Violation> validate(const Hmm& h);

// Stationary distribution by power iteration from the uniform start, with a
// Cesaro-averaged second phase for periodic chains. Throws NonConvergent if
// neither phase reaches ||T pi - pi||_1 <= tol within the iteration cap.
Vector stationary(const Matrix& T, double tol = 1e-10, int max_iters = 100000);
Vector stationary(const Hmm& h);

// T'(i, j) = T(j, i) * pi(i) / pi(j); the reversed chain's kernel.
Matrix time_reverse(const Matrix& T, const Vector& pi);

std::vector<ObservationWindow> sample_windows(const Hmm& h, int tau, int64_t count,
                                              uint64_t seed);

inline constexpr int64_t kDefaultRowCap = int64_t{1} << 20;

// m^tau with a SizeCap guard.
int64_t window_row_count(int m, int tau, int64_t cap = kDefaultRowCap);

// A^{(tau)} by the Khatri-Rao recursion: A^{(1)} = O T, A^{(t)} = (O kr A^{(t-1)}) T.
// Row L(l_1..l_tau) is big-endian base-m with l_1 most significant. Only
// t >= 1 is exposed; the recursion's t = 0 base O T is already the one-step
// likelihood, so indices here name the window length emitted.
Matrix likelihood_matrix(const Hmm& h, int tau, int64_t row_cap = kDefaultRowCap);

// Same recursion on the time-reversed chain; row L(l_{-1}, l_{-2}, ..., l_{-tau})
// indexes the past string most-recent-first.
Matrix reverse_likelihood_matrix(const Hmm& h, int tau, int64_t row_cap = kDefaultRowCap);

// C(l, i) = O(l, i) * pi(i)
Matrix joint_factor(const Hmm& h);

LikelihoodFactors likelihood_factors(const Hmm& h, int tau, int64_t row_cap = kDefaultRowCap);

}  // namespace hmmlab
