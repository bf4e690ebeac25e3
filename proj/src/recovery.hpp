#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmm.hpp"
#include "moments.hpp"
#include "tensor.hpp"

namespace hmmlab {

struct AlignmentErrors {
    std::vector<int> permutation;    // recovered column i matches reference column perm[i]
    double max_col_l1_T = 0.0;
    double max_col_l1_O = 0.0;
    double total_l1_T = 0.0;
    double total_l1_O = 0.0;
};

struct RecoveredHmm {
    Matrix That;  // n x n, column sums 1 after repair
    Matrix Ohat;  // m x n
    double clamped_mass = 0.0;            // negative mass zeroed during repair
    DecompositionResult decomposition;    // diagnostics from the tensor step
    std::optional<AlignmentErrors> alignment;  // present when a reference was supplied

    std::string report_json() const;
};

struct RecoveryOptions {
    DecompositionOptions decomposition;
    double rank_tol = 1e-10;  // rank check for the O kr A^{(tau-1)} system
};

// Options tolerant enough for empirical (sampled) moment tensors: accept the
// best pairing found and project complex eigenvalue noise to the real part.
RecoveryOptions noisy_recovery_options();

// Optimal assignment between the columns of X and Y under l1 distance.
std::pair<std::vector<int>, std::vector<double>> align_columns(const Matrix& X,
                                                               const Matrix& Y);

// Sum rows sharing their first tau-1 symbols: A^{(tau)} -> A^{(tau-1)}.
Matrix marginalize_last(const Matrix& A, int m);

// Full pipeline: decompose the moment tensor with k = n, normalize C into
// Ohat, rebuild That = pinv(Ohat kr A^{(tau-1)}) A^{(tau)}, and repair the
// stochastic structure. When a reference model is given, columns are aligned
// through the stacked [O; A] factors so aliased output states stay separable.
RecoveredHmm recover(const MomentTensor& M, int n, uint64_t seed,
                     const RecoveryOptions& opts = {},
                     const Hmm* reference = nullptr);

}  // namespace hmmlab
