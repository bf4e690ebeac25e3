#include "recovery.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "json.hpp"

#include "assignment.hpp"
#include "error.hpp"

namespace hmmlab {

using nlohmann::json;

RecoveryOptions noisy_recovery_options() {
    RecoveryOptions opts;
    opts.decomposition.pairing_tol = 1e12;
    opts.decomposition.imag_tol = 1e12;
    opts.decomposition.rank_tol = 1e-8;
    opts.rank_tol = 1e-8;
    return opts;
}

std::pair<std::vector<int>, std::vector<double>> align_columns(const Matrix& X,
                                                               const Matrix& Y) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols())
        throw Error(ErrorCode::DimensionMismatch, "align_columns shapes differ");
    const int k = static_cast<int>(X.cols());
    Matrix cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) cost(i, j) = (X.col(i) - Y.col(j)).lpNorm<1>();
    std::vector<int> perm = min_cost_assignment(cost);
    std::vector<double> dist(k);
    for (int i = 0; i < k; ++i) dist[i] = cost(i, perm[i]);
    return {perm, dist};
}

Matrix marginalize_last(const Matrix& A, int m) {
    if (m < 1 || A.rows() % m != 0)
        throw Error(ErrorCode::DimensionMismatch, "row count not divisible by m");
    if (A.rows() == m)
        throw Error(ErrorCode::DimensionMismatch, "marginalize_last needs tau >= 2");
    const int64_t out_rows = A.rows() / m;
    Matrix out = Matrix::Zero(out_rows, A.cols());
    for (int64_t r = 0; r < out_rows; ++r)
        for (int s = 0; s < m; ++s) out.row(r) += A.row(r * m + s);
    return out;
}

namespace {

double clamp_and_renormalize(Matrix& M) {
    double clamped = 0.0;
    for (int c = 0; c < M.cols(); ++c) {
        for (int r = 0; r < M.rows(); ++r)
            if (M(r, c) < 0.0) {
                clamped += -M(r, c);
                M(r, c) = 0.0;
            }
        double sum = M.col(c).sum();
        if (sum > 0.0) M.col(c) /= sum;
    }
    return clamped;
}

}  // namespace

RecoveredHmm recover(const MomentTensor& M, int n, uint64_t seed,
                     const RecoveryOptions& opts, const Hmm* reference) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
    if (M.tensor.d1() < n)
        throw Error(ErrorCode::InvalidArgument, "need n <= m^tau for recovery");
    const int m = M.m;
    const int tau = M.tau;

    RecoveredHmm out;
    out.decomposition = simultaneous_diagonalize(M.tensor, n, seed, opts.decomposition);
    const Matrix& Ahat = out.decomposition.Ahat;   // estimated A^{(tau)}, column sums 1

    // O from C: each column of C is O_i scaled by the stationary mass.
    Matrix Ohat(m, n);
    for (int i = 0; i < n; ++i) {
        double mass = out.decomposition.Chat.col(i).sum();
        if (!(mass > 0.0))
            throw Error(ErrorCode::RankDeficient,
                        "recovered joint factor column has nonpositive mass");
        Ohat.col(i) = out.decomposition.Chat.col(i) / mass;
    }

    Matrix That;
    if (tau >= 2) {
        Matrix A_prev = marginalize_last(Ahat, m);
        Matrix KR = khatri_rao(Ohat, A_prev);
        Eigen::BDCSVD<Matrix> svd(KR);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > opts.rank_tol * sv[0]) ++rank;
        if (rank < n)
            throw Error(ErrorCode::RankDeficient,
                        "O kr A^{(tau-1)} has numerical rank below n");
        That = pinv(KR, opts.rank_tol) * Ahat;
    } else {
        // tau = 1: A^{(1)} = O T directly.
        Eigen::BDCSVD<Matrix> svd(Ohat);
        const auto& sv = svd.singularValues();
        if (sv[sv.size() - 1] <= opts.rank_tol * sv[0])
            throw Error(ErrorCode::RankDeficient, "Ohat has numerical rank below n");
        That = pinv(Ohat, opts.rank_tol) * Ahat;
    }

    out.clamped_mass = clamp_and_renormalize(That);
    out.clamped_mass += clamp_and_renormalize(Ohat);
    out.That = std::move(That);
    out.Ohat = Ohat;

    if (reference != nullptr) {
        if (reference->n != n || reference->m != m)
            throw Error(ErrorCode::DimensionMismatch, "reference model has wrong shape");
        Matrix A_ref = likelihood_matrix(*reference, tau);
        Matrix stacked_rec(m + Ahat.rows(), n);
        stacked_rec << out.Ohat, Ahat;
        Matrix stacked_ref(m + A_ref.rows(), n);
        stacked_ref << reference->O, A_ref;
        auto [perm, dist] = align_columns(stacked_rec, stacked_ref);
        (void)dist;

        AlignmentErrors align;
        align.permutation = perm;
        for (int j = 0; j < n; ++j) {
            double dO = (out.Ohat.col(j) - reference->O.col(perm[j])).lpNorm<1>();
            align.total_l1_O += dO;
            align.max_col_l1_O = std::max(align.max_col_l1_O, dO);
            double dT = 0.0;
            for (int i = 0; i < n; ++i)
                dT += std::abs(out.That(i, j) - reference->T(perm[i], perm[j]));
            align.total_l1_T += dT;
            align.max_col_l1_T = std::max(align.max_col_l1_T, dT);
        }
        out.alignment = std::move(align);
    }
    return out;
}

std::string RecoveredHmm::report_json() const {
    json j;
    auto matrix_json = [](const Matrix& M) {
        json rows = json::array();
        for (int i = 0; i < M.rows(); ++i) {
            json row = json::array();
            for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["That"] = matrix_json(That);
    j["Ohat"] = matrix_json(Ohat);
    j["clamped_mass"] = clamped_mass;
    json diag;
    diag["reconstruction_error"] = decomposition.reconstruction_error;
    diag["retries_used"] = decomposition.retries_used;
    diag["clamped_mass"] = decomposition.clamped_mass;
    json residuals = json::array();
    for (int i = 0; i < decomposition.pairing_residuals.size(); ++i)
        residuals.push_back(decomposition.pairing_residuals[i]);
    diag["pairing_residuals"] = std::move(residuals);
    j["decomposition"] = std::move(diag);
    if (alignment) {
        json a;
        a["permutation"] = alignment->permutation;
        a["max_col_l1_T"] = alignment->max_col_l1_T;
        a["max_col_l1_O"] = alignment->max_col_l1_O;
        a["total_l1_T"] = alignment->total_l1_T;
        a["total_l1_O"] = alignment->total_l1_O;
        j["alignment"] = std::move(a);
    } else {
        j["alignment"] = nullptr;
    }
    return j.dump(2);
}

}  // namespace hmmlab
