#include "tensor.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "assignment.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace hmmlab {

double Tensor3::sum() const {
    double s = 0.0;
    for (double x : data_) s += x;
    return s;
}

double Tensor3::frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
}

void Tensor3::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    uint64_t dims[3] = {static_cast<uint64_t>(d1_), static_cast<uint64_t>(d2_),
                        static_cast<uint64_t>(d3_)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

Tensor3 Tensor3::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    uint64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw Error(ErrorCode::Io, "truncated tensor header: " + path);
    constexpr uint64_t kMaxEntries = uint64_t{1} << 28;
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 ||
        dims[0] * dims[1] * dims[2] > kMaxEntries)
        throw Error(ErrorCode::Io, "implausible tensor dims in " + path);
    Tensor3 t(static_cast<int64_t>(dims[0]), static_cast<int64_t>(dims[1]),
              static_cast<int64_t>(dims[2]));
    in.read(reinterpret_cast<char*>(t.data().data()),
            static_cast<std::streamsize>(t.data().size() * sizeof(double)));
    if (!in) throw Error(ErrorCode::Io, "truncated tensor payload: " + path);
    return t;
}

Tensor3 outer3(const Matrix& A, const Matrix& B, const Matrix& C) {
    if (A.cols() != B.cols() || A.cols() != C.cols())
        throw Error(ErrorCode::DimensionMismatch, "outer3 factor column counts differ");
    const int64_t d1 = A.rows(), d2 = B.rows(), d3 = C.rows();
    Tensor3 t(d1, d2, d3);
    for (int r = 0; r < A.cols(); ++r) {
        for (int64_t i = 0; i < d1; ++i) {
            const double ai = A(i, r);
            if (ai == 0.0) continue;
            for (int64_t j = 0; j < d2; ++j) {
                const double ab = ai * B(j, r);
                if (ab == 0.0) continue;
                double* slot = &t.data()[(i * d2 + j) * d3];
                for (int64_t l = 0; l < d3; ++l) slot[l] += ab * C(l, r);
            }
        }
    }
    return t;
}

Matrix matricize(const Tensor3& t, int mode) {
    const int64_t d1 = t.d1(), d2 = t.d2(), d3 = t.d3();
    switch (mode) {
        case 1: {
            Matrix out(d1, d2 * d3);
            for (int64_t i = 0; i < d1; ++i)
                for (int64_t j = 0; j < d2; ++j)
                    for (int64_t l = 0; l < d3; ++l) out(i, j * d3 + l) = t(i, j, l);
            return out;
        }
        case 2: {
            Matrix out(d2, d1 * d3);
            for (int64_t i = 0; i < d1; ++i)
                for (int64_t j = 0; j < d2; ++j)
                    for (int64_t l = 0; l < d3; ++l) out(j, i * d3 + l) = t(i, j, l);
            return out;
        }
        case 3: {
            Matrix out(d3, d1 * d2);
            for (int64_t i = 0; i < d1; ++i)
                for (int64_t j = 0; j < d2; ++j)
                    for (int64_t l = 0; l < d3; ++l) out(l, i * d2 + j) = t(i, j, l);
            return out;
        }
        default:
            throw Error(ErrorCode::InvalidArgument, "matricize mode must be 1, 2 or 3");
    }
}

Matrix khatri_rao(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols())
        throw Error(ErrorCode::DimensionMismatch, "khatri_rao column counts differ");
    const int64_t p = A.rows(), q = B.rows(), k = A.cols();
    Matrix out(p * q, k);
    for (int64_t c = 0; c < k; ++c)
        for (int64_t r = 0; r < p; ++r) out.block(r * q, c, q, 1) = A(r, c) * B.col(c);
    return out;
}

Matrix project3(const Tensor3& t, const Vector& w) {
    if (w.size() != t.d3())
        throw Error(ErrorCode::DimensionMismatch, "projection vector length != d3");
    const int64_t d1 = t.d1(), d2 = t.d2(), d3 = t.d3();
    Matrix out = Matrix::Zero(d1, d2);
    for (int64_t i = 0; i < d1; ++i)
        for (int64_t j = 0; j < d2; ++j) {
            const double* slot = &t.data()[(i * d2 + j) * d3];
            double acc = 0.0;
            for (int64_t l = 0; l < d3; ++l) acc += slot[l] * w[l];
            out(i, j) = acc;
        }
    return out;
}

Matrix pinv(const Matrix& M, double rank_tol) {
    if (M.size() == 0) throw Error(ErrorCode::InvalidArgument, "pinv of empty matrix");
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * (sv.size() > 0 ? sv[0] : 0.0);
    Vector inv = Vector::Zero(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff && sv[i] > 0.0) inv[i] = 1.0 / sv[i];
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

// Top-k left singular vectors, or identity when no compression is needed.
Matrix compression_basis(const Matrix& unfolding, int k) {
    if (unfolding.rows() <= k) return Matrix::Identity(unfolding.rows(), unfolding.rows());
    Eigen::BDCSVD<Matrix> svd(unfolding, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(k);
}

struct RealEigs {
    Matrix vectors;       // k x k
    Vector values;
    double max_rel_imag;  // worst imaginary magnitude relative to the spectrum scale
};

// Real Schur based eigendecomposition; conjugate pairs are reported through
// their real/imaginary parts so the column span is kept.
RealEigs real_eigs(const Matrix& Z) {
    Eigen::EigenSolver<Matrix> es(Z);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::Internal, "eigendecomposition did not converge");
    const auto& lam = es.eigenvalues();
    const auto& V = es.eigenvectors();
    const int k = static_cast<int>(lam.size());
    double scale = 0.0;
    for (int i = 0; i < k; ++i) scale = std::max(scale, std::abs(lam[i]));
    if (scale == 0.0) scale = 1.0;

    RealEigs out;
    out.vectors = Matrix(k, k);
    out.values = Vector(k);
    out.max_rel_imag = 0.0;
    for (int i = 0; i < k; ++i) {
        double rel = std::abs(lam[i].imag()) / scale;
        out.max_rel_imag = std::max(out.max_rel_imag, rel);
    }
    for (int i = 0; i < k;) {
        if (i + 1 < k && std::abs(lam[i].imag()) > 0 &&
            std::abs(lam[i] - std::conj(lam[i + 1])) <= 1e-12 * scale) {
            out.vectors.col(i) = V.col(i).real();
            out.vectors.col(i + 1) = V.col(i).imag();
            out.values[i] = lam[i].real();
            out.values[i + 1] = lam[i].real();
            i += 2;
        } else {
            out.vectors.col(i) = V.col(i).real();
            out.values[i] = lam[i].real();
            ++i;
        }
    }
    return out;
}

double relative_sigma_min(const Matrix& M) {
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv[0] == 0.0) return 0.0;
    return sv[sv.size() - 1] / sv[0];
}

}  // namespace

DecompositionResult simultaneous_diagonalize(const Tensor3& M, int k, uint64_t seed,
                                             const DecompositionOptions& opts) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "rank k must be positive");
    if (M.d1() < k || M.d2() < k)
        throw Error(ErrorCode::DimensionMismatch,
                    "tensor modes 1 and 2 must have dimension >= k");

    const Matrix U1 = compression_basis(matricize(M, 1), k);
    const Matrix U2 = compression_basis(matricize(M, 2), k);
    const Matrix M3 = matricize(M, 3);

    Rng rng(derive_seed(seed, "simdiag"));
    ErrorCode last_failure = ErrorCode::SingularProjection;
    std::string last_detail = "no attempt made";

    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        Vector a = rng.unit_sphere(static_cast<int>(M.d3()));
        Vector b = rng.unit_sphere(static_cast<int>(M.d3()));
        Matrix X = U1.transpose() * project3(M, a) * U2;
        Matrix Y = U1.transpose() * project3(M, b) * U2;

        if (relative_sigma_min(X) < opts.rank_tol || relative_sigma_min(Y) < opts.rank_tol) {
            last_failure = ErrorCode::SingularProjection;
            last_detail = "projected slice numerically singular";
            continue;
        }

        // ZA = X Y^{-1} has the compressed A columns as eigenvectors; the
        // transposed pair ZB = Y^T X^{-T} carries the B columns.
        Matrix ZA = Y.transpose().partialPivLu().solve(X.transpose()).transpose();
        Matrix ZB = X.partialPivLu().solve(Y).transpose();

        RealEigs ea = real_eigs(ZA);
        RealEigs eb = real_eigs(ZB);
        if (ea.max_rel_imag > opts.imag_tol || eb.max_rel_imag > opts.imag_tol) {
            last_failure = ErrorCode::ComplexEigenvalues;
            last_detail = "eigenvalues have large imaginary parts";
            continue;
        }

        // Reciprocal eigenvalue pairing. Eigenvalues can collide (repeated
        // C projections), so ties are resolved structurally: for the correct
        // pairing G = VA^{-1} X VB^{-T} is a scaled permutation.
        Matrix G;
        {
            Eigen::PartialPivLU<Matrix> luA(ea.vectors);
            Eigen::PartialPivLU<Matrix> luB(eb.vectors);
            Matrix W = luA.solve(X);
            G = luB.solve(W.transpose()).transpose();
        }
        Matrix cost(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) cost(i, j) = -std::abs(G(i, j));
        std::vector<int> match = min_cost_assignment(cost);

        Vector residuals(k);
        double worst = 0.0;
        for (int i = 0; i < k; ++i) {
            residuals[i] = std::abs(ea.values[i] * eb.values[match[i]] - 1.0);
            worst = std::max(worst, residuals[i]);
        }
        if (worst > opts.pairing_tol) {
            last_failure = ErrorCode::PairingFailure;
            last_detail = "no reciprocal eigenvalue partner within tolerance";
            continue;
        }

        Matrix A_lift = U1 * ea.vectors;
        Matrix B_lift(M.d2(), k);
        for (int i = 0; i < k; ++i) B_lift.col(i) = U2 * eb.vectors.col(match[i]);

        bool degenerate_scale = false;
        for (int i = 0; i < k && !degenerate_scale; ++i) {
            double sa = A_lift.col(i).sum();
            double sb = B_lift.col(i).sum();
            if (std::abs(sa) < 1e-12 || std::abs(sb) < 1e-12) degenerate_scale = true;
        }
        if (degenerate_scale) {
            last_failure = ErrorCode::PairingFailure;
            last_detail = "recovered column has near-zero sum, cannot rescale";
            continue;
        }

        DecompositionResult res;
        res.projection_a = a;
        res.projection_b = b;
        res.pairing_residuals = residuals;
        res.retries_used = attempt;
        res.Ahat = A_lift;
        res.Bhat = B_lift;
        for (int i = 0; i < k; ++i) {
            res.Ahat.col(i) /= res.Ahat.col(i).sum();
            res.Bhat.col(i) /= res.Bhat.col(i).sum();
        }
        res.Chat = M3 * pinv(khatri_rao(res.Ahat, res.Bhat), opts.rank_tol).transpose();

        double clamped = 0.0;
        auto clamp_negatives = [&clamped](Matrix& F) {
            for (int c = 0; c < F.cols(); ++c)
                for (int r = 0; r < F.rows(); ++r)
                    if (F(r, c) < 0.0) {
                        clamped += -F(r, c);
                        F(r, c) = 0.0;
                    }
        };
        clamp_negatives(res.Ahat);
        clamp_negatives(res.Bhat);
        clamp_negatives(res.Chat);
        res.clamped_mass = clamped;

        Tensor3 approx = outer3(res.Ahat, res.Bhat, res.Chat);
        double err2 = 0.0;
        for (size_t idx = 0; idx < approx.data().size(); ++idx) {
            double d = M.data()[idx] - approx.data()[idx];
            err2 += d * d;
        }
        res.reconstruction_error = std::sqrt(err2);
        return res;
    }

    throw Error(last_failure, last_detail + " after " +
                                  std::to_string(opts.max_retries + 1) + " attempts");
}

}  // namespace hmmlab
