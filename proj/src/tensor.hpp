#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "types.hpp"

namespace hmmlab {

// Dense third-order tensor, entry (i, j, l) at data[(i*d2 + j)*d3 + l].
class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(int64_t d1, int64_t d2, int64_t d3)
        : d1_(d1), d2_(d2), d3_(d3), data_(static_cast<size_t>(d1 * d2 * d3), 0.0) {}

    int64_t d1() const { return d1_; }
    int64_t d2() const { return d2_; }
    int64_t d3() const { return d3_; }
    int64_t size() const { return d1_ * d2_ * d3_; }

    double& operator()(int64_t i, int64_t j, int64_t l) { return data_[(i * d2_ + j) * d3_ + l]; }
    double operator()(int64_t i, int64_t j, int64_t l) const {
        return data_[(i * d2_ + j) * d3_ + l];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double sum() const;
    double frobenius_norm() const;

    // dims header (three little-endian u64) followed by little-endian doubles
    void save(const std::string& path) const;
    static Tensor3 load(const std::string& path);

  private:
    int64_t d1_ = 0, d2_ = 0, d3_ = 0;
    std::vector<double> data_;
};

Tensor3 outer3(const Matrix& A, const Matrix& B, const Matrix& C);

// mode 1: d1 x (d2*d3), mode 2: d2 x (d1*d3), mode 3: d3 x (d1*d2).
// Trailing indices flatten row-major, so matricize(outer3(A,B,C), 3)
// equals C * khatri_rao(A, B)^T.
Matrix matricize(const Tensor3& t, int mode);

// column i is A_i (x) B_i flattened with the A index major: row r*q + s.
Matrix khatri_rao(const Matrix& A, const Matrix& B);

// X(i, j) = sum_l M(i, j, l) w(l)
Matrix project3(const Tensor3& t, const Vector& w);

// Moore-Penrose pseudoinverse, dropping singular values below rank_tol * sigma_max.
Matrix pinv(const Matrix& M, double rank_tol = 1e-10);

struct DecompositionOptions {
    double pairing_tol = 1e-6;   // max allowed |lambda_A * lambda_B - 1| per pair
    double imag_tol = 1e-6;      // max allowed relative imaginary magnitude
    double rank_tol = 1e-10;     // relative cutoff for pinv and subspace rank
    double recon_tol = 1e-8;     // expected reconstruction error on exact input
    int max_retries = 5;         // fresh random projections before giving up
};

struct DecompositionResult {
    Matrix Ahat;                  // d1 x k, column sums 1
    Matrix Bhat;                  // d2 x k, column sums 1
    Matrix Chat;                  // d3 x k
    Vector projection_a;          // the random projection vectors used
    Vector projection_b;
    Vector pairing_residuals;     // |lambda_A * lambda_B - 1| per column
    double reconstruction_error = 0.0;  // Frobenius norm of M - sum of rank-1 terms
    double clamped_mass = 0.0;    // total negative mass zeroed in the reported factors
    int retries_used = 0;
};

// Rank-k decomposition by simultaneous diagonalization of two random mode-3
// projections. Requires A, B full column rank and no two C columns parallel.
// When d1 or d2 exceeds k the slices are first compressed onto the top-k
// singular subspaces of the mode-1/mode-2 matricizations.
DecompositionResult simultaneous_diagonalize(const Tensor3& M, int k, uint64_t seed,
                                             const DecompositionOptions& opts = {});

}  // namespace hmmlab
