#include "doctest.h"

#include <cstdio>

#include "error.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "recovery.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace hmmlab;

TEST_CASE("outer3: single rank-one spike") {
    Matrix a(2, 1), b(2, 1), c(2, 1);
    a << 1, 0;
    b << 1, 0;
    c << 1, 0;
    Tensor3 t = outer3(a, b, c);
    CHECK(t(0, 0, 0) == 1.0);
    CHECK(t.sum() == 1.0);
}

TEST_CASE("outer3: identity factors give the superdiagonal") {
    Matrix I = Matrix::Identity(3, 3);
    Tensor3 t = outer3(I, I, I);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l)
                CHECK(t(i, j, l) == (i == j && j == l ? 1.0 : 0.0));
}

TEST_CASE("outer3 agrees with the naive triple loop") {
    Matrix A = oracle::random_stochastic(3, 2, 1);
    Matrix B = oracle::random_stochastic(3, 2, 2);
    Matrix C = oracle::random_stochastic(3, 2, 3);
    Tensor3 got = outer3(A, B, C);
    Tensor3 ref = oracle::outer3_by_loops(A, B, C);
    for (int64_t i = 0; i < got.size(); ++i)
        CHECK(got.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-15));
}

TEST_CASE("matricize: superdiagonal and rank-one layouts") {
    Matrix I = Matrix::Identity(2, 2);
    Tensor3 t = outer3(I, I, I);
    Matrix m3 = matricize(t, 3);
    CHECK(m3.rows() == 2);
    CHECK(m3.cols() == 4);
    CHECK(m3(0, 0) == 1.0);
    CHECK(m3(1, 3) == 1.0);
    CHECK(m3.sum() == 2.0);

    Matrix a(2, 1), b(3, 1), c(2, 1);
    a << 0.25, 0.75;
    b << 0.2, 0.3, 0.5;
    c << 0.6, 0.4;
    Matrix m1 = matricize(outer3(a, b, c), 1);
    Eigen::FullPivLU<Matrix> lu(m1);
    CHECK(lu.rank() == 1);
}

TEST_CASE("khatri_rao basics") {
    Matrix ones = Matrix::Ones(1, 4);
    CHECK((khatri_rao(ones, ones) - Matrix::Ones(1, 4)).cwiseAbs().maxCoeff() == 0.0);

    Matrix I = Matrix::Identity(2, 2);
    Matrix kr = khatri_rao(I, I);
    CHECK(kr.rows() == 4);
    CHECK(kr(0, 0) == 1.0);
    CHECK(kr(3, 1) == 1.0);
    CHECK(kr.sum() == 2.0);

    Matrix A = oracle::random_stochastic(3, 4, 5);
    Matrix B = oracle::random_stochastic(2, 4, 6);
    Matrix kr2 = khatri_rao(A, B);
    for (int j = 0; j < 4; ++j) CHECK(kr2.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matricize mode 3 of a factored tensor equals C (A kr B)^T") {
    Matrix A = oracle::random_stochastic(4, 2, 7);
    Matrix B = oracle::random_stochastic(3, 2, 8);
    Matrix C = oracle::random_stochastic(2, 2, 9);
    Matrix m3 = matricize(outer3(A, B, C), 3);
    Matrix ref = C * khatri_rao(A, B).transpose();
    CHECK((m3 - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("project3: slices, marginals and linearity") {
    Matrix A = oracle::random_stochastic(3, 2, 10);
    Matrix B = oracle::random_stochastic(3, 2, 11);
    Matrix C = oracle::random_stochastic(3, 2, 12);
    Tensor3 t = outer3(A, B, C);

    Vector e0 = Vector::Zero(3);
    e0[0] = 1.0;
    Matrix slice = project3(t, e0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(slice(i, j) == doctest::Approx(t(i, j, 0)));

    // all-ones projection marginalizes the third mode
    Matrix marg = project3(t, Vector::Ones(3));
    double total = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) total += marg(i, j);
    CHECK(total == doctest::Approx(t.sum()).epsilon(1e-12));

    Rng rng(13);
    Vector u = rng.unit_sphere(3), v = rng.unit_sphere(3);
    Matrix lin = project3(t, 2.0 * u + 0.5 * v);
    Matrix ref = 2.0 * project3(t, u) + 0.5 * project3(t, v);
    CHECK((lin - ref).cwiseAbs().maxCoeff() <= 1e-12);

    // naive triple-loop cross-check
    Matrix direct = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l) direct(i, j) += t(i, j, l) * u[l];
    CHECK((project3(t, u) - direct).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("pinv: identity, truncation and left-inverse") {
    CHECK((pinv(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <=
          1e-12);

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 2.0;
    Matrix Dp = pinv(D, 1e-10);
    CHECK(Dp(0, 0) == doctest::Approx(0.5));
    CHECK(Dp(1, 1) == 0.0);

    Matrix M = oracle::random_stochastic(5, 3, 14);
    CHECK((pinv(M) * M - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);

    // Penrose identities on a rank-deficient matrix
    Matrix R(3, 3);
    R.col(0) = M.col(0).head(3);
    R.col(1) = M.col(1).head(3);
    R.col(2) = M.col(0).head(3);  // duplicate column
    Matrix Rp = pinv(R);
    CHECK((R * Rp * R - R).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((Rp * R * Rp - Rp).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((R * Rp - (R * Rp).transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((Rp * R - (Rp * R).transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("tensor binary round trip") {
    Matrix A = oracle::random_stochastic(3, 2, 15);
    Tensor3 t = outer3(A, A, A);
    std::string path = "tensor_roundtrip.bin";
    t.save(path);
    Tensor3 back = Tensor3::load(path);
    REQUIRE(back.d1() == t.d1());
    REQUIRE(back.d2() == t.d2());
    REQUIRE(back.d3() == t.d3());
    for (int64_t i = 0; i < t.size(); ++i) CHECK(back.data()[i] == t.data()[i]);
    std::remove(path.c_str());
}

namespace {

double matched_column_error(const Matrix& X, const Matrix& Y) {
    auto [perm, dist] = align_columns(X, Y);
    double worst = 0.0;
    for (double d : dist) worst = std::max(worst, d);
    return worst;
}

}  // namespace

TEST_CASE("simultaneous_diagonalize: superdiagonal tensor") {
    Matrix I = Matrix::Identity(2, 2);
    Tensor3 t = outer3(I, I, I);
    DecompositionResult res = simultaneous_diagonalize(t, 2, 42);
    CHECK(res.reconstruction_error <= 1e-10);
    CHECK(matched_column_error(res.Ahat, I) <= 1e-10);
    CHECK(matched_column_error(res.Bhat, I) <= 1e-10);
    CHECK(res.pairing_residuals.maxCoeff() <= 1e-6);
}

TEST_CASE("simultaneous_diagonalize inverts outer3 on random stochastic factors") {
    for (uint64_t seed : {1u, 2u, 3u, 4u}) {
        Matrix A = oracle::random_stochastic(6, 3, derive_seed(seed, "A"));
        Matrix B = oracle::random_stochastic(5, 3, derive_seed(seed, "B"));
        Matrix C = oracle::random_stochastic(4, 3, derive_seed(seed, "C"));
        Tensor3 t = outer3(A, B, C);
        DecompositionResult res = simultaneous_diagonalize(t, 3, seed);
        CHECK(res.reconstruction_error <= 1e-8);
        CHECK(matched_column_error(res.Ahat, A) <= 1e-6);
        CHECK(matched_column_error(res.Bhat, B) <= 1e-6);
        CHECK(matched_column_error(res.Chat, C) <= 1e-6);
    }
}

TEST_CASE("simultaneous_diagonalize recovers exact HMM factors") {
    Hmm h = Hmm::make_with_stationary(
        make_transition(TransitionSpec::cycle(4)),
        make_observation(ObservationSpec::random_support(4, 3, 2, 77)));
    LikelihoodFactors f = likelihood_factors(h, 2);
    Tensor3 M = outer3(f.A, f.B, f.C);
    DecompositionResult res = simultaneous_diagonalize(M, 4, 5);
    CHECK(matched_column_error(res.Ahat, f.A) <= 1e-6);
    CHECK(matched_column_error(res.Bhat, f.B) <= 1e-6);
    CHECK(matched_column_error(res.Chat, f.C) <= 1e-6);
}

TEST_CASE("simultaneous_diagonalize is stable under tiny entrywise noise") {
    Matrix A = oracle::random_stochastic(6, 3, 21);
    Matrix B = oracle::random_stochastic(6, 3, 22);
    Matrix C = oracle::random_stochastic(4, 3, 23);
    Tensor3 t = outer3(A, B, C);
    Rng rng(24);
    for (double& x : t.data()) x += (rng.uniform01() - 0.5) * 2e-9;
    DecompositionOptions opts;
    opts.pairing_tol = 1e-3;
    DecompositionResult res = simultaneous_diagonalize(t, 3, 25, opts);
    CHECK(matched_column_error(res.Ahat, A) <= 1e-5);
    CHECK(matched_column_error(res.Bhat, B) <= 1e-5);
    CHECK(matched_column_error(res.Chat, C) <= 1e-5);
}

TEST_CASE("simultaneous_diagonalize is equivariant under factor permutation") {
    Matrix A = oracle::random_stochastic(5, 3, 31);
    Matrix B = oracle::random_stochastic(5, 3, 32);
    Matrix C = oracle::random_stochastic(3, 3, 33);
    Matrix Ap(5, 3), Bp(5, 3), Cp(3, 3);
    int perm[3] = {2, 0, 1};
    for (int j = 0; j < 3; ++j) {
        Ap.col(j) = A.col(perm[j]);
        Bp.col(j) = B.col(perm[j]);
        Cp.col(j) = C.col(perm[j]);
    }
    DecompositionResult r1 = simultaneous_diagonalize(outer3(A, B, C), 3, 7);
    DecompositionResult r2 = simultaneous_diagonalize(outer3(Ap, Bp, Cp), 3, 7);
    // same recovered triples as a multiset: align r2 onto r1 through stacked factors
    Matrix s1(5 + 5 + 3, 3), s2(5 + 5 + 3, 3);
    s1 << r1.Ahat, r1.Bhat, r1.Chat;
    s2 << r2.Ahat, r2.Bhat, r2.Chat;
    CHECK(matched_column_error(s1, s2) <= 1e-8);
}

TEST_CASE("simultaneous_diagonalize rejects rank-starved inputs") {
    Tensor3 zero(3, 3, 2);
    CHECK_THROWS_AS(simultaneous_diagonalize(zero, 2, 1), Error);

    Matrix A = oracle::random_stochastic(2, 2, 41);
    Tensor3 t = outer3(A, A, A);
    CHECK_THROWS_AS(simultaneous_diagonalize(t, 3, 1), Error);  // k > d1
}
