#include "doctest.h"

#include <cmath>

#include "error.hpp"
#include "generators.hpp"
#include "hmm.hpp"
#include "oracles.hpp"
#include "recovery.hpp"

using namespace hmmlab;

namespace {

Hmm two_state() {
    Matrix T(2, 2);
    T << 0.9, 0.2, 0.1, 0.8;
    Matrix O(2, 2);
    O << 0.7, 0.4, 0.3, 0.6;
    return Hmm::make(std::move(T), std::move(O));
}

}  // namespace

TEST_CASE("validate accepts a stochastic model") {
    Matrix T = Matrix::Identity(2, 2);
    Matrix O = Matrix::Constant(2, 2, 0.5);
    CHECK(validate(Hmm::make(T, O)).empty());
}

TEST_CASE("validate flags a deficient column with its residual") {
    Matrix T = Matrix::Identity(2, 2);
    T(0, 0) = 0.9;  // column 0 sums to 0.9
    Matrix O = Matrix::Constant(2, 2, 0.5);
    auto report = validate(Hmm::make(T, O));
    REQUIRE(report.size() == 1);
    CHECK(report[0].index == 0);
    CHECK(std::abs(report[0].residual) == doctest::Approx(0.1));
}

TEST_CASE("validate flags negative entries") {
    Matrix T = Matrix::Identity(2, 2);
    Matrix O(2, 2);
    O << 1.1, 0.5, -0.1, 0.5;
    auto report = validate(Hmm::make(T, O));
    bool saw_negative = false;
    for (const auto& v : report) saw_negative |= v.what.find("negative") != std::string::npos;
    CHECK(saw_negative);
}

TEST_CASE("stationary: symmetric two-state chain") {
    Matrix T(2, 2);
    T << 0.5, 0.5, 0.5, 0.5;
    Vector pi = stationary(T);
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("stationary: asymmetric two-state chain has pi = (2/3, 1/3)") {
    // solved by hand: 0.9 a + 0.2 (1-a) = a  =>  a = 2/3
    Matrix T(2, 2);
    T << 0.9, 0.2, 0.1, 0.8;
    Vector pi = stationary(T);
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK((T * pi - pi).lpNorm<1>() <= 1e-10);
}

TEST_CASE("stationary: cycle permutation needs the averaging path") {
    Matrix T = make_transition(TransitionSpec::cycle(6));
    Vector pi = stationary(T);
    for (int i = 0; i < 6; ++i) CHECK(pi[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("stationary: periodic chain with nonuniform mass converges via averaging") {
    Matrix T(3, 3);
    T << 0.0, 0.5, 0.0,
         1.0, 0.0, 1.0,
         0.0, 0.5, 0.0;
    Vector pi = stationary(T);
    CHECK(pi[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(pi[1] == doctest::Approx(0.50).epsilon(1e-9));
    CHECK(pi[2] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("stationary: hopeless tolerance inside a tight cap throws NonConvergent") {
    double e = 1e-9;
    Matrix T(2, 2);
    T << 1 - e, 2 * e, e, 1 - 2 * e;
    try {
        stationary(T, 1e-10, 500);
        FAIL("expected NonConvergent");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NonConvergent);
    }
}

TEST_CASE("time_reverse: symmetric doubly stochastic chain is its own reversal") {
    Matrix T(2, 2);
    T << 0.3, 0.7, 0.7, 0.3;
    Vector pi = stationary(T);
    CHECK((time_reverse(T, pi) - T).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("time_reverse: cycle reverses to its transpose") {
    Matrix T = make_transition(TransitionSpec::cycle(5));
    Vector pi = Vector::Constant(5, 0.2);
    CHECK((time_reverse(T, pi) - T.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("time_reverse: entrywise formula and column sums") {
    Hmm h = two_state();
    Vector pi = stationary(h.T);
    Matrix R = time_reverse(h.T, pi);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(R(i, j) == doctest::Approx(h.T(j, i) * pi[i] / pi[j]).epsilon(1e-12));
    for (int j = 0; j < 2; ++j) CHECK(R.col(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("time_reverse is an involution") {
    for (uint64_t seed : {1u, 2u, 3u}) {
        Hmm h = oracle::random_hmm(5, 3, seed);
        Vector pi = stationary(h.T);
        Matrix R = time_reverse(h.T, pi);
        CHECK((time_reverse(R, pi) - h.T).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("time_reverse rejects vanishing stationary mass") {
    Matrix T = Matrix::Identity(2, 2);
    Vector pi(2);
    pi << 1.0, 0.0;
    CHECK_THROWS_AS(time_reverse(T, pi), Error);
}

TEST_CASE("likelihood_matrix at tau=1 is O T") {
    Hmm h = two_state();
    CHECK((likelihood_matrix(h, 1) - h.O * h.T).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("likelihood_matrix: cycle with distinct deterministic labels is a permutation") {
    int n = 4;
    Matrix T = make_transition(TransitionSpec::cycle(n));
    Matrix O = Matrix::Identity(n, n);  // m = n, state i emits symbol i
    Hmm h = Hmm::make(std::move(T), std::move(O));
    for (int tau : {1, 2, 3}) {
        Matrix A = likelihood_matrix(h, tau);
        for (int j = 0; j < n; ++j) {
            CHECK(A.col(j).maxCoeff() == doctest::Approx(1.0));
            CHECK(A.col(j).sum() == doctest::Approx(1.0));
        }
        Eigen::FullPivLU<Matrix> lu(A);
        CHECK(lu.rank() == n);
    }
}

TEST_CASE("likelihood_matrix matches exhaustive path enumeration") {
    for (uint64_t seed : {11u, 12u}) {
        Hmm h = oracle::random_hmm(3, 2, seed);
        for (int tau : {1, 2, 3}) {
            Matrix A = likelihood_matrix(h, tau);
            Matrix ref = oracle::likelihood_by_paths(h, tau);
            CHECK((A - ref).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    Hmm h4 = oracle::random_hmm(4, 3, 13);
    CHECK((likelihood_matrix(h4, 3) - oracle::likelihood_by_paths(h4, 3)).cwiseAbs().maxCoeff() <=
          1e-12);
}

TEST_CASE("likelihood columns are distributions") {
    for (uint64_t seed : {21u, 22u, 23u}) {
        Hmm h = oracle::random_hmm(4, 3, seed);
        for (int tau : {1, 2, 3, 4}) {
            Matrix A = likelihood_matrix(h, tau);
            for (int j = 0; j < h.n; ++j)
                CHECK(A.col(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("marginalizing the final step recovers the shorter window") {
    Hmm h = oracle::random_hmm(4, 3, 31);
    for (int tau : {2, 3}) {
        Matrix A = likelihood_matrix(h, tau);
        Matrix shorter = marginalize_last(A, h.m);
        CHECK((shorter - likelihood_matrix(h, tau - 1)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("likelihood_matrix enforces the row cap") {
    Hmm h = oracle::random_hmm(2, 2, 41);
    CHECK_THROWS_AS(likelihood_matrix(h, 8, 128), Error);
    CHECK_NOTHROW(likelihood_matrix(h, 7, 128));
}

TEST_CASE("reverse likelihood equals forward for reversible chains") {
    Matrix T(2, 2);
    T << 0.3, 0.7, 0.7, 0.3;  // symmetric, hence reversible
    Matrix O(3, 2);
    O << 0.5, 0.1, 0.3, 0.2, 0.2, 0.7;
    Hmm h = Hmm::make_with_stationary(std::move(T), std::move(O));
    for (int tau : {1, 2, 3})
        CHECK((reverse_likelihood_matrix(h, tau) - likelihood_matrix(h, tau))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
}

TEST_CASE("reverse likelihood: cycle reads labels along the reverse cycle") {
    int n = 4;
    Hmm h = Hmm::make_with_stationary(make_transition(TransitionSpec::cycle(n)),
                                      Matrix::Identity(n, n));
    Matrix B = reverse_likelihood_matrix(h, 2);
    IndexMap idx(n, 2);
    for (int i = 0; i < n; ++i) {
        // reversed chain steps i -> i-1 -> i-2; labels most recent first
        std::vector<int> expect{(i + n - 1) % n, (i + n - 2) % n};
        CHECK(B(idx.index_of(expect), i) == doctest::Approx(1.0));
        CHECK(B.col(i).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("reverse likelihood matches joint-path enumeration") {
    for (uint64_t seed : {51u, 52u}) {
        Hmm h = oracle::random_hmm(3, 2, seed);
        Matrix B = reverse_likelihood_matrix(h, 2);
        Matrix ref = oracle::reverse_likelihood_by_paths(h, 2);
        CHECK((B - ref).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("joint_factor basics") {
    SUBCASE("uniform pi with identity O") {
        int n = 3;
        Hmm h = Hmm::make_with_stationary(make_transition(TransitionSpec::cycle(n)),
                                          Matrix::Identity(n, n));
        Matrix C = joint_factor(h);
        CHECK((C - Matrix::Identity(n, n) / n).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("single state") {
        Matrix T = Matrix::Identity(1, 1);
        Matrix O(3, 1);
        O << 0.2, 0.3, 0.5;
        Hmm h = Hmm::make_with_stationary(std::move(T), O);
        CHECK((joint_factor(h) - O).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("total mass is one") {
        Hmm h = oracle::random_hmm(4, 3, 61);
        CHECK(joint_factor(h).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sample_windows: deterministic single-state model") {
    Matrix T = Matrix::Identity(1, 1);
    Matrix O = Matrix::Identity(1, 1);  // always emits symbol 0
    Hmm h = Hmm::make_with_stationary(std::move(T), std::move(O));
    auto windows = sample_windows(h, 1, 20, 99);
    for (const auto& w : windows) {
        REQUIRE(w.symbols.size() == 3);
        for (int s : w.symbols) CHECK(s == 0);
    }
}

TEST_CASE("sample_windows is deterministic in the seed") {
    Hmm h = oracle::random_hmm(3, 2, 71);
    auto a = sample_windows(h, 2, 500, 1234);
    auto b = sample_windows(h, 2, 500, 1234);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].symbols == b[i].symbols);
    auto c = sample_windows(h, 2, 500, 1235);
    bool all_equal = true;
    for (size_t i = 0; i < a.size(); ++i) all_equal &= a[i].symbols == c[i].symbols;
    CHECK_FALSE(all_equal);
}

TEST_CASE("JSON round trip preserves the model") {
    Hmm h = oracle::random_hmm(3, 2, 81);
    Hmm back = Hmm::from_json(h.to_json());
    CHECK(back.n == h.n);
    CHECK(back.m == h.m);
    CHECK((back.T - h.T).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.O - h.O).cwiseAbs().maxCoeff() <= 1e-15);
    REQUIRE(back.pi.has_value());
    CHECK((*back.pi - *h.pi).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("JSON rejects inconsistent declarations") {
    CHECK_THROWS_AS(Hmm::from_json("{\"n\":3,\"m\":1,\"T\":[[1,0],[0,1]],\"O\":[[1,1]]}"),
                    Error);
    CHECK_THROWS_AS(Hmm::from_json("not json"), Error);
}
