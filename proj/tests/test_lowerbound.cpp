#include "doctest.h"

#include <cmath>

#include "error.hpp"
#include "generators.hpp"
#include "lowerbound.hpp"
#include "oracles.hpp"

using namespace hmmlab;

TEST_CASE("conditioned_chain: uniform outputs leave the chain untouched") {
    Matrix T = oracle::random_stochastic(4, 4, 1);
    Matrix O = Matrix::Constant(3, 4, 1.0 / 3.0);
    Hmm h = Hmm::make_with_stationary(T, std::move(O));
    ConditionedChainRun run = conditioned_chain(h, {0, 2, 1});
    for (const Matrix& Tt : run.transitions)
        CHECK((Tt - h.T).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("conditioned_chain: one deterministic observation is Bayes by hand") {
    // two states, state 0 emits symbol 0, state 1 emits symbol 1
    Matrix T(2, 2);
    T << 0.6, 0.3, 0.4, 0.7;
    Matrix O = Matrix::Identity(2, 2);
    Hmm h = Hmm::make_with_stationary(std::move(T), std::move(O));
    ConditionedChainRun run = conditioned_chain(h, {0});
    // conditioning on o_1 = 0 forces h_1 = 0 from either start
    for (int i = 0; i < 2; ++i) {
        CHECK(run.transitions[0](0, i) == doctest::Approx(1.0));
        CHECK(run.transitions[0](1, i) == doctest::Approx(0.0));
    }
}

TEST_CASE("conditioned_chain matches exhaustive conditional enumeration") {
    for (uint64_t seed : {3u, 4u}) {
        Hmm h = oracle::random_hmm(3, 2, seed);
        std::vector<int> outputs{1, 0};
        ConditionedChainRun run = conditioned_chain(h, outputs);
        for (int t = 0; t < 2; ++t) {
            Matrix ref = oracle::conditioned_step_by_paths(h, outputs, t);
            CHECK((run.transitions[static_cast<size_t>(t)] - ref).cwiseAbs().maxCoeff() <=
                  1e-12);
        }
    }
}

TEST_CASE("conditioned_chain transitions stay column-stochastic") {
    for (uint64_t seed : {5u, 6u, 7u}) {
        Hmm h = oracle::random_hmm(5, 3, seed);
        Rng rng(seed);
        std::vector<int> outputs;
        for (int t = 0; t < 6; ++t) outputs.push_back(static_cast<int>(rng.uniform_int(3)));
        ConditionedChainRun run = conditioned_chain(h, outputs);
        for (const Matrix& Tt : run.transitions) {
            for (int j = 0; j < h.n; ++j) {
                CHECK(Tt.col(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
                CHECK(Tt.col(j).minCoeff() >= 0.0);
            }
        }
    }
}

TEST_CASE("telescoped likelihood equals the forward algorithm") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Hmm h = oracle::random_hmm(4, 3, seed);
        Rng rng(derive_seed(seed, "s"));
        std::vector<int> outputs;
        for (int t = 0; t < 8; ++t) outputs.push_back(static_cast<int>(rng.uniform_int(3)));
        ConditionedChainRun run = conditioned_chain(h, outputs);
        double forward = forward_log_likelihood(h, outputs);
        CHECK(run.log_likelihood == doctest::Approx(forward).epsilon(1e-10));
    }
}

TEST_CASE("conditioned_chain rejects impossible strings") {
    Matrix T = oracle::random_stochastic(3, 3, 8);
    Matrix O = Matrix::Zero(2, 3);
    O.row(0).setOnes();  // symbol 1 never emitted
    Hmm h = Hmm::make_with_stationary(std::move(T), std::move(O));
    try {
        conditioned_chain(h, {1});
        FAIL("expected ZeroLikelihood");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroLikelihood);
    }
}

TEST_CASE("contraction_probe: uniform and identity matrices") {
    const int n = 6;
    Matrix U = Matrix::Constant(n, n, 1.0 / n);
    ContractionProbe cu = contraction_probe(U, 32, 1);
    CHECK(cu.restricted_norm <= 1e-12);
    CHECK(cu.monte_carlo_max <= 1e-12);

    ContractionProbe ci = contraction_probe(Matrix::Identity(n, n), 32, 2);
    CHECK(ci.restricted_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ci.monte_carlo_max <= ci.restricted_norm + 1e-12);
}

TEST_CASE("spectral_gap closed forms") {
    // complete graph without self-loops: every non-principal eigenvalue is -1/(n-1)
    const int n = 9;
    Matrix K = Matrix::Constant(n, n, 1.0 / (n - 1));
    K.diagonal().setZero();
    CHECK(spectral_gap(K) == doctest::Approx(1.0 / (n - 1)).epsilon(1e-10));

    // cycle graph, d = 2: second-largest eigenvalue is cos(2 pi / n)
    const int nc = 8;
    Matrix C = Matrix::Zero(nc, nc);
    for (int i = 0; i < nc; ++i) {
        C(i, (i + 1) % nc) = 0.5;
        C((i + 1) % nc, i) = 0.5;
    }
    CHECK(spectral_gap(C) == doctest::Approx(std::cos(2.0 * M_PI / nc)).epsilon(1e-10));

    CHECK_THROWS_AS(spectral_gap(oracle::random_stochastic(4, 4, 3)), Error);
}

TEST_CASE("random regular graphs sit under the spectral bound") {
    for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Matrix W = undirected_regular_walk(100, 16, seed);
        CHECK(spectral_gap(W) <= 3.0 / std::sqrt(16.0));
    }
}

TEST_CASE("emission concentration: exact cases") {
    const int n = 10, m = 4;
    Matrix O = Matrix::Constant(m, n, 1.0 / m);
    Matrix W = undirected_regular_walk(n, 3, 1);
    EmissionConcentration c = emission_concentration_check(O, W, 3);
    CHECK(c.max_deviation <= 1e-15);
    CHECK(c.pass);

    // complete graph with self-loops: deviation is the row-average offset
    Matrix J = Matrix::Constant(n, n, 1.0 / n);
    Matrix Orand = oracle::random_stochastic(m, n, 2);
    EmissionConcentration cj = emission_concentration_check(Orand, J, n);
    Vector row_avg = Orand.rowwise().mean();
    CHECK(cj.max_deviation ==
          doctest::Approx((row_avg.array() - 1.0 / m).abs().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("emission concentration holds across seeded trials") {
    EmissionConcentrationTrials t = emission_concentration_trials(256, 64, 4, 50, 9);
    CHECK(t.trials == 50);
    CHECK(t.failures <= 2);  // union-bounded tail: at most a couple of misses
    CHECK(t.worst_deviation < 0.3);
}

TEST_CASE("influence_decay: permutations preserve l1 distance") {
    Hmm h = Hmm::make_with_stationary(
        make_transition(TransitionSpec::cycle(12)),
        Matrix(oracle::random_stochastic(4, 12, 5)));
    InfluenceDecay d = influence_decay(h, 15, 3, 3, 7);
    CHECK(d.median_rate >= 1.0 - 1e-9);
    CHECK(d.median_rate <= 1.0 + 1e-9);
}

TEST_CASE("influence_decay: uniform outputs reduce to plain mixing") {
    const int n = 60, deg = 8;
    Matrix W = undirected_regular_walk(n, deg, 11);
    Matrix O = Matrix::Constant(4, n, 0.25);
    Hmm h = Hmm::make_with_stationary(W, std::move(O));
    double lambda2 = spectral_gap(W);
    InfluenceDecay d = influence_decay(h, 40, 2, 4, 13);
    CHECK(d.median_rate < 1.0);
    CHECK(d.median_rate == doctest::Approx(lambda2).epsilon(0.25));
}

TEST_CASE("influence_decay: dense regular chains contract") {
    const int n = 80, deg = 16;
    Matrix W = undirected_regular_walk(n, deg, 17);
    Rng rng(19);
    Matrix O(8, n);
    for (int j = 0; j < n; ++j) O.col(j) = rng.simplex(8);
    Hmm h = Hmm::make_with_stationary(W, std::move(O));
    InfluenceDecay d = influence_decay(h, 30, 3, 3, 23);
    CHECK(d.median_rate < 1.0);
    for (int t = 3; t < 30; ++t) CHECK(d.per_step_max[t] < 1.0);
}
