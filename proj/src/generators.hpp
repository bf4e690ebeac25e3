#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "types.hpp"

namespace hmmlab {

// Structured transition families used throughout the experiments.
struct TransitionSpec {
    enum class Kind {
        CyclePermutation,  // single n-cycle
        UnionOfCycles,     // n/c disjoint c-cycles
        CycleMixture,      // eps * P_c + (1 - eps) * P_n
        DegreeMixture,     // eps on each of d digraph neighbors + (1 - eps*d) * P_n
        RegularDigraph,    // uniform walk on a random out-regular digraph
        Factorial,         // Kronecker product of two component chains
        Identity,
    };

    Kind kind = Kind::CyclePermutation;
    int n = 0;
    int cycle_len = 0;   // UnionOfCycles / CycleMixture
    int degree = 0;      // DegreeMixture / RegularDigraph
    double eps = 0.0;    // CycleMixture / DegreeMixture
    uint64_t seed = 0;   // DegreeMixture / RegularDigraph
    std::shared_ptr<TransitionSpec> factor1, factor2;  // Factorial

    static TransitionSpec cycle(int n);
    static TransitionSpec union_of_cycles(int n, int c);
    static TransitionSpec cycle_mixture(int n, int c, double eps);
    static TransitionSpec degree_mixture(int n, int d, double eps, uint64_t seed);
    static TransitionSpec regular_digraph(int n, int d, uint64_t seed);
    static TransitionSpec factorial(TransitionSpec a, TransitionSpec b);
    static TransitionSpec identity(int n);

    std::string to_json() const;
    static TransitionSpec from_json(const std::string& text);
};

struct ObservationSpec {
    enum class Kind {
        RandomSupport,             // k random outputs, masses uniform on the simplex
        DeterministicRandomLabels, // one random output per state with mass 1
        DeBruijn,                  // deterministic labels along a De Bruijn cycle
    };

    Kind kind = Kind::RandomSupport;
    int n = 0;
    int m = 0;
    int k = 0;         // RandomSupport
    uint64_t seed = 0; // RandomSupport / DeterministicRandomLabels

    static ObservationSpec random_support(int n, int m, int k, uint64_t seed);
    static ObservationSpec deterministic_labels(int n, int m, uint64_t seed);
    static ObservationSpec de_bruijn(int n, int m);

    std::string to_json() const;
    static ObservationSpec from_json(const std::string& text);
};

Matrix make_transition(const TransitionSpec& spec);
Matrix make_observation(const ObservationSpec& spec);

// Cyclic sequence of length m^j over [0, m) in which every length-j string
// occurs exactly once, via an Eulerian circuit on the order-(j-1) graph.
std::vector<int> de_bruijn_sequence(int m, int j);

// Simple undirected d-regular graph by stub matching with restart; returns
// the symmetric doubly stochastic walk matrix adjacency / d.
Matrix undirected_regular_walk(int n, int d, uint64_t seed);

}  // namespace hmmlab
