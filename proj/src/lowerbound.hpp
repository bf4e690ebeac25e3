#pragma once

#include <cstdint>
#include <vector>

#include "hmm.hpp"
#include "types.hpp"

namespace hmmlab {

struct ConditionedChainRun {
    std::vector<Matrix> transitions;  // T^(0) .. T^(tau-1), column-stochastic
    double log_likelihood = 0.0;      // log P[o_1 .. o_tau]
};

// Time-inhomogeneous chain obtained by conditioning on a future output
// string: T^(t)(j, i) = P[h_{t+1} = j | h_t = i, o_{t+1} .. o_tau]. This is
// the product of two diagonal reweightings around T (future-likelihood
// scalings of the target and source states); the diagonal split is only
// unique up to scalars, so the kernel is computed directly from the backward
// likelihood ratios. Backward likelihoods are renormalized per step, keeping
// tau up to a few thousand safe. States that cannot produce the remaining
// outputs get a uniform column.
ConditionedChainRun conditioned_chain(const Hmm& h, const std::vector<int>& outputs);

// Scaled forward algorithm; the independent route to the same likelihood.
double forward_log_likelihood(const Hmm& h, const std::vector<int>& outputs);

struct ContractionProbe {
    double monte_carlo_max = 0.0;  // max ||Tt x||_2 over sampled mean-zero unit x
    double restricted_norm = 0.0;  // exact operator norm on the mean-zero subspace
};

ContractionProbe contraction_probe(const Matrix& Tt, int probes, uint64_t seed);

// Magnitude of the second-largest (algebraic) eigenvalue of a symmetric
// doubly stochastic walk matrix.
double spectral_gap(const Matrix& walk);

struct EmissionConcentration {
    double max_deviation = 0.0;  // max over (state, symbol) of |P[o|h] - 1/m|
    double bound = 0.0;          // sqrt(6 log n / (d m))
    bool pass = false;
};

// Exact neighbor-averaged emission probabilities for one (O, graph) pair.
EmissionConcentration emission_concentration_check(const Matrix& O, const Matrix& walk,
                                                   int degree);

struct EmissionConcentrationTrials {
    int trials = 0;
    int failures = 0;
    double worst_deviation = 0.0;
    double bound = 0.0;
};

// Fresh (d-regular graph, random simplex O) pair per trial.
EmissionConcentrationTrials emission_concentration_trials(int n, int d, int m, int trials,
                                                          uint64_t seed);

struct InfluenceDecay {
    Vector per_step_max;     // max l1 contraction ratio at each step
    Vector per_step_mean;
    double median_rate = 0.0;  // median over runs of (||x_tau||_1)^{1/tau}
    int skipped_strings = 0;   // impossible strings resampled
};

// Strings are sampled from the model itself; perturbations are random
// mean-zero vectors with unit l1 norm pushed through the conditioned chain.
InfluenceDecay influence_decay(const Hmm& h, int tau, int strings, int probes,
                               uint64_t seed);

}  // namespace hmmlab
