#include "lowerbound.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "error.hpp"
#include "generators.hpp"
#include "rng.hpp"

namespace hmmlab {

ConditionedChainRun conditioned_chain(const Hmm& h, const std::vector<int>& outputs) {
    const int tau = static_cast<int>(outputs.size());
    if (tau < 1) throw Error(ErrorCode::InvalidArgument, "outputs must be nonempty");
    for (int o : outputs)
        if (o < 0 || o >= h.m) throw Error(ErrorCode::OutOfRange, "output symbol outside [0, m)");
    const int n = h.n;

    // gamma_t(i) = P[o_{t+1} .. o_tau | h_t = i], renormalized each step.
    std::vector<Vector> gamma(static_cast<size_t>(tau) + 1);
    gamma[static_cast<size_t>(tau)] = Vector::Ones(n);
    double log_scale = 0.0;
    for (int t = tau - 1; t >= 0; --t) {
        Vector weighted(n);
        for (int j = 0; j < n; ++j)
            weighted[j] = h.O(outputs[static_cast<size_t>(t)], j) * gamma[static_cast<size_t>(t) + 1][j];
        Vector raw = h.T.transpose() * weighted;
        double c = raw.sum();
        if (!(c > 0.0))
            throw Error(ErrorCode::ZeroLikelihood,
                        "output string impossible from every state at step " + std::to_string(t));
        gamma[static_cast<size_t>(t)] = raw / c;
        log_scale += std::log(c);
    }

    ConditionedChainRun run;
    run.transitions.reserve(static_cast<size_t>(tau));
    for (int t = 0; t < tau; ++t) {
        Matrix Tt(n, n);
        const Vector& g_next = gamma[static_cast<size_t>(t) + 1];
        for (int i = 0; i < n; ++i) {
            double colsum = 0.0;
            for (int j = 0; j < n; ++j) {
                double v = h.T(j, i) * h.O(outputs[static_cast<size_t>(t)], j) * g_next[j];
                Tt(j, i) = v;
                colsum += v;
            }
            if (colsum > 0.0)
                Tt.col(i) /= colsum;
            else
                Tt.col(i).setConstant(1.0 / n);
        }
        run.transitions.push_back(std::move(Tt));
    }

    const Vector pi = stationary(h);
    double head = pi.dot(gamma[0]);
    if (!(head > 0.0))
        throw Error(ErrorCode::ZeroLikelihood, "output string has zero stationary likelihood");
    run.log_likelihood = std::log(head) + log_scale;
    return run;
}

double forward_log_likelihood(const Hmm& h, const std::vector<int>& outputs) {
    if (outputs.empty()) throw Error(ErrorCode::InvalidArgument, "outputs must be nonempty");
    Vector alpha = stationary(h);
    double log_p = 0.0;
    for (int o : outputs) {
        if (o < 0 || o >= h.m) throw Error(ErrorCode::OutOfRange, "output symbol outside [0, m)");
        Vector next = h.T * alpha;
        for (int j = 0; j < h.n; ++j) next[j] *= h.O(o, j);
        double c = next.sum();
        if (!(c > 0.0)) throw Error(ErrorCode::ZeroLikelihood, "impossible output string");
        alpha = next / c;
        log_p += std::log(c);
    }
    return log_p;
}

namespace {

// Orthonormal basis of the mean-zero subspace: trailing n-1 columns of the
// Householder reflection taking the normalized ones vector to e_1.
Matrix mean_zero_basis(int n) {
    Vector u = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vector w = u;
    w[0] -= 1.0;
    double norm = w.norm();
    Matrix H = Matrix::Identity(n, n);
    if (norm > 1e-15) {
        w /= norm;
        H -= 2.0 * w * w.transpose();
    }
    return H.rightCols(n - 1);
}

}  // namespace

ContractionProbe contraction_probe(const Matrix& Tt, int probes, uint64_t seed) {
    if (probes < 1) throw Error(ErrorCode::InvalidArgument, "probes must be >= 1");
    const int n = static_cast<int>(Tt.rows());
    Rng rng(derive_seed(seed, "contraction"));
    ContractionProbe out;
    for (int p = 0; p < probes; ++p) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        x.array() -= x.mean();
        double norm = x.norm();
        if (norm < 1e-12) continue;
        x /= norm;
        out.monte_carlo_max = std::max(out.monte_carlo_max, (Tt * x).norm());
    }
    Matrix B = mean_zero_basis(n);
    Eigen::BDCSVD<Matrix> svd(Tt * B);
    out.restricted_norm = svd.singularValues()[0];
    return out;
}

double spectral_gap(const Matrix& walk) {
    const int n = static_cast<int>(walk.rows());
    if (walk.cols() != n) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
    if ((walk - walk.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw Error(ErrorCode::NotSymmetric, "walk matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(walk);
    const auto& ev = es.eigenvalues();  // ascending
    return std::abs(ev[n - 2]);
}

EmissionConcentration emission_concentration_check(const Matrix& O, const Matrix& walk,
                                                   int degree) {
    if (O.cols() != walk.rows())
        throw Error(ErrorCode::DimensionMismatch, "O and walk sizes disagree");
    const int n = static_cast<int>(walk.rows());
    const int m = static_cast<int>(O.rows());
    Matrix D = O * walk;  // D(j, i) = P[o_{t+1} = j | h_t = i]
    EmissionConcentration out;
    out.max_deviation = (D.array() - 1.0 / m).abs().maxCoeff();
    out.bound = std::sqrt(6.0 * std::log(static_cast<double>(n)) /
                          (static_cast<double>(degree) * m));
    out.pass = out.max_deviation <= out.bound;
    return out;
}

EmissionConcentrationTrials emission_concentration_trials(int n, int d, int m, int trials,
                                                          uint64_t seed) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    EmissionConcentrationTrials out;
    out.trials = trials;
    for (int t = 0; t < trials; ++t) {
        uint64_t s = derive_seed(seed, static_cast<uint64_t>(t));
        Matrix walk = undirected_regular_walk(n, d, s);
        Rng rng(derive_seed(s, "emission-O"));
        Matrix O(m, n);
        for (int j = 0; j < n; ++j) O.col(j) = rng.simplex(m);
        EmissionConcentration check = emission_concentration_check(O, walk, d);
        out.worst_deviation = std::max(out.worst_deviation, check.max_deviation);
        out.bound = check.bound;
        if (!check.pass) ++out.failures;
    }
    return out;
}

InfluenceDecay influence_decay(const Hmm& h, int tau, int strings, int probes,
                               uint64_t seed) {
    if (tau < 1 || strings < 1 || probes < 1)
        throw Error(ErrorCode::InvalidArgument, "tau, strings and probes must be >= 1");
    const int n = h.n;
    const Vector pi = stationary(h);

    Rng rng(derive_seed(seed, "decay"));
    InfluenceDecay out;
    out.per_step_max = Vector::Zero(tau);
    out.per_step_mean = Vector::Zero(tau);
    std::vector<double> rates;
    int64_t runs = 0;

    const int max_resamples = 50 * strings;
    int sampled = 0;
    for (int s = 0; s < strings; ++s) {
        std::vector<int> outputs(static_cast<size_t>(tau));
        ConditionedChainRun run;
        bool ok = false;
        while (!ok) {
            if (++sampled > max_resamples)
                throw Error(ErrorCode::ZeroLikelihood,
                            "could not sample a feasible output string");
            int state = rng.categorical(pi);
            for (int t = 0; t < tau; ++t) {
                state = rng.categorical(h.T.col(state));
                outputs[static_cast<size_t>(t)] = rng.categorical(h.O.col(state));
            }
            try {
                run = conditioned_chain(h, outputs);
                ok = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroLikelihood) throw;
                ++out.skipped_strings;
            }
        }

        for (int p = 0; p < probes; ++p) {
            Vector x(n);
            for (int i = 0; i < n; ++i) x[i] = rng.normal();
            x.array() -= x.mean();
            double norm = x.lpNorm<1>();
            if (norm < 1e-12) continue;
            x /= norm;
            double prev = 1.0;
            for (int t = 0; t < tau; ++t) {
                x = run.transitions[static_cast<size_t>(t)] * x;
                double cur = x.lpNorm<1>();
                double ratio = prev > 0.0 ? cur / prev : 0.0;
                out.per_step_max[t] = std::max(out.per_step_max[t], ratio);
                out.per_step_mean[t] += ratio;
                prev = cur;
            }
            rates.push_back(prev > 0.0 ? std::pow(prev, 1.0 / tau) : 0.0);
            ++runs;
        }
    }
    if (runs > 0) out.per_step_mean /= static_cast<double>(runs);
    if (!rates.empty()) {
        std::sort(rates.begin(), rates.end());
        out.median_rate = rates[rates.size() / 2];
    }
    return out;
}

}  // namespace hmmlab
