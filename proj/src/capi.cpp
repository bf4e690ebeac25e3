#include "hmmlab/hmmlab.h"

#include <cstring>
#include <string>

#include "json.hpp"

#include "diagnostics.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "generators.hpp"
#include "hmm.hpp"
#include "moments.hpp"
#include "recovery.hpp"
#include "rng.hpp"
#include "tensor.hpp"

struct hmmlab_hmm {
    hmmlab::Hmm model;
};

struct hmmlab_tensor {
    hmmlab::MomentTensor moments;
};

namespace {

thread_local std::string g_last_error;

hmmlab_status status_of(hmmlab::ErrorCode code) {
    using EC = hmmlab::ErrorCode;
    switch (code) {
        case EC::InvalidArgument: return HMMLAB_ERR_INVALID_ARGUMENT;
        case EC::DimensionMismatch: return HMMLAB_ERR_DIMENSION_MISMATCH;
        case EC::NonConvergent: return HMMLAB_ERR_NON_CONVERGENT;
        case EC::ZeroStationaryMass: return HMMLAB_ERR_ZERO_STATIONARY_MASS;
        case EC::SizeCap: return HMMLAB_ERR_SIZE_CAP;
        case EC::SingularProjection: return HMMLAB_ERR_SINGULAR_PROJECTION;
        case EC::ComplexEigenvalues: return HMMLAB_ERR_COMPLEX_EIGENVALUES;
        case EC::PairingFailure: return HMMLAB_ERR_PAIRING_FAILURE;
        case EC::RankDeficient: return HMMLAB_ERR_RANK_DEFICIENT;
        case EC::EmptyInput: return HMMLAB_ERR_EMPTY_INPUT;
        case EC::AlphabetMismatch: return HMMLAB_ERR_ALPHABET_MISMATCH;
        case EC::OutOfRange: return HMMLAB_ERR_OUT_OF_RANGE;
        case EC::InvalidSpec: return HMMLAB_ERR_INVALID_SPEC;
        case EC::BudgetExceeded: return HMMLAB_ERR_BUDGET_EXCEEDED;
        case EC::NotSymmetric: return HMMLAB_ERR_NOT_SYMMETRIC;
        case EC::ZeroLikelihood: return HMMLAB_ERR_ZERO_LIKELIHOOD;
        case EC::InsufficientData: return HMMLAB_ERR_INSUFFICIENT_DATA;
        case EC::Io: return HMMLAB_ERR_IO;
        case EC::Internal: return HMMLAB_ERR_INTERNAL;
    }
    return HMMLAB_ERR_INTERNAL;
}

template <typename Fn>
hmmlab_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return HMMLAB_OK;
    } catch (const hmmlab::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HMMLAB_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return HMMLAB_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

hmmlab_status require(bool ok, const char* message) {
    if (ok) return HMMLAB_OK;
    g_last_error = message;
    return HMMLAB_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* hmmlab_version(void) { return "0.1.0"; }

const char* hmmlab_last_error(void) { return g_last_error.c_str(); }

void hmmlab_string_free(char* s) { delete[] s; }

hmmlab_status hmmlab_hmm_from_json(const char* text, hmmlab_hmm** out) {
    if (auto st = require(text && out, "null argument")) return st;
    return guarded([&] { *out = new hmmlab_hmm{hmmlab::Hmm::from_json(text)}; });
}

hmmlab_status hmmlab_hmm_to_json(const hmmlab_hmm* h, char** out) {
    if (auto st = require(h && out, "null argument")) return st;
    return guarded([&] { *out = dup_string(h->model.to_json()); });
}

hmmlab_status hmmlab_hmm_generate(const char* transition_spec_json,
                                  const char* observation_spec_json, hmmlab_hmm** out) {
    if (auto st = require(transition_spec_json && observation_spec_json && out, "null argument"))
        return st;
    return guarded([&] {
        hmmlab::Matrix T = hmmlab::make_transition(
            hmmlab::TransitionSpec::from_json(transition_spec_json));
        hmmlab::Matrix O = hmmlab::make_observation(
            hmmlab::ObservationSpec::from_json(observation_spec_json));
        *out = new hmmlab_hmm{hmmlab::Hmm::make_with_stationary(std::move(T), std::move(O))};
    });
}

void hmmlab_hmm_free(hmmlab_hmm* h) { delete h; }

hmmlab_status hmmlab_hmm_dims(const hmmlab_hmm* h, int32_t* n_out, int32_t* m_out) {
    if (auto st = require(h && n_out && m_out, "null argument")) return st;
    *n_out = h->model.n;
    *m_out = h->model.m;
    return HMMLAB_OK;
}

hmmlab_status hmmlab_hmm_validate(const hmmlab_hmm* h, char** report_out) {
    if (auto st = require(h && report_out, "null argument")) return st;
    return guarded([&] {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : hmmlab::validate(h->model)) {
            nlohmann::json item;
            item["what"] = v.what;
            item["index"] = v.index;
            item["residual"] = v.residual;
            arr.push_back(std::move(item));
        }
        *report_out = dup_string(arr.dump(2));
    });
}

hmmlab_status hmmlab_exact_moments(const hmmlab_hmm* h, int32_t tau, hmmlab_tensor** out) {
    if (auto st = require(h && out, "null argument")) return st;
    return guarded([&] {
        *out = new hmmlab_tensor{hmmlab::exact_moment_tensor(h->model, tau)};
    });
}

hmmlab_status hmmlab_sampled_moments(const hmmlab_hmm* h, int32_t tau, int64_t windows,
                                     uint64_t seed, hmmlab_tensor** out) {
    if (auto st = require(h && out, "null argument")) return st;
    return guarded([&] {
        auto ws = hmmlab::sample_windows(h->model, tau, windows, seed);
        auto mt = hmmlab::empirical_moment_tensor(ws, h->model.m, tau);
        mt.seed = seed;
        *out = new hmmlab_tensor{std::move(mt)};
    });
}

hmmlab_status hmmlab_tensor_dims(const hmmlab_tensor* t, int64_t dims_out[3]) {
    if (auto st = require(t && dims_out, "null argument")) return st;
    dims_out[0] = t->moments.tensor.d1();
    dims_out[1] = t->moments.tensor.d2();
    dims_out[2] = t->moments.tensor.d3();
    return HMMLAB_OK;
}

hmmlab_status hmmlab_tensor_save(const hmmlab_tensor* t, const char* path) {
    if (auto st = require(t && path, "null argument")) return st;
    return guarded([&] { t->moments.tensor.save(path); });
}

hmmlab_status hmmlab_tensor_load(const char* path, hmmlab_tensor** out) {
    if (auto st = require(path && out, "null argument")) return st;
    return guarded([&] {
        hmmlab::MomentTensor mt;
        mt.tensor = hmmlab::Tensor3::load(path);
        mt.m = static_cast<int>(mt.tensor.d3());
        // recover tau from the leading dimension when it is a clean power
        int tau = 0;
        for (int64_t p = 1; p < mt.tensor.d1() && mt.m > 1; p *= mt.m) ++tau;
        mt.tau = tau > 0 ? tau : 1;
        *out = new hmmlab_tensor{std::move(mt)};
    });
}

hmmlab_status hmmlab_tensor_export_csv(const hmmlab_tensor* t, const char* path) {
    if (auto st = require(t && path, "null argument")) return st;
    return guarded([&] { hmmlab::export_nonzero_csv(t->moments, path); });
}

void hmmlab_tensor_free(hmmlab_tensor* t) { delete t; }

hmmlab_status hmmlab_recover(const hmmlab_tensor* t, int32_t n, uint64_t seed, int32_t noisy,
                             const hmmlab_hmm* reference, char** report_out) {
    if (auto st = require(t && report_out, "null argument")) return st;
    return guarded([&] {
        hmmlab::RecoveryOptions opts =
            noisy ? hmmlab::noisy_recovery_options() : hmmlab::RecoveryOptions{};
        hmmlab::RecoveredHmm rec =
            hmmlab::recover(t->moments, n, seed, opts,
                            reference ? &reference->model : nullptr);
        *report_out = dup_string(rec.report_json());
    });
}

hmmlab_status hmmlab_assumption_profile(const hmmlab_hmm* h, uint64_t seed, char** report_out) {
    if (auto st = require(h && report_out, "null argument")) return st;
    return guarded([&] {
        hmmlab::ProfileOptions opts;
        opts.seed = seed;
        *report_out = dup_string(hmmlab::assumption_profile(h->model, opts).to_json());
    });
}

hmmlab_status hmmlab_experiment_run(const char* config_json, char** manifest_path_out) {
    if (auto st = require(config_json != nullptr, "null argument")) return st;
    return guarded([&] {
        hmmlab::ExperimentOutcome outcome = hmmlab::run_experiment(config_json);
        if (manifest_path_out) *manifest_path_out = dup_string(outcome.manifest_path);
    });
}

hmmlab_status hmmlab_trend_test(const char* csv_path, const char* value_column,
                                const char* group_column, const char* order_column,
                                const char* expect, char** report_out) {
    if (auto st = require(csv_path && value_column && group_column && order_column && expect &&
                              report_out,
                          "null argument"))
        return st;
    return guarded([&] {
        std::string e = expect;
        hmmlab::Trend trend;
        if (e == "increasing")
            trend = hmmlab::Trend::Increasing;
        else if (e == "decreasing")
            trend = hmmlab::Trend::Decreasing;
        else
            throw hmmlab::Error(hmmlab::ErrorCode::InvalidArgument,
                                "expect must be \"increasing\" or \"decreasing\"");
        hmmlab::TrendReport report =
            hmmlab::trend_test(csv_path, value_column, group_column, order_column, trend);
        *report_out = dup_string(report.to_json());
    });
}

}  // extern "C"
