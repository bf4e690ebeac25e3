// Exercises the shared-library surface end to end through the C header only.
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "hmmlab/hmmlab.h"

namespace {

int failures = 0;

void check(bool ok, const char* what) {
    if (!ok) {
        std::fprintf(stderr, "FAILED: %s (last error: %s)\n", what, hmmlab_last_error());
        ++failures;
    }
}

}  // namespace

int main() {
    check(std::strlen(hmmlab_version()) > 0, "version string");

    // generate a 4-state cycle with random 2-support outputs
    hmmlab_hmm* h = nullptr;
    check(hmmlab_hmm_generate("{\"kind\":\"cycle\",\"n\":4}",
                              "{\"kind\":\"random-support\",\"n\":4,\"m\":3,\"k\":2,\"seed\":10}",
                              &h) == HMMLAB_OK,
          "generate");
    int32_t n = 0, m = 0;
    check(hmmlab_hmm_dims(h, &n, &m) == HMMLAB_OK && n == 4 && m == 3, "dims");

    char* report = nullptr;
    check(hmmlab_hmm_validate(h, &report) == HMMLAB_OK, "validate call");
    check(nlohmann::json::parse(report).empty(), "generated model is valid");
    hmmlab_string_free(report);

    // JSON round trip
    char* text = nullptr;
    check(hmmlab_hmm_to_json(h, &text) == HMMLAB_OK, "to_json");
    hmmlab_hmm* h2 = nullptr;
    check(hmmlab_hmm_from_json(text, &h2) == HMMLAB_OK, "from_json");
    hmmlab_string_free(text);

    // exact moments, save/load, recovery against the reference
    hmmlab_tensor* t = nullptr;
    check(hmmlab_exact_moments(h, 2, &t) == HMMLAB_OK, "exact moments");
    int64_t dims[3] = {0, 0, 0};
    check(hmmlab_tensor_dims(t, dims) == HMMLAB_OK && dims[0] == 9 && dims[1] == 9 &&
              dims[2] == 3,
          "tensor dims");

    std::string tensor_path =
        (std::filesystem::temp_directory_path() / "hmmlab_capi_tensor.bin").string();
    check(hmmlab_tensor_save(t, tensor_path.c_str()) == HMMLAB_OK, "tensor save");
    hmmlab_tensor* loaded = nullptr;
    check(hmmlab_tensor_load(tensor_path.c_str(), &loaded) == HMMLAB_OK, "tensor load");
    int64_t dims2[3] = {0, 0, 0};
    hmmlab_tensor_dims(loaded, dims2);
    check(dims2[0] == dims[0] && dims2[2] == dims[2], "loaded dims match");
    std::remove(tensor_path.c_str());

    char* rec = nullptr;
    check(hmmlab_recover(t, 4, 7, 0, h, &rec) == HMMLAB_OK, "recover");
    {
        auto j = nlohmann::json::parse(rec);
        check(j["alignment"]["max_col_l1_T"].get<double>() <= 1e-6, "recovery error small");
    }
    hmmlab_string_free(rec);

    // sampled moments and noisy recovery
    hmmlab_tensor* ts = nullptr;
    check(hmmlab_sampled_moments(h, 2, 200000, 11, &ts) == HMMLAB_OK, "sampled moments");
    char* rec2 = nullptr;
    check(hmmlab_recover(ts, 4, 9, 1, h, &rec2) == HMMLAB_OK, "noisy recover");
    {
        auto j = nlohmann::json::parse(rec2);
        check(j["alignment"]["max_col_l1_T"].get<double>() <= 0.2, "noisy error bounded");
    }
    hmmlab_string_free(rec2);

    // assumption profile
    char* profile = nullptr;
    check(hmmlab_assumption_profile(h, 3, &profile) == HMMLAB_OK, "assumption profile");
    {
        auto j = nlohmann::json::parse(profile);
        check(j.contains("sigma1_T") && j.contains("c_min"), "profile fields");
    }
    hmmlab_string_free(profile);

    // experiment + trend through the C surface
    std::string out_dir = (std::filesystem::temp_directory_path() / "hmmlab_capi_exp").string();
    std::filesystem::remove_all(out_dir);
    nlohmann::json cfg = {{"experiment", "cycle-cond"}, {"n", 16},  {"m", 4},
                          {"tau", 2},                   {"k", 2},   {"cycles", {2, 4}},
                          {"eps", {0.1, 0.2, 0.3}},     {"trials", 2}, {"seed", 21},
                          {"out_dir", out_dir}};
    char* manifest_path = nullptr;
    check(hmmlab_experiment_run(cfg.dump().c_str(), &manifest_path) == HMMLAB_OK,
          "experiment run");
    hmmlab_string_free(manifest_path);
    char* trend = nullptr;
    std::string csv_path = out_dir + "/results.csv";
    check(hmmlab_trend_test(csv_path.c_str(), "mean_kappa", "c", "eps", "increasing",
                            &trend) == HMMLAB_OK,
          "trend test call");
    hmmlab_string_free(trend);
    std::filesystem::remove_all(out_dir);

    // error paths surface codes and messages
    hmmlab_hmm* bad = nullptr;
    check(hmmlab_hmm_from_json("not json", &bad) == HMMLAB_ERR_INVALID_ARGUMENT,
          "bad json status");
    check(std::strlen(hmmlab_last_error()) > 0, "error message populated");
    check(hmmlab_hmm_generate("{\"kind\":\"union-of-cycles\",\"n\":10,\"c\":3}",
                              "{\"kind\":\"random-support\",\"n\":10,\"m\":3,\"k\":2,\"seed\":1}",
                              &bad) == HMMLAB_ERR_INVALID_SPEC,
          "invalid spec status");
    check(hmmlab_exact_moments(h, 40, &ts) == HMMLAB_ERR_SIZE_CAP, "size cap status");
    check(hmmlab_hmm_dims(nullptr, &n, &m) == HMMLAB_ERR_INVALID_ARGUMENT, "null handle");

    hmmlab_tensor_free(t);
    hmmlab_tensor_free(ts);
    hmmlab_tensor_free(loaded);
    hmmlab_hmm_free(h);
    hmmlab_hmm_free(h2);

    if (failures == 0) std::printf("hmmlab_capi_tests: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
