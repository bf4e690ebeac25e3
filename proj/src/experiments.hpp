#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hmmlab {

// Batch experiment driver. Configs are JSON; unspecified fields default per
// experiment and the resolved config lands in the manifest, so every run is
// reproducible from its outputs alone. `seed` and `out_dir` are mandatory.
//
// Experiments: cycle-cond, degree-cond, recover-exact, recover-sampled,
// lowerbound-decay, identifiability.
struct ExperimentOutcome {
    std::string csv_path;
    std::string manifest_path;
    int64_t rows = 0;
};

ExperimentOutcome run_experiment(const std::string& config_json);

enum class Trend { Increasing, Decreasing };

struct TrendGroup {
    std::string key;
    double rho = 0.0;  // Spearman rank correlation, ties averaged
    int points = 0;
};

struct TrendReport {
    std::vector<TrendGroup> groups;
    double median_rho = 0.0;  // signed median over groups
    bool pass = false;        // |median| >= 0.8 with the expected sign

    std::string to_json() const;
};

// Per-group Spearman correlation of value_column against order_column.
// Groups with fewer than 3 points raise InsufficientData.
TrendReport trend_test(const std::string& csv_path, const std::string& value_column,
                       const std::string& group_column, const std::string& order_column,
                       Trend expect);

}  // namespace hmmlab
