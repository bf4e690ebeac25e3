// hmmlab command line: experiment sweeps and trend checks over the C API.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hmmlab/hmmlab.h"

namespace {

using nlohmann::json;

int fail(hmmlab_status status) {
    std::fprintf(stderr, "error: %s\n", hmmlab_last_error());
    return static_cast<int>(status);
}

int run_config(const json& cfg) {
    char* manifest_path = nullptr;
    hmmlab_status status = hmmlab_experiment_run(cfg.dump().c_str(), &manifest_path);
    if (status != HMMLAB_OK) return fail(status);
    std::printf("wrote %s\n", manifest_path);
    hmmlab_string_free(manifest_path);
    return 0;
}

struct CommonOpts {
    uint64_t seed = 0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& common) {
    cmd->add_option("--seed", common.seed, "root RNG seed (no ambient entropy)")->required();
    cmd->add_option("--out", common.out_dir, "output directory for results.csv + manifest.json")
        ->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hmmlab: moment-tensor learning experiments for overcomplete HMMs"};
    app.require_subcommand(1);

    // cycle-cond
    CommonOpts cyc_common;
    int cyc_n = 128, cyc_m = 8, cyc_tau = 3, cyc_k = 8, cyc_trials = 10;
    std::vector<int> cyc_cycles{2, 4, 8, 16};
    std::vector<double> cyc_eps{0.1, 0.2, 0.3, 0.4};
    auto* cyc = app.add_subcommand(
        "cycle-cond", "condition number of the likelihood matrix vs cycle structure");
    cyc->add_option("--n", cyc_n, "hidden states");
    cyc->add_option("--m", cyc_m, "output symbols");
    cyc->add_option("--tau", cyc_tau, "half-window length");
    cyc->add_option("--k", cyc_k, "output support size");
    cyc->add_option("--cycles", cyc_cycles, "cycle lengths (must divide n)")->delimiter(',');
    cyc->add_option("--eps", cyc_eps, "short-cycle mixture weights")->delimiter(',');
    cyc->add_option("--trials", cyc_trials, "trials per cell");
    cyc->footer("results.csv columns: experiment,n,m,tau,k,c,eps,trials,cell_seed,cell_hash,"
                "mean_kappa,median_kappa,sigma2_T,delta2,delta3");
    add_common(cyc, cyc_common);

    // degree-cond
    CommonOpts deg_common;
    int deg_n = 128, deg_m = 8, deg_tau = 3, deg_k = 8, deg_trials = 10;
    std::vector<int> deg_degrees{2, 4, 8, 16};
    std::vector<double> deg_eps{0.01, 0.02, 0.04, 0.06};
    auto* deg = app.add_subcommand(
        "degree-cond", "condition number of the likelihood matrix vs transition degree");
    deg->add_option("--n", deg_n, "hidden states");
    deg->add_option("--m", deg_m, "output symbols");
    deg->add_option("--tau", deg_tau, "half-window length");
    deg->add_option("--k", deg_k, "output support size");
    deg->add_option("--degrees", deg_degrees, "digraph degrees")->delimiter(',');
    deg->add_option("--eps", deg_eps, "per-neighbor mass (eps*d <= 1)")->delimiter(',');
    deg->add_option("--trials", deg_trials, "trials per cell");
    deg->footer("results.csv columns: experiment,n,m,tau,k,d,eps,trials,cell_seed,cell_hash,"
                "mean_kappa,median_kappa,sigma2_T,delta2,delta3");
    add_common(deg, deg_common);

    // recover-exact
    CommonOpts rex_common;
    int rex_n = 4, rex_m = 3, rex_tau = 2, rex_k = 2;
    std::string rex_tspec, rex_ospec;
    auto* rex = app.add_subcommand("recover-exact",
                                   "recover parameters from the exact moment tensor");
    rex->add_option("--n", rex_n, "hidden states");
    rex->add_option("--m", rex_m, "output symbols");
    rex->add_option("--tau", rex_tau, "half-window length");
    rex->add_option("--k", rex_k, "output support size");
    rex->add_option("--transition", rex_tspec, "transition spec JSON (default: n-cycle)");
    rex->add_option("--observation", rex_ospec, "observation spec JSON (default: random support)");
    rex->footer("results.csv columns: experiment,n,m,tau,seed,max_col_l1_T,max_col_l1_O,"
                "reconstruction_error,retries; full matrices land in report.json");
    add_common(rex, rex_common);

    // recover-sampled
    CommonOpts rsa_common;
    int rsa_n = 4, rsa_m = 3, rsa_tau = 2, rsa_k = 2, rsa_trials = 5;
    std::vector<int64_t> rsa_samples{1000, 10000, 100000, 1000000};
    std::string rsa_tspec, rsa_ospec;
    auto* rsa = app.add_subcommand("recover-sampled",
                                   "recover parameters from sampled windows");
    rsa->add_option("--n", rsa_n, "hidden states");
    rsa->add_option("--m", rsa_m, "output symbols");
    rsa->add_option("--tau", rsa_tau, "half-window length");
    rsa->add_option("--k", rsa_k, "output support size");
    rsa->add_option("--samples", rsa_samples, "window counts")->delimiter(',');
    rsa->add_option("--trials", rsa_trials, "seeds per sample count");
    rsa->add_option("--transition", rsa_tspec, "transition spec JSON (default: n-cycle)");
    rsa->add_option("--observation", rsa_ospec, "observation spec JSON (default: random support)");
    rsa->footer("results.csv columns: experiment,n,m,tau,samples,trial,cell_seed,status,"
                "max_col_l1_T,max_col_l1_O");
    add_common(rsa, rsa_common);

    // lowerbound-decay
    CommonOpts low_common;
    int low_d = 16, low_m = 8, low_tau = 40, low_strings = 4, low_probes = 4, low_trials = 20;
    std::vector<int> low_n{100, 500};
    auto* low = app.add_subcommand(
        "lowerbound-decay", "conditioned-chain contraction on dense regular graphs");
    low->add_option("--n-list", low_n, "graph sizes")->delimiter(',');
    low->add_option("--d", low_d, "graph degree");
    low->add_option("--m", low_m, "output symbols");
    low->add_option("--decay-tau", low_tau, "conditioning window length");
    low->add_option("--strings", low_strings, "sampled output strings per instance");
    low->add_option("--probes", low_probes, "perturbation probes per string");
    low->add_option("--trials", low_trials, "instances per graph size");
    low->footer("results.csv columns: experiment,n,d,m,t,measured_contraction,max_contraction,"
                "alpha_bound,lambda2,median_rate,seed (one row per conditioning step)");
    add_common(low, low_common);

    // identifiability
    CommonOpts ide_common;
    int ide_n = 16, ide_m = 2;
    auto* ide = app.add_subcommand("identifiability",
                                   "De Bruijn, counting-bound and Kruskal checks");
    ide->add_option("--n", ide_n, "hidden states for the De Bruijn witness (n = m^j)");
    ide->add_option("--m", ide_m, "output symbols");
    ide->footer("results.csv columns: experiment,check,n,m,tau,value,expected,pass,seed");
    add_common(ide, ide_common);

    // trend
    std::string tr_csv, tr_value = "mean_kappa", tr_group, tr_order, tr_expect = "increasing";
    auto* tr = app.add_subcommand("trend", "Spearman trend verdict over a results CSV");
    tr->add_option("--csv", tr_csv, "results.csv path")->required();
    tr->add_option("--value", tr_value, "value column");
    tr->add_option("--group", tr_group, "group-by column")->required();
    tr->add_option("--order", tr_order, "order-by column")->required();
    tr->add_option("--expect", tr_expect, "increasing|decreasing");

    CLI11_PARSE(app, argc, argv);

    json cfg;
    if (cyc->parsed()) {
        cfg = {{"experiment", "cycle-cond"}, {"n", cyc_n},         {"m", cyc_m},
               {"tau", cyc_tau},             {"k", cyc_k},         {"cycles", cyc_cycles},
               {"eps", cyc_eps},             {"trials", cyc_trials},
               {"seed", cyc_common.seed},    {"out_dir", cyc_common.out_dir}};
        return run_config(cfg);
    }
    if (deg->parsed()) {
        cfg = {{"experiment", "degree-cond"}, {"n", deg_n},          {"m", deg_m},
               {"tau", deg_tau},              {"k", deg_k},          {"degrees", deg_degrees},
               {"eps", deg_eps},              {"trials", deg_trials},
               {"seed", deg_common.seed},     {"out_dir", deg_common.out_dir}};
        return run_config(cfg);
    }
    if (rex->parsed()) {
        cfg = {{"experiment", "recover-exact"}, {"n", rex_n},   {"m", rex_m},
               {"tau", rex_tau},                {"k", rex_k},
               {"seed", rex_common.seed},       {"out_dir", rex_common.out_dir}};
        if (!rex_tspec.empty()) cfg["transition"] = json::parse(rex_tspec);
        if (!rex_ospec.empty()) cfg["observation"] = json::parse(rex_ospec);
        return run_config(cfg);
    }
    if (rsa->parsed()) {
        cfg = {{"experiment", "recover-sampled"}, {"n", rsa_n},          {"m", rsa_m},
               {"tau", rsa_tau},                  {"k", rsa_k},          {"samples", rsa_samples},
               {"trials", rsa_trials},            {"seed", rsa_common.seed},
               {"out_dir", rsa_common.out_dir}};
        if (!rsa_tspec.empty()) cfg["transition"] = json::parse(rsa_tspec);
        if (!rsa_ospec.empty()) cfg["observation"] = json::parse(rsa_ospec);
        return run_config(cfg);
    }
    if (low->parsed()) {
        cfg = {{"experiment", "lowerbound-decay"},
               {"n_list", low_n},
               {"d", low_d},
               {"m", low_m},
               {"decay_tau", low_tau},
               {"strings", low_strings},
               {"probes", low_probes},
               {"trials", low_trials},
               {"seed", low_common.seed},
               {"out_dir", low_common.out_dir}};
        return run_config(cfg);
    }
    if (ide->parsed()) {
        cfg = {{"experiment", "identifiability"},
               {"n", ide_n},
               {"m", ide_m},
               {"seed", ide_common.seed},
               {"out_dir", ide_common.out_dir}};
        return run_config(cfg);
    }
    if (tr->parsed()) {
        char* report = nullptr;
        hmmlab_status status = hmmlab_trend_test(tr_csv.c_str(), tr_value.c_str(),
                                                 tr_group.c_str(), tr_order.c_str(),
                                                 tr_expect.c_str(), &report);
        if (status != HMMLAB_OK) return fail(status);
        std::printf("%s\n", report);
        json parsed = json::parse(report);
        hmmlab_string_free(report);
        return parsed["pass"].get<bool>() ? 0 : 1;
    }
    return 0;
}
