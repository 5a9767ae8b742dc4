#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixbo/acquisition.hpp"
#include "mixbo/benchmarks.hpp"
#include "mixbo/gp.hpp"
#include "mixbo/reparam.hpp"
#include "mixbo/search_space.hpp"
#include "mixbo/trace.hpp"

namespace mixbo {

struct BenchmarkRef {
    std::string id = "bs";  // bs | dust1 | dust2
    int dims = 2;           // bs only
    std::string pattern = "ci";

    std::string key() const;
};

struct BenchmarkInstance {
    std::string id;
    SearchSpace space;
    Objective objective;  // noiseless
    std::pair<int, int> default_budget;
};

BenchmarkInstance make_benchmark(const BenchmarkRef& ref);
Optimum benchmark_truth(const BenchmarkRef& ref);

/// Model preset = acquisition prefix + kernel preset name, or the pure
/// Sobol baseline: ei_<kernel>, lcb_<kernel>, SOBOL_off.
struct ModelPreset {
    std::string name;
    bool sobol_only = false;
    AfKind af = AfKind::EI;
    std::string kernel;  // empty for SOBOL_off

    static ModelPreset parse(const std::string& name);
};

struct RunConfig {
    BenchmarkRef benchmark;
    std::string preset = "ei_BOSS_on_gam_Mat52";
    std::vector<int> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    int init_points = -1;  // -1: benchmark default
    int iter_budget = -1;
    PenaltySpec penalty{true, 1e6};
    MafSpec maf;
    PrSettings pr;
    FitOptions fit;
    double noise_sd = 0.0;     // additive Gaussian observation noise (test shim)
    bool record_timing = false;
    std::string out_dir = "runs";

    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    void validate() const;

    int effective_init() const;
    int effective_budget() const;
};

/// One full BO run (or Sobol baseline), fully deterministic given the seed.
RunTrace run_bo(const RunConfig& config, int seed);

/// Trace file name for one (config, seed): <bench>__<preset>__seed<k>.csv.
std::string trace_filename(const RunConfig& config, int seed);
/// Executes all seeds and writes trace CSVs into config.out_dir.
std::vector<std::string> run_all(const RunConfig& config);

// ---- convergence & scoring --------------------------------------------------

struct ToleranceSpec {
    std::string level = "medium";  // strict | medium | loose
    double y_pct = 0.005;          // fraction of the objective range
    double x_pct = 0.02;           // fraction of each continuous range
    // non-continuous coordinates must match the optimum exactly

    static ToleranceSpec named(const std::string& benchmark_id, const std::string& level);
};

/// First trace iteration whose best-so-far sample meets the tolerance, or
/// nullopt.  Iteration 0 means a qualifying initialization point.
std::optional<int> check_convergence(const RunTrace& trace, const SearchSpace& space,
                                     const ToleranceSpec& tol, const Optimum& truth);

struct CompositeScore {
    int converged = 0;
    int total = 0;
    double mean_iteration = 0.0;  // over converged runs; undefined when none
    double score = 0.0;           // converged / (total * mean_iteration); 0 when none
};

CompositeScore composite_score(const std::vector<std::optional<int>>& convergence_iters);

struct RankSummary {
    std::string model;
    int num_ranks = 0;
    double mean = 0.0;
    double median = 0.0;
    int min = 0;
    int max = 0;
};

/// Dense ranks per variant by descending score (ties share the better rank);
/// models missing a variant are simply absent from that variant's ranking.
std::vector<RankSummary> rank_models(const std::map<std::string, std::map<std::string, double>>& scores);

/// Per-iteration regret summary across seeds: iter, mean, sd, min, max.
std::string plot_data_csv(const std::vector<RunTrace>& traces);

}  // namespace mixbo
