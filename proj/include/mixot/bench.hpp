#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mixot/estimators.hpp"
#include "mixot/kernels.hpp"
#include "mixot/measure.hpp"

namespace mixot {

// What to score on each fitted estimate, always against the measure that
// generated the replicate's data.
//
//   Wasserstein  exact W_r between estimate and truth (order r)
//   DN           sqrt(N)-weighted atom/weight matching cost, N from the rung
//   Atom         mean matched atom distance (1/k) sum ||theta_tau(i) - theta*_i||
//   Weight       mean matched weight gap   (1/k) sum |p_tau(i) - p*_i|
//
// Atom/Weight use the matching that is optimal for the combined cost at
// n_weight = 1, so both halves come from the same permutation.  They require
// the estimate and the truth to carry the same number of atoms.
struct ErrorMetric {
    enum class Kind { Wasserstein, DN, Atom, Weight };
    Kind kind = Kind::Wasserstein;
    double r = 1.0;  // Wasserstein order, ignored otherwise
};

std::string metric_name(const ErrorMetric& m);  // "w1", "w2.5", "d_n", "atom", "weight"
ErrorMetric metric_from_name(const std::string& name);

// One rung of the sample-size ladder.  Exactly one shape is active:
// n > 0 for i.i.d. draws, or (m, N) for m sequences of N exchangeable
// observations each.  total() is the comparable size across both shapes.
struct Rung {
    long n = 0;
    long m = 0;
    int N = 0;

    bool product() const { return n <= 0; }
    long total() const { return product() ? m * static_cast<long>(N) : n; }
};

// Full description of a rate experiment: sample from (kernel, truth), fit
// the named estimator at every rung, score the fits.  Everything downstream
// (rows, fits, serialized output) is a pure function of this struct.
struct ExperimentConfig {
    std::string scenario;
    KernelModel kernel;
    MixingMeasure truth;
    std::string estimator;  // "ks" | "mmd" | "gmm" | "em"
    EstimatorConfig estimator_config;
    std::vector<ErrorMetric> metrics;
    std::vector<Rung> ladder;  // strictly increasing in total()
    int replicates = 30;
    std::uint64_t master_seed = 0;

    double mmd_gamma = 0.0;  // mmd only; <= 0 selects the median heuristic per replicate
    double gmm_center = 0.0;

    // Timings are zero unless requested, so repeated runs are byte-identical.
    bool timings = false;

    // Local worst-case variant: each replicate redraws the generating measure
    // uniformly in a ball around `truth` and the per-rung aggregate becomes
    // the max error instead of the mean.  A search over a sampled
    // neighborhood is a heuristic stand-in for a local minimax bound, and the
    // outputs say so.  local_radius <= 0 picks 0.2 * (minimum atom
    // separation), the widest ball that keeps the redraw's atoms matched.
    bool local_worst_case = false;
    double local_radius = 0.0;

    void validate() const;
};

// One CSV row: a single (replicate, metric) score at one rung.
struct ReplicateRow {
    long rung_n = 0;
    long rung_m = 0;
    int rung_N = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;      // nan when the fit failed
    double objective = 0.0;  // estimator's attained objective, nan on failure
    double wallclock_ms = 0.0;
    bool failed = false;
};

struct RatePoint {
    double size = 0.0;       // rung total()
    double mean_error = 0.0;  // over the replicates that succeeded
    double std_error = 0.0;   // standard error of that mean
    double max_error = 0.0;
};

// Least-squares line through (log size, log error): slope is the empirical
// convergence exponent, slope_se its usual OLS standard error, r2 the fit
// quality.  Under the worst-case variant the regression runs on max_error.
struct RateFit {
    std::vector<RatePoint> points;
    double slope = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    int replicates = 0;
    bool worst_case = false;
};

// Fit from a bare (size, mean error) table.  Requires at least four rungs
// and strictly positive errors; throws InvalidArgument otherwise.
RateFit fit_rate(const std::vector<std::pair<double, double>>& rung_means);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ReplicateRow> rows;  // rung-major, then replicate, then metric
    // Keyed by metric name; present only when the config earns a fit
    // (>= 4 rungs, >= 30 replicates, positive finite per-rung errors).
    std::map<std::string, RateFit> fits;
    int failed_rows = 0;
    double max_rung_failure_rate = 0.0;
    bool excess_failures = false;  // some rung lost more than 5% of its replicates
};

// Run the whole grid.  Replicates run in parallel; every replicate draws its
// randomness from a stream keyed by (scenario, rung, replicate index), so
// rows are reproducible and unaffected by thread count, added rungs, or a
// different replicate total.  A replicate whose sampler or estimator throws
// a runtime failure is recorded as a failed row and excluded from the
// aggregates; excess_failures flags any rung where that exceeds 5%.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// One replicate exactly as run_experiment executes it (same derived seed,
// same draw-then-fit order), but exposing the fitted measure itself instead
// of just its scores.  Estimator failures propagate as RuntimeFailure.
struct ReplicateOutcome {
    Rung rung;
    std::uint64_t seed = 0;
    MixingMeasure generating;  // the truth, or its local perturbation
    MixingMeasure estimate;
    double objective = 0.0;
    std::vector<std::pair<std::string, double>> scores;  // metric name, value
};
ReplicateOutcome run_replicate(const ExperimentConfig& cfg, int rung_index, int replicate);

// The exact CSV contract: header
//   scenario,rung_n,rung_m,rung_N,replicate,seed,error_metric,error_value,
//   estimator_objective,wallclock_ms,failed
// with doubles printed at %.17g so equal runs are byte-identical.
void write_csv(const ExperimentResult& res, std::ostream& out);
std::string result_csv(const ExperimentResult& res);

// Summary as indent-2 JSON: scenario, replicates, rung count, failure info,
// and per-metric {slope, slope_se, r2, rungs, replicates} plus the per-rung
// points.  Worst-case summaries carry "heuristic": true.
std::string summary_json(const ExperimentResult& res);

// JSON round-trip for configs; field names mirror ExperimentConfig exactly.
ExperimentConfig experiment_from_json(const std::string& text);
std::string experiment_to_json(const ExperimentConfig& cfg);

// A catalog entry: a ready-to-run config, the rate statement it exercises,
// and, where theory pins the exponent, an acceptance window per metric.
struct Scenario {
    ExperimentConfig config;
    std::string claim;
    std::map<std::string, std::pair<double, double>> slope_windows;
};

// The built-in experiments.  Names are stable identifiers (CLI --scenario).
const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& name);

// Shrink a config for smoke runs: replicates scaled (floor 2), ladder
// truncated to rungs with total() <= scale * max total (the smallest rung
// always survives).  scale >= 1 returns the config unchanged.
ExperimentConfig scaled_config(const ExperimentConfig& cfg, double scale);

}  // namespace mixot
