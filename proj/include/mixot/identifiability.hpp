#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mixot/kernels.hpp"
#include "mixot/measure.hpp"
#include "mixot/phi.hpp"

namespace mixot {

// All probes in this module are numerical evidence, not proofs: reports carry
// the thresholds their verdicts used, and absence-of-witness results are
// flagged heuristic.

enum class ProbeVerdict { BoundedAway, Degenerate, Inconclusive };
const char* verdict_name(ProbeVerdict v);

// --- linear-independence Gram diagnostic ---

struct GramReport {
    double min_eigenvalue = 0.0;
    bool independent = false;
    double threshold = 1e-8;  // eigenvalue floor behind the verdict
    int basis_size = 0;
    int sample_points = 0;
};

// Minimum eigenvalue of the normalized Gram matrix of the density and its
// parameter derivatives up to `order` at the given atoms, under an empirical
// L2 inner product over a uniform grid covering the component supports.
GramReport strong_identifiability_gram(const KernelModel& kernel, int order,
                                       const std::vector<Vec>& atoms,
                                       int sample_points = 4096);

// --- known derivative identities ---

// Max absolute residual of a named differential identity over the x grid.
// Tags: "heat" (gaussian location-scale), "gamma-shift" (gamma),
// "skew-normal-1" and "skew-normal-2" (skew-normal).
double pde_residual(const KernelModel& kernel, const std::string& identity,
                    const Vec& theta, const Vec& x_grid);

// --- inverse-bound ratio probes ---

struct RatioPoint {
    double radius = 0.0;
    double min_ratio = 0.0;
};

struct ProbeReport {
    std::string tag;
    int pair_count = 0;
    double min_ratio = std::numeric_limits<double>::infinity();
    std::vector<RatioPoint> trajectory;  // one entry per radius level
    ProbeVerdict verdict = ProbeVerdict::Inconclusive;
    double stability_factor = 3.0;  // bounded-away when max/min < this
    double decay_threshold = 0.8;   // degenerate when log-log slope >= this
    double observed_slope = 0.0;
    double exponent = 1.0;  // denominator exponent actually used
    bool heuristic = true;
};

struct InverseBoundSettings {
    double radius = 0.1;
    int halvings = 3;            // evaluates radii r, r/2, ..., r/2^(h-1)
    int pair_budget = 48;        // random pairs per radius level
    int adversarial_starts = 6;  // direction-minimizing searches per level
    int max_iter = 100;          // iterations per adversarial search
    double exponent = 0.0;       // 0 picks 2*(k - k0 + 1) - 1
    std::uint64_t seed = 0;
};

// Samples measure pairs within a shrinking neighborhood of g0 (random
// perturbations plus adversarial atom-splitting directions found by direct
// search) and tracks the minimum of phi-distance / W_e(G,H)^e.
ProbeReport inverse_bound_probe(const KernelModel& kernel, const PhiClass& phi,
                                const MixingMeasure& g0, int ambient_k,
                                const InverseBoundSettings& settings);

// --- gamma degeneracy path ---

struct PathReport {
    Vec ts;
    Vec ratios;  // V(P_t, P_0) / W1(G_t, G0), one per t
};

// Moves one atom's rate while rebalancing weight onto its shape-shifted twin
// (the direction that cancels the first-order density term when the atoms are
// offset by exactly (1, 0)).  `offset` selects which atom pair the path uses.
PathReport gamma_pathological_path(const KernelModel& kernel, const MixingMeasure& g0,
                                   const Vec& ts, const Vec& offset = {1.0, 0.0});

// --- overfitted gaussian singularity system ---

struct SingularityReport {
    bool found = false;
    double residual = std::numeric_limits<double>::infinity();
    Vec a, b, weights;  // witness triples (a_j, b_j, c_j^2), a[0] pinned to 1
    double min_weight = 0.0;
    double tolerance = 1e-10;
    bool heuristic = true;  // absence of a witness never certifies r-bar
};

// Residuals of the order-r moment-cancellation system at an explicit witness:
// entry alpha-1 holds sum_j d_j sum_{n1+2n2=alpha} a_j^n1 b_j^n2 / (n1! n2!).
// Lets callers check a reported witness by direct evaluation.
Vec singularity_residuals(const Vec& a, const Vec& b, const Vec& d, int r);

// Searches for a nontrivial solution of the order-r polynomial system with
// gap+1 triples (a_j, b_j, c_j): weights c_j^2 ride a floored softmax (all
// kept strictly positive, enforcing the nontriviality predicate) and a_1 is
// pinned to 1, which is lossless up to permutation and the
// (a, b) -> (t a, t^2 b) scaling of the system.
SingularityReport singularity_system_probe(int gap, int r, int starts = 200,
                                           std::uint64_t seed = 0);

// --- product-mixture identifiability ---

struct WitnessReport {
    bool found = false;
    MixingMeasure witness;
    double tv = std::numeric_limits<double>::infinity();
    double separation = 0.0;   // W1 between the witness and g0
    double floor = 0.05;       // required separation
    double tolerance = 1e-10;  // TV threshold for "found"
    bool heuristic = true;
};

// Searches for a mixing measure at least `floor` away from g0 in W1 whose
// N-fold bernoulli product law matches g0's exactly.
WitnessReport product_identifiability_probe(const KernelModel& kernel,
                                            const MixingMeasure& g0, int N,
                                            int starts = 64, std::uint64_t seed = 0);

// --- minimal first-order identifiable length ---

struct N1Report {
    std::vector<ProbeReport> per_n;  // entry i covers N = n_lo + i
    int n_lo = 1;
    int n1 = 0;  // smallest N with a bounded-away verdict, 0 when none
};

// For each sequence length N, probes the ratio of the product total variation
// V(P_{G,N}, P_{G0,N}) to the first-order mixing distance D1(G, G0) over
// shrinking neighborhoods of g0 (exact-fitted: candidates share g0's atom
// count).  Continuous kernels need N <= 3 (tensor quadrature).
N1Report n1_probe(const KernelModel& kernel, const MixingMeasure& g0, int n_lo,
                  int n_hi, const InverseBoundSettings& settings);

}  // namespace mixot
