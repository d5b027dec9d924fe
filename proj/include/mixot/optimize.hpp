#pragma once

#include <functional>
#include <vector>

#include "mixot/measure.hpp"
#include "mixot/rng.hpp"

namespace mixot {

using Objective = std::function<double(const Vec&)>;

struct NelderMeadResult {
    Vec x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Classic Nelder–Mead with per-coordinate initial steps.  Stops when the
// simplex value spread falls below ftol or max_iter expansions run out.
NelderMeadResult nelder_mead(const Objective& f, const Vec& x0, const Vec& steps,
                             int max_iter = 400, double ftol = 1e-10);

// Minimize a unimodal function on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-8);

// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& v);

// Latin hypercube sample: `count` points in the unit cube of dimension `dim`,
// one point per stratum along every axis.
std::vector<Vec> latin_hypercube(int count, int dim, Rng& rng);

// Damped Gauss–Newton on a small residual system with a finite-difference
// Jacobian.  Returns the final iterate; `out_norm` (optional) receives the
// final residual sup-norm.
Vec gauss_newton(const std::function<Vec(const Vec&)>& residual, Vec x,
                 int max_iter = 60, double tol = 1e-14, double* out_norm = nullptr);

// Multistart minimization over measures with at most k atoms in a box:
// atoms move freely (clipped into the box with a quadratic penalty) and
// weights ride a softmax with the first logit pinned to zero.
struct GkSettings {
    int starts = 16;
    int max_iter = 400;
    double ftol = 1e-10;
    uint64_t seed = 0;
    double penalty = 1e4;  // weight of the out-of-box quadratic penalty
    // Deterministic seeds (each with exactly k atoms) tried before the random
    // starts, with a halved initial simplex; the result is best-of-all.
    std::vector<MixingMeasure> warm_starts;
};

struct GkResult {
    MixingMeasure argmin;
    double value = 0.0;
    int starts = 0;
    long long iterations = 0;
    bool converged = false;
    double start_spread = 0.0;  // best-vs-worst converged start values
};

using MeasureObjective = std::function<double(const MixingMeasure&)>;

GkResult optimize_over_gk(const MeasureObjective& objective, int k, const Box& theta,
                          const GkSettings& settings);

// The (atoms, logits) <-> measure coding used by optimize_over_gk, exposed so
// estimators can polish or re-evaluate solutions in the same coordinates.
MixingMeasure decode_gk(const Vec& x, int k, const Box& theta, double* penalty);
Vec encode_gk(const MixingMeasure& g, const Box& theta);

}  // namespace mixot
