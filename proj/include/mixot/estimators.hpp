#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixot/kernels.hpp"
#include "mixot/measure.hpp"
#include "mixot/mixture.hpp"
#include "mixot/optimize.hpp"

namespace mixot {

// Shared settings for the mixing-measure estimators.
struct EstimatorConfig {
    int k = 1;       // atom budget
    Box theta;       // parameter box the atoms must live in
    int multistart = 16;
    int max_iter = 400;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    std::string tag;            // estimator name, carried through reports
    double weight_floor = 0.0;  // optional lower bound on mixture weights
    bool record_trace = false;  // EM: keep per-iteration log-likelihoods

    void validate() const;
};

struct EstimateResult {
    MixingMeasure estimate;
    double objective = 0.0;
    int starts = 0;
    long long iterations = 0;
    bool converged = false;
    Vec loglik_trace;  // EM only, when record_trace is set
};

// --- objectives (exposed so callers can compare candidate measures) ---

// Exact Kolmogorov–Smirnov statistic between the model CDF and the empirical
// CDF of the (ascending) data: the sup is attained at the jump points, so both
// one-sided gaps are evaluated at every observation.
double ks_objective(const MixtureModel& model, const std::vector<double>& sorted_data);

// Multivariate variant for diagonal-covariance location kernels: one-sided
// empirical gaps evaluated at the data points under the rectangular CDF.
double ks_objective_rect(const MixtureModel& model, const std::vector<Vec>& data);

// Kernel-embedding discrepancy sum p_i p_j K(theta_i,theta_j) - 2 sum p_i Jn(theta_i),
// i.e. squared MMD against the empirical measure minus the data-only constant.
double mmd_objective(const KernelModel& kernel, const MixingMeasure& g,
                     const std::vector<Vec>& data, double gamma);

// Sup over orders j of |sum_i p_i (theta_i - center)^j - stat_means[j-1]|.
double gmm_objective(const MixingMeasure& g, const Vec& stat_means, double center);

// Mean log-likelihood of the data under the mixture (per observation).
double mean_loglik(const MixtureModel& model, const std::vector<Vec>& data);
double mean_loglik_product(const ProductMixtureModel& model,
                           const std::vector<std::vector<Vec>>& sequences);

// --- estimators ---

// Minimum Kolmogorov–Smirnov distance over measures with at most cfg.k atoms.
EstimateResult min_ks_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                               const EstimatorConfig& cfg);

// Minimum kernel-embedding (MMD) distance for Gaussian location kernels,
// minimized by projected gradient descent with analytic gradients; weights
// live on the simplex, atoms are clipped into the box.  The bandwidth must be
// positive; mmd_median_bandwidth supplies the usual default.
EstimateResult min_mmd_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                                double gamma, const EstimatorConfig& cfg);

// Generalized method of moments for the 1-D Gaussian location kernel: matches
// the first 2k-1 unbiased moment statistics in sup norm, with a Gauss-Newton
// polish on the square moment system.
EstimateResult gmm_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                            const EstimatorConfig& cfg, double center = 0.0);

// Same minimization but with the statistic means supplied directly (e.g. the
// exact moments of a target measure).
EstimateResult gmm_estimate_from_moments(const Vec& stat_means, const KernelModel& kernel,
                                         const EstimatorConfig& cfg, double center = 0.0);

// EM baseline to a local maximum of the likelihood, best of cfg.multistart
// k-means++-seeded restarts.  The reported objective is the negative mean
// log-likelihood.  Supports gaussian-location, gamma, and bernoulli kernels.
EstimateResult em_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                           const EstimatorConfig& cfg);

// EM for i.i.d.-block product mixtures: responsibilities per sequence, with
// the component updates pooled over sequence positions.
EstimateResult em_estimate_product(const std::vector<std::vector<Vec>>& sequences,
                                   const KernelModel& kernel, const EstimatorConfig& cfg);

}  // namespace mixot
