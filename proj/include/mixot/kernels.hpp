#pragma once

#include <string>
#include <vector>

#include "mixot/common.hpp"
#include "mixot/rng.hpp"

namespace mixot {

// Parametric families of probability kernels f(x|theta).
//
//   gaussian-location        theta = mean in R^q, known covariance Sigma
//   gaussian-location-scale  theta = (mu, v) with v the variance
//   gamma                    theta = (alpha, beta), shape/rate, support x > 0
//   bernoulli                theta in [0,1], x in {0,1}
//   skew-normal              theta = (mu, v, m): location, squared scale, shape
enum class Family {
    GaussianLocation,
    GaussianLocationScale,
    Gamma,
    Bernoulli,
    SkewNormal,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct KernelModel {
    Family family = Family::GaussianLocation;
    Box theta;                    // compact parameter space
    std::vector<Vec> sigma;       // gaussian-location only: known covariance
    // Derived from sigma at construction (gaussian-location only):
    std::vector<Vec> sigma_chol;  // lower-triangular Cholesky factor
    std::vector<Vec> sigma_inv;
    double sigma_logdet = 0.0;

    int param_dim() const { return theta.dim(); }
    int obs_dim() const;
    bool diagonal_sigma() const;
    void validate() const;
};

KernelModel gaussian_location(Box theta, std::vector<Vec> sigma = {});
KernelModel gaussian_location_scale(Box theta);
KernelModel gamma_kernel(Box theta);
KernelModel bernoulli_kernel();
KernelModel skew_normal_kernel(Box theta);

// Pointwise density w.r.t. the family's dominating measure.  Throws if theta
// leaves the parameter box; returns 0 outside the observation support.
double density(const KernelModel& k, const Vec& x, const Vec& theta);
double log_density(const KernelModel& k, const Vec& x, const Vec& theta);

// Exact CDF for families with scalar observations.  For gaussian-location
// with q > 1 use rect_cdf (diagonal covariance only).
double cdf(const KernelModel& k, double x, const Vec& theta);
double rect_cdf(const KernelModel& k, const Vec& x, const Vec& theta);

// i.i.d. draws; deterministic given the caller's stream.
std::vector<Vec> sample(const KernelModel& k, const Vec& theta, Rng& rng, int count);

// Partial derivative of the density in theta for a multi-index with
// |alpha| <= 2.  Closed forms where registered, otherwise central finite
// differences with step 1e-5 * (1 + |theta_i|).  theta must be interior.
double param_derivative(const KernelModel& k, const Vec& x, const Vec& theta,
                        const std::vector<int>& alpha);

// [lo, hi] interval holding all but ~1e-12 of the mass of f(.|theta);
// used to truncate quadrature.  Scalar-observation families only.
std::pair<double, double> support_interval(const KernelModel& k, const Vec& theta);

// Standard normal pdf / cdf helpers shared across the library.
double norm_pdf(double z);
double norm_cdf(double z);

}  // namespace mixot
