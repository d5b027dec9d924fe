#pragma once

#include <vector>

#include "mixot/mixture.hpp"

namespace mixot {

// Test-function classes Phi inducing distances sup_{phi} |G phi - H phi|
// between mixing measures through the induced mixtures:
//   ks-cdf    half-line indicators: the Kolmogorov–Smirnov distance of CDFs
//   mmd-rkhs  Gaussian RBF unit ball: the kernel mean discrepancy
//   monomial  monomials about a center, up to a fixed order: moment distance
enum class PhiFamily { KsCdf, MmdRkhs, Monomial };

struct PhiClass {
    PhiFamily family = PhiFamily::KsCdf;
    double gamma = 1.0;  // RBF bandwidth, mmd-rkhs only
    Vec center;          // monomial only
    int order = 1;       // monomial only: sup over |alpha| <= order
};

PhiClass ks_phi();
PhiClass mmd_phi(double gamma);
PhiClass monomial_phi(Vec center, int order);

double phi_distance(const PhiClass& phi, const MixingMeasure& G,
                    const MixingMeasure& H, const KernelModel& kernel);

// Closed-form RKHS embeddings for gaussian-location kernels under the RBF
// ker(x,y) = exp(-gamma |x-y|^2):
//   mmd_pair_kernel  K(a, b)   = E ker(Z, Z') with Z ~ f(.|a), Z' ~ f(.|b)
//   mmd_point_kernel J(a, x)   = E ker(Z, x)  with Z ~ f(.|a)
double mmd_pair_kernel(const KernelModel& kernel, const Vec& a, const Vec& b,
                       double gamma);
double mmd_point_kernel(const KernelModel& kernel, const Vec& a, const Vec& x,
                        double gamma);

// Squared MMD between the mixtures induced by G and H (closed form).
double mmd_squared(const KernelModel& kernel, const MixingMeasure& G,
                   const MixingMeasure& H, double gamma);

// Median-heuristic bandwidth: 1 / (2 median^2) of pairwise data distances.
double mmd_median_bandwidth(const std::vector<Vec>& data);

// Moment statistics for the 1-D gaussian-location kernel with variance
// sigma^2: polynomials t_j with E[t_j(X) | theta] = (theta - theta0)^j.
// Returned as coefficient rows in powers of (x - theta0); row j-1 holds t_j.
std::vector<Vec> gmm_statistic_coeffs(int max_order, double sigma, double theta0);
double gmm_statistic_eval(const Vec& coeffs, double theta0, double x);

}  // namespace mixot
