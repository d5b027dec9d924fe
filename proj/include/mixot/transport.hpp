#pragma once

#include <functional>

#include "mixot/measure.hpp"

namespace mixot {

using GroundMetric = std::function<double(const Vec&, const Vec&)>;
using GroundCost = std::function<double(const Vec&, const Vec&)>;

// Exact optimal transport between two discrete distributions: minimizes
// sum flow(i,j)*cost(i,j) subject to the marginal constraints.  Dense
// transportation simplex; intended regime is k <= 200.
TransportPlan solve_transport(const std::vector<double>& cost,  // row-major k x kprime
                              const Vec& source_weights, const Vec& target_weights);

// r-order Wasserstein distance with a pluggable ground metric (Euclidean by
// default).  Returns the distance (r-th root taken) and the optimal plan
// whose total_cost is the r-th power.
struct WassersteinResult {
    double value = 0.0;
    TransportPlan plan;
};

WassersteinResult wasserstein(const MixingMeasure& g, const MixingMeasure& h,
                              double r, const GroundMetric& metric = {});

inline double wasserstein_value(const MixingMeasure& g, const MixingMeasure& h,
                                double r, const GroundMetric& metric = {}) {
    return wasserstein(g, h, r, metric).value;
}

// Exact value by enumerating all k! matchings; oracle for small equal-weight
// instances.  Refuses k > 8.
double wasserstein_equal_weight_bruteforce(const MixingMeasure& g,
                                           const MixingMeasure& h, double r,
                                           const GroundMetric& metric = {});

// Permutation-minimized sum of sqrt(n)-weighted atom distances plus weight
// differences; defined only for measures with the same number of atoms.
// Exact enumeration for k <= 8, assignment LP above.
double d_n_metric(const MixingMeasure& g, const MixingMeasure& h, double n_weight);

// Optimal matching under the n_weight = 1 cost; returns tau with
// tau[i] = index in h matched to atom i of g.
std::vector<int> d_n_matching(const MixingMeasure& g, const MixingMeasure& h,
                              double n_weight = 1.0);

// Optimal transport between measures-of-measures where the ground cost is
// wasserstein(.,.,r)^r; returns the r-th root of the outer value.
double nested_wasserstein(const MeasureOfMeasures& d, const MeasureOfMeasures& e,
                          double r);

// Weighted union of the inner atoms, canonicalized.
MixingMeasure mean_measure(const MeasureOfMeasures& d);

// Optimal transport value with an arbitrary nonnegative ground cost (no root
// taken); the composite transport distance when the cost is a divergence
// between kernel components.
double composite_transport(const MixingMeasure& g, const MixingMeasure& h,
                           const GroundCost& ground_cost);

}  // namespace mixot
