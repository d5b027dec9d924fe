#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mixot/common.hpp"

namespace mixot {

// Finitely supported probability measure on a parameter space: the latent
// object of inference.  Atoms live in R^q, weights are nonnegative and sum
// to one (within 1e-12).  Atoms need not be distinct on input; canonicalize()
// merges near-duplicates.
struct MixingMeasure {
    std::vector<Vec> atoms;
    Vec weights;

    int k() const { return static_cast<int>(atoms.size()); }
    int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms[0].size()); }

    void validate() const;

    // Merge atoms closer than merge_tol (Euclidean) by summing weights, then
    // drop atoms with weight below weight_floor and renormalize.
    MixingMeasure canonicalized(double merge_tol = 1e-12,
                                double weight_floor = 0.0) const;
};

MixingMeasure make_measure(std::vector<Vec> atoms, Vec weights);

// Convenience for 1-D parameter spaces.
MixingMeasure make_measure_1d(const Vec& atoms, const Vec& weights);

inline MixingMeasure dirac(const Vec& atom) { return make_measure({atom}, {1.0}); }

// Coupling between two discrete measures: the witness for an optimal
// transport value.  flows is row-major k x kprime.
struct TransportPlan {
    int k = 0;
    int kprime = 0;
    std::vector<double> flows;
    Vec source_weights;
    Vec target_weights;
    double total_cost = 0.0;

    double flow(int i, int j) const { return flows[static_cast<size_t>(i) * kprime + j]; }
    void validate(double marginal_tol = 1e-9) const;
};

// Finitely supported measure over mixing measures (two-level hierarchy).
struct MeasureOfMeasures {
    std::vector<MixingMeasure> inner;
    Vec outer_weights;

    int size() const { return static_cast<int>(inner.size()); }
    void validate() const;
};

// Moments of (theta - theta0) over a multi-index set |alpha| <= order.
struct MomentVector {
    Vec center;
    int order = 0;
    std::vector<std::vector<int>> indices;  // each of length q
    Vec values;                             // parallel to indices
};

}  // namespace mixot
