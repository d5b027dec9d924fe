#pragma once

#include "mixot/measure.hpp"

namespace mixot {

// All multi-indices alpha over q coordinates with |alpha| <= max_order, in
// graded lexicographic order.  Refuses index sets above 1e5 entries.
std::vector<std::vector<int>> multi_indices(int q, int max_order);

// Exact moments m_alpha = sum_i p_i * prod_d (theta_id - center_d)^alpha_d.
MomentVector moment_vector(const MixingMeasure& g, const Vec& center, int max_order);

// Sup-norm distance between the moment vectors of g and h up to order 2k-1.
double moment_distance(const MixingMeasure& g, const MixingMeasure& h,
                       const Vec& center, int k);

}  // namespace mixot
