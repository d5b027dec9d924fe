#include "mixot/moments.hpp"

#include <cmath>

namespace mixot {

namespace {

void enumerate(int q, int max_order, int coord, int remaining, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
    if (coord == q - 1) {
        for (int a = 0; a <= remaining; ++a) {
            cur[coord] = a;
            out.push_back(cur);
        }
        return;
    }
    for (int a = 0; a <= remaining; ++a) {
        cur[coord] = a;
        enumerate(q, max_order, coord + 1, remaining - a, cur, out);
    }
}

size_t index_count(int q, int max_order) {
    // C(max_order + q, q), computed carefully.
    double c = 1.0;
    for (int i = 1; i <= q; ++i) c *= double(max_order + i) / i;
    return static_cast<size_t>(c + 0.5);
}

}  // namespace

std::vector<std::vector<int>> multi_indices(int q, int max_order) {
    if (q < 1 || max_order < 0) throw InvalidArgument("multi_indices: bad arguments");
    if (index_count(q, max_order) > 100000)
        throw InvalidArgument("multi_indices: index set exceeds 1e5 entries");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(q, 0);
    enumerate(q, max_order, 0, max_order, cur, out);
    return out;
}

MomentVector moment_vector(const MixingMeasure& g, const Vec& center, int max_order) {
    g.validate();
    const int q = g.dim();
    if (static_cast<int>(center.size()) != q)
        throw InvalidArgument("moment_vector: center dimension mismatch");
    MomentVector mv;
    mv.center = center;
    mv.order = max_order;
    mv.indices = multi_indices(q, max_order);
    mv.values.assign(mv.indices.size(), 0.0);
    for (int i = 0; i < g.k(); ++i) {
        for (size_t t = 0; t < mv.indices.size(); ++t) {
            double term = g.weights[i];
            for (int d = 0; d < q; ++d)
                for (int rep = 0; rep < mv.indices[t][d]; ++rep)
                    term *= g.atoms[i][d] - center[d];
            mv.values[t] += term;
        }
    }
    return mv;
}

double moment_distance(const MixingMeasure& g, const MixingMeasure& h,
                       const Vec& center, int k) {
    if (k < 1) throw InvalidArgument("moment_distance: k >= 1 required");
    const int order = 2 * k - 1;
    const MomentVector mg = moment_vector(g, center, order);
    const MomentVector mh = moment_vector(h, center, order);
    double sup = 0.0;
    for (size_t t = 0; t < mg.values.size(); ++t)
        sup = std::max(sup, std::abs(mg.values[t] - mh.values[t]));
    return sup;
}

}  // namespace mixot
