#include "mixot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixot {

void MixingMeasure::validate() const {
    if (atoms.empty()) throw InvalidArgument("measure: no atoms");
    if (atoms.size() != weights.size())
        throw InvalidArgument("measure: atoms/weights length mismatch");
    const size_t q = atoms[0].size();
    if (q == 0) throw InvalidArgument("measure: zero-dimensional atoms");
    double total = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].size() != q)
            throw InvalidArgument("measure: ragged atom dimensions");
        if (!(weights[i] >= 0.0))
            throw InvalidArgument("measure: negative or NaN weight");
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidArgument("measure: weights must sum to 1 within 1e-12");
}

MixingMeasure MixingMeasure::canonicalized(double merge_tol,
                                           double weight_floor) const {
    validate();
    const int n = k();
    // Greedy union-find on the atom proximity graph.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (euclidean(atoms[i], atoms[j]) <= merge_tol) {
                int a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }

    MixingMeasure out;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (slot[r] < 0) {
            slot[r] = out.k();
            out.atoms.push_back(atoms[r]);
            out.weights.push_back(0.0);
        }
        out.weights[slot[r]] += weights[i];
    }
    if (weight_floor > 0.0) {
        MixingMeasure kept;
        for (int i = 0; i < out.k(); ++i)
            if (out.weights[i] >= weight_floor) {
                kept.atoms.push_back(out.atoms[i]);
                kept.weights.push_back(out.weights[i]);
            }
        if (kept.atoms.empty()) {  // keep the heaviest atom rather than vanish
            const auto heaviest =
                std::max_element(out.weights.begin(), out.weights.end()) -
                out.weights.begin();
            kept.atoms.push_back(out.atoms[static_cast<size_t>(heaviest)]);
            kept.weights.push_back(1.0);
        }
        out = kept;
    }
    double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    for (double& w : out.weights) w /= total;
    return out;
}

MixingMeasure make_measure(std::vector<Vec> atoms, Vec weights) {
    MixingMeasure g{std::move(atoms), std::move(weights)};
    g.validate();
    return g;
}

MixingMeasure make_measure_1d(const Vec& atoms, const Vec& weights) {
    std::vector<Vec> pts;
    pts.reserve(atoms.size());
    for (double a : atoms) pts.push_back({a});
    return make_measure(std::move(pts), weights);
}

void TransportPlan::validate(double marginal_tol) const {
    if (static_cast<int>(flows.size()) != k * kprime)
        throw InvalidArgument("plan: flow matrix shape mismatch");
    for (double f : flows)
        if (!(f >= -1e-15)) throw InvalidArgument("plan: negative flow");
    for (int i = 0; i < k; ++i) {
        double s = 0.0;
        for (int j = 0; j < kprime; ++j) s += flow(i, j);
        if (std::abs(s - source_weights[i]) > marginal_tol)
            throw RuntimeFailure("plan: row marginal violated");
    }
    for (int j = 0; j < kprime; ++j) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += flow(i, j);
        if (std::abs(s - target_weights[j]) > marginal_tol)
            throw RuntimeFailure("plan: column marginal violated");
    }
}

void MeasureOfMeasures::validate() const {
    if (inner.empty() || inner.size() != outer_weights.size())
        throw InvalidArgument("measure-of-measures: shape mismatch");
    double total = 0.0;
    for (size_t i = 0; i < inner.size(); ++i) {
        inner[i].validate();
        if (!(outer_weights[i] >= 0.0))
            throw InvalidArgument("measure-of-measures: negative outer weight");
        total += outer_weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidArgument("measure-of-measures: outer weights must sum to 1");
}

}  // namespace mixot
