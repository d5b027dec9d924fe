#include "mixot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>

namespace mixot {

namespace {

double default_metric(const Vec& a, const Vec& b) { return euclidean(a, b); }

// Dense transportation simplex on the bipartite graph of m sources and n
// targets.  Basis is a spanning tree (m+n-1 cells); potentials u,v satisfy
// u_i + v_j = c_ij on basic cells; pivots follow the unique tree cycle of the
// entering cell.  Bland's rule kicks in after a stall to guarantee
// termination under degeneracy.
class TransportSimplex {
  public:
    TransportSimplex(const std::vector<double>& cost, Vec a, Vec b)
        : m_(static_cast<int>(a.size())),
          n_(static_cast<int>(b.size())),
          cost_(cost),
          a_(std::move(a)),
          b_(std::move(b)),
          flow_(cost.size(), 0.0),
          basic_(cost.size(), 0) {
        row_adj_.resize(m_);
        col_adj_.resize(n_);
    }

    void solve() {
        northwest_corner();
        const double scale = std::max(
            1.0, std::abs(*std::max_element(cost_.begin(), cost_.end(),
                                            [](double x, double y) {
                                                return std::abs(x) < std::abs(y);
                                            })));
        const double tol = 1e-12 * scale;
        const long max_pivots = 2000 + 200L * (m_ + n_) + 4L * m_ * n_;
        bool bland = false;
        int stall = 0;
        double last_obj = objective();
        for (long pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            int ei = -1, ej = -1;
            double best = -tol;
            for (int i = 0; i < m_ && (ei < 0 || !bland); ++i) {
                for (int j = 0; j < n_; ++j) {
                    if (basic_[idx(i, j)]) continue;
                    const double d = cost_[idx(i, j)] - u_[i] - v_[j];
                    if (bland) {
                        if (d < -tol) {
                            ei = i;
                            ej = j;
                            break;
                        }
                    } else if (d < best) {
                        best = d;
                        ei = i;
                        ej = j;
                    }
                }
            }
            if (ei < 0) return;  // optimal
            do_pivot(ei, ej);
            const double obj = objective();
            if (obj > last_obj - tol * 1e-3) {
                if (++stall > m_ + n_ + 8) bland = true;
            } else {
                stall = 0;
            }
            last_obj = obj;
        }
        throw RuntimeFailure("transport simplex: pivot limit exceeded");
    }

    TransportPlan plan() const {
        TransportPlan p;
        p.k = m_;
        p.kprime = n_;
        p.flows = flow_;
        for (double& f : p.flows)
            if (f < 0.0) f = 0.0;  // scrub -0 / fp dust
        p.source_weights = a_;
        p.target_weights = b_;
        p.total_cost = objective();
        return p;
    }

  private:
    size_t idx(int i, int j) const { return static_cast<size_t>(i) * n_ + j; }

    double objective() const {
        double s = 0.0;
        for (size_t t = 0; t < flow_.size(); ++t) s += flow_[t] * cost_[t];
        return s;
    }

    void add_basic(int i, int j) {
        basic_[idx(i, j)] = 1;
        row_adj_[i].push_back(j);
        col_adj_[j].push_back(i);
    }

    void remove_basic(int i, int j) {
        basic_[idx(i, j)] = 0;
        auto& r = row_adj_[i];
        r.erase(std::find(r.begin(), r.end(), j));
        auto& c = col_adj_[j];
        c.erase(std::find(c.begin(), c.end(), i));
    }

    void northwest_corner() {
        Vec ra = a_, rb = b_;
        int i = 0, j = 0;
        while (true) {
            const double t = std::min(ra[i], rb[j]);
            flow_[idx(i, j)] = t;
            add_basic(i, j);
            ra[i] -= t;
            rb[j] -= t;
            if (i == m_ - 1 && j == n_ - 1) break;
            // Advance exactly one index per step so the basis has m+n-1 cells.
            if (i == m_ - 1) {
                ++j;
            } else if (j == n_ - 1) {
                ++i;
            } else if (ra[i] <= rb[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    void compute_potentials() {
        u_.assign(m_, 0.0);
        v_.assign(n_, 0.0);
        std::vector<char> udone(m_, 0), vdone(n_, 0);
        std::deque<int> queue;  // rows are 0..m-1, cols are m..m+n-1
        udone[0] = 1;
        queue.push_back(0);
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node < m_) {
                for (int j : row_adj_[node])
                    if (!vdone[j]) {
                        v_[j] = cost_[idx(node, j)] - u_[node];
                        vdone[j] = 1;
                        queue.push_back(m_ + j);
                    }
            } else {
                const int j = node - m_;
                for (int i : col_adj_[j])
                    if (!udone[i]) {
                        u_[i] = cost_[idx(i, j)] - v_[j];
                        udone[i] = 1;
                        queue.push_back(i);
                    }
            }
        }
    }

    // Tree path from row ei to column ej, as alternating nodes.  BFS with
    // parent pointers over basic edges.
    std::vector<int> tree_path(int ei, int ej) const {
        const int nodes = m_ + n_;
        std::vector<int> parent(nodes, -2);
        std::deque<int> queue;
        parent[ei] = -1;
        queue.push_back(ei);
        const int goal = m_ + ej;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node == goal) break;
            if (node < m_) {
                for (int j : row_adj_[node])
                    if (parent[m_ + j] == -2) {
                        parent[m_ + j] = node;
                        queue.push_back(m_ + j);
                    }
            } else {
                for (int i : col_adj_[node - m_])
                    if (parent[i] == -2) {
                        parent[i] = node;
                        queue.push_back(i);
                    }
            }
        }
        if (parent[goal] == -2)
            throw RuntimeFailure("transport simplex: basis not a spanning tree");
        std::vector<int> path;  // goal .. ei
        for (int node = goal; node != -1; node = parent[node]) path.push_back(node);
        std::reverse(path.begin(), path.end());  // ei .. goal
        return path;
    }

    void do_pivot(int ei, int ej) {
        const std::vector<int> path = tree_path(ei, ej);
        // Cycle cells: entering (ei,ej) gets +, then alternate along the path
        // walked backwards from ej to ei.
        struct Cell {
            int i, j;
            bool plus;
        };
        std::vector<Cell> cycle;
        cycle.push_back({ei, ej, true});
        bool plus = false;
        for (size_t t = path.size() - 1; t > 0; --t) {
            const int x = path[t], y = path[t - 1];
            const int i = std::min(x, y) /*row*/, j = std::max(x, y) - m_;
            cycle.push_back({i, j, plus});
            plus = !plus;
        }
        double step = std::numeric_limits<double>::infinity();
        int li = -1, lj = -1;
        for (const Cell& c : cycle)
            if (!c.plus) {
                const double f = flow_[idx(c.i, c.j)];
                if (f < step - 1e-18 ||
                    (f < step + 1e-18 &&
                     (li < 0 || c.i < li || (c.i == li && c.j < lj)))) {
                    step = f;
                    li = c.i;
                    lj = c.j;
                }
            }
        for (const Cell& c : cycle) flow_[idx(c.i, c.j)] += c.plus ? step : -step;
        flow_[idx(li, lj)] = 0.0;
        remove_basic(li, lj);
        add_basic(ei, ej);
    }

    int m_, n_;
    std::vector<double> cost_;
    Vec a_, b_;
    std::vector<double> flow_;
    std::vector<char> basic_;
    std::vector<std::vector<int>> row_adj_, col_adj_;
    Vec u_, v_;
};

}  // namespace

TransportPlan solve_transport(const std::vector<double>& cost, const Vec& source_weights,
                              const Vec& target_weights) {
    const int m = static_cast<int>(source_weights.size());
    const int n = static_cast<int>(target_weights.size());
    if (m == 0 || n == 0 || cost.size() != static_cast<size_t>(m) * n)
        throw InvalidArgument("solve_transport: shape mismatch");
    for (double c : cost)
        if (!std::isfinite(c)) throw InvalidArgument("solve_transport: non-finite cost");
    double sa = 0.0, sb = 0.0;
    for (double w : source_weights) {
        if (!(w >= 0.0)) throw InvalidArgument("solve_transport: negative supply");
        sa += w;
    }
    for (double w : target_weights) {
        if (!(w >= 0.0)) throw InvalidArgument("solve_transport: negative demand");
        sb += w;
    }
    if (std::abs(sa - sb) > 1e-9)
        throw InvalidArgument("solve_transport: unbalanced marginals");
    Vec b = target_weights;
    if (sb > 0.0)
        for (double& w : b) w *= sa / sb;  // balance exactly

    TransportSimplex simplex(cost, source_weights, b);
    simplex.solve();
    TransportPlan p = simplex.plan();
    p.target_weights = target_weights;
    p.validate(1e-9);
    return p;
}

WassersteinResult wasserstein(const MixingMeasure& g, const MixingMeasure& h, double r,
                              const GroundMetric& metric) {
    g.validate();
    h.validate();
    if (g.dim() != h.dim())
        throw InvalidArgument("wasserstein: atom spaces have different dimensions");
    if (!(r >= 1.0)) throw InvalidArgument("wasserstein: requires r >= 1");
    const GroundMetric& d = metric ? metric : GroundMetric(default_metric);
    std::vector<double> cost(static_cast<size_t>(g.k()) * h.k());
    for (int i = 0; i < g.k(); ++i)
        for (int j = 0; j < h.k(); ++j)
            cost[static_cast<size_t>(i) * h.k() + j] =
                std::pow(d(g.atoms[i], h.atoms[j]), r);
    WassersteinResult res;
    res.plan = solve_transport(cost, g.weights, h.weights);
    res.value = std::pow(std::max(0.0, res.plan.total_cost), 1.0 / r);
    return res;
}

double wasserstein_equal_weight_bruteforce(const MixingMeasure& g, const MixingMeasure& h,
                                           double r, const GroundMetric& metric) {
    g.validate();
    h.validate();
    const int k = g.k();
    if (h.k() != k)
        throw InvalidArgument("bruteforce wasserstein: needs equal atom counts");
    if (k > 8) throw InvalidArgument("bruteforce wasserstein: k > 8 refused");
    if (g.dim() != h.dim())
        throw InvalidArgument("bruteforce wasserstein: dimension mismatch");
    for (int i = 0; i < k; ++i)
        if (std::abs(g.weights[i] - 1.0 / k) > 1e-12 ||
            std::abs(h.weights[i] - 1.0 / k) > 1e-12)
            throw InvalidArgument("bruteforce wasserstein: weights must all be 1/k");
    const GroundMetric& d = metric ? metric : GroundMetric(default_metric);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += std::pow(d(g.atoms[perm[i]], h.atoms[i]), r);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / k, 1.0 / r);
}

namespace {

double dn_cost(const MixingMeasure& g, const MixingMeasure& h, int i, int j,
               double n_weight) {
    return std::sqrt(n_weight) * euclidean(g.atoms[i], h.atoms[j]) +
           std::abs(g.weights[i] - h.weights[j]);
}

std::vector<int> dn_best_perm(const MixingMeasure& g, const MixingMeasure& h,
                              double n_weight, double* value_out) {
    const int k = g.k();
    std::vector<int> perm(k), best_perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += dn_cost(g, h, perm[i], i, n_weight);
        if (s < best) {
            best = s;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (value_out) *value_out = best;
    return best_perm;
}

}  // namespace

double d_n_metric(const MixingMeasure& g, const MixingMeasure& h, double n_weight) {
    g.validate();
    h.validate();
    if (g.k() != h.k())
        throw InvalidArgument("d_n_metric: defined only for equal atom counts");
    if (g.dim() != h.dim()) throw InvalidArgument("d_n_metric: dimension mismatch");
    if (!(n_weight >= 1.0)) throw InvalidArgument("d_n_metric: requires n_weight >= 1");
    const int k = g.k();
    if (k <= 8) {
        double value = 0.0;
        dn_best_perm(g, h, n_weight, &value);
        return value;
    }
    // Assignment LP: equal 1/k weights, optimum is a permutation vertex.
    std::vector<double> cost(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cost[static_cast<size_t>(i) * k + j] = dn_cost(g, h, i, j, n_weight);
    const Vec w(k, 1.0 / k);
    return solve_transport(cost, w, w).total_cost * k;
}

std::vector<int> d_n_matching(const MixingMeasure& g, const MixingMeasure& h,
                              double n_weight) {
    if (g.k() != h.k())
        throw InvalidArgument("d_n_matching: defined only for equal atom counts");
    const int k = g.k();
    if (k <= 8) {
        // perm maps target slot -> source index; invert to source -> target.
        std::vector<int> perm = dn_best_perm(g, h, n_weight, nullptr);
        std::vector<int> tau(k);
        for (int i = 0; i < k; ++i) tau[perm[i]] = i;
        return tau;
    }
    std::vector<double> cost(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cost[static_cast<size_t>(i) * k + j] = dn_cost(g, h, i, j, n_weight);
    const Vec w(k, 1.0 / k);
    const TransportPlan p = solve_transport(cost, w, w);
    std::vector<int> tau(k, -1);
    for (int i = 0; i < k; ++i) {
        int arg = 0;
        for (int j = 1; j < k; ++j)
            if (p.flow(i, j) > p.flow(i, arg)) arg = j;
        tau[i] = arg;
    }
    return tau;
}

double nested_wasserstein(const MeasureOfMeasures& d, const MeasureOfMeasures& e,
                          double r) {
    d.validate();
    e.validate();
    if (!(r >= 1.0)) throw InvalidArgument("nested_wasserstein: requires r >= 1");
    std::vector<double> cost(static_cast<size_t>(d.size()) * e.size());
    for (int i = 0; i < d.size(); ++i)
        for (int j = 0; j < e.size(); ++j)
            cost[static_cast<size_t>(i) * e.size() + j] =
                wasserstein(d.inner[i], e.inner[j], r).plan.total_cost;
    const TransportPlan p = solve_transport(cost, d.outer_weights, e.outer_weights);
    return std::pow(std::max(0.0, p.total_cost), 1.0 / r);
}

MixingMeasure mean_measure(const MeasureOfMeasures& d) {
    d.validate();
    MixingMeasure out;
    for (int i = 0; i < d.size(); ++i)
        for (int j = 0; j < d.inner[i].k(); ++j) {
            out.atoms.push_back(d.inner[i].atoms[j]);
            out.weights.push_back(d.outer_weights[i] * d.inner[i].weights[j]);
        }
    return out.canonicalized();
}

double composite_transport(const MixingMeasure& g, const MixingMeasure& h,
                           const GroundCost& ground_cost) {
    g.validate();
    h.validate();
    std::vector<double> cost(static_cast<size_t>(g.k()) * h.k());
    for (int i = 0; i < g.k(); ++i)
        for (int j = 0; j < h.k(); ++j) {
            const double c = ground_cost(g.atoms[i], h.atoms[j]);
            if (!(c >= 0.0))
                throw InvalidArgument("composite_transport: ground cost must be >= 0");
            cost[static_cast<size_t>(i) * h.k() + j] = c;
        }
    return solve_transport(cost, g.weights, h.weights).total_cost;
}

}  // namespace mixot
