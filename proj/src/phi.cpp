#include "mixot/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "mixot/moments.hpp"
#include "mixot/optimize.hpp"

namespace mixot {

PhiClass ks_phi() { return {PhiFamily::KsCdf, 1.0, {}, 1}; }

PhiClass mmd_phi(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("mmd: bandwidth must be positive");
    return {PhiFamily::MmdRkhs, gamma, {}, 1};
}

PhiClass monomial_phi(Vec center, int order) {
    if (order < 1) throw InvalidArgument("monomial: order must be >= 1");
    return {PhiFamily::Monomial, 1.0, std::move(center), order};
}

namespace {

double ks_model_distance(const MixingMeasure& G, const MixingMeasure& H,
                         const KernelModel& kernel) {
    const MixtureModel P{kernel, G}, Q{kernel, H};
    // Dense grid over the union of component supports, then golden-section
    // refinement around the best grid cells.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto* m : {&P, &Q})
        for (const auto& atom : m->mixing.atoms) {
            const auto iv = support_interval(kernel, atom);
            lo = std::min(lo, iv.first);
            hi = std::max(hi, iv.second);
        }
    const int grid = 4096;
    Vec gap(grid);
    double best = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double x = lo + (hi - lo) * i / (grid - 1);
        gap[i] = std::abs(mixture_cdf(P, x) - mixture_cdf(Q, x));
        best = std::max(best, gap[i]);
    }
    // Refine the top cells: the gap is smooth between CDF kinks.
    std::vector<int> idx(grid);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + 8, idx.end(),
                      [&](int a, int b) { return gap[a] > gap[b]; });
    const double h = (hi - lo) / (grid - 1);
    for (int t = 0; t < 8; ++t) {
        const double center = lo + h * idx[t];
        const double x = golden_section(
            [&](double u) { return -std::abs(mixture_cdf(P, u) - mixture_cdf(Q, u)); },
            center - h, center + h, 1e-10);
        best = std::max(best, std::abs(mixture_cdf(P, x) - mixture_cdf(Q, x)));
    }
    return best;
}

}  // namespace

double mmd_pair_kernel(const KernelModel& kernel, const Vec& a, const Vec& b,
                       double gamma) {
    if (kernel.family != Family::GaussianLocation)
        throw InvalidArgument("mmd: gaussian-location kernel required");
    if (!(gamma > 0.0)) throw InvalidArgument("mmd: bandwidth must be positive");
    const int q = kernel.param_dim();
    Eigen::MatrixXd S(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) S(i, j) = kernel.sigma[i][j];
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q, q) + 4.0 * gamma * S;
    Eigen::VectorXd d(q);
    for (int i = 0; i < q; ++i) d(i) = a[i] - b[i];
    const double quad = d.dot(M.llt().solve(d));
    return std::exp(-gamma * quad) / std::sqrt(M.determinant());
}

double mmd_point_kernel(const KernelModel& kernel, const Vec& a, const Vec& x,
                        double gamma) {
    if (kernel.family != Family::GaussianLocation)
        throw InvalidArgument("mmd: gaussian-location kernel required");
    if (!(gamma > 0.0)) throw InvalidArgument("mmd: bandwidth must be positive");
    const int q = kernel.param_dim();
    Eigen::MatrixXd S(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) S(i, j) = kernel.sigma[i][j];
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q, q) + 2.0 * gamma * S;
    Eigen::VectorXd d(q);
    for (int i = 0; i < q; ++i) d(i) = a[i] - x[i];
    const double quad = d.dot(M.llt().solve(d));
    return std::exp(-gamma * quad) / std::sqrt(M.determinant());
}

double mmd_squared(const KernelModel& kernel, const MixingMeasure& G,
                   const MixingMeasure& H, double gamma) {
    G.validate();
    H.validate();
    auto cross = [&](const MixingMeasure& A, const MixingMeasure& B) {
        double s = 0.0;
        for (int i = 0; i < A.k(); ++i)
            for (int j = 0; j < B.k(); ++j)
                s += A.weights[i] * B.weights[j] *
                     mmd_pair_kernel(kernel, A.atoms[i], B.atoms[j], gamma);
        return s;
    };
    return cross(G, G) - 2.0 * cross(G, H) + cross(H, H);
}

double mmd_median_bandwidth(const std::vector<Vec>& data) {
    if (data.size() < 2) throw InvalidArgument("median bandwidth: need >= 2 points");
    // Subsample pairs when n is large; the heuristic needs only the scale.
    const size_t n = data.size();
    Vec dists;
    const size_t cap = 2000;
    const size_t step = std::max<size_t>(1, n / cap);
    for (size_t i = 0; i < n; i += step)
        for (size_t j = i + step; j < n; j += step)
            dists.push_back(euclidean(data[i], data[j]));
    std::sort(dists.begin(), dists.end());
    const double median = dists[dists.size() / 2];
    if (median <= 0.0) return 1.0;
    return 1.0 / (2.0 * median * median);
}

double phi_distance(const PhiClass& phi, const MixingMeasure& G,
                    const MixingMeasure& H, const KernelModel& kernel) {
    G.validate();
    H.validate();
    switch (phi.family) {
        case PhiFamily::KsCdf:
            if (kernel.obs_dim() != 1)
                throw InvalidArgument("ks distance: scalar observations only");
            return ks_model_distance(G, H, kernel);
        case PhiFamily::MmdRkhs:
            return std::sqrt(std::max(0.0, mmd_squared(kernel, G, H, phi.gamma)));
        case PhiFamily::Monomial: {
            if (phi.center.size() != G.atoms[0].size())
                throw InvalidArgument("monomial distance: center dimension mismatch");
            const auto mg = moment_vector(G, phi.center, phi.order);
            const auto mh = moment_vector(H, phi.center, phi.order);
            double best = 0.0;
            for (size_t t = 0; t < mg.values.size(); ++t)
                best = std::max(best, std::abs(mg.values[t] - mh.values[t]));
            return best;
        }
    }
    throw InvalidArgument("unknown phi family");
}

std::vector<Vec> gmm_statistic_coeffs(int max_order, double sigma, double theta0) {
    if (max_order < 1 || max_order > 30)
        throw InvalidArgument("gmm statistics: order out of range");
    if (!(sigma > 0.0)) throw InvalidArgument("gmm statistics: sigma must be positive");
    (void)theta0;  // coefficients are in powers of (x - theta0); the shift is
                   // applied at evaluation time.
    // Raw moments of N(0, sigma^2): nu_e = sigma^e (e-1)!! for even e, 0 odd.
    Vec nu(max_order + 1, 0.0);
    nu[0] = 1.0;
    for (int e = 2; e <= max_order; e += 2) nu[e] = nu[e - 2] * sigma * sigma * (e - 1);
    // For X ~ N(theta, sigma^2), E[(X - theta0)^i] = sum_e C(i,e) delta^e nu_{i-e}
    // with delta = theta - theta0.  Solve the triangular system making the
    // combination equal delta^j exactly.
    std::vector<std::vector<double>> C(max_order + 1, std::vector<double>(max_order + 1, 0.0));
    for (int i = 0; i <= max_order; ++i) {
        C[i][0] = 1.0;
        for (int e = 1; e <= i; ++e)
            C[i][e] = C[i - 1][e - 1] + (e <= i - 1 ? C[i - 1][e] : 0.0);
    }
    std::vector<Vec> rows;
    for (int j = 1; j <= max_order; ++j) {
        Vec c(max_order + 1, 0.0);
        c[j] = 1.0;  // A[j][j] = 1
        for (int i = j + 1; i <= max_order; ++i) c[i] = 0.0;
        // Back-substitute downwards: sum_i c_i C(i,e) nu_{i-e} = [e == j].
        for (int e = j - 1; e >= 0; --e) {
            double acc = 0.0;
            for (int i = e + 1; i <= j; ++i) acc += c[i] * C[i][e] * nu[i - e];
            // The equation for exponent e reads c_e + acc = 0.
            c[e] = -acc;
        }
        // Truncate to degree j.
        c.resize(j + 1);
        rows.push_back(std::move(c));
    }
    return rows;
}

double gmm_statistic_eval(const Vec& coeffs, double theta0, double x) {
    const double y = x - theta0;
    double acc = 0.0;
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
        acc = acc * y + coeffs[i];
    return acc;
}

}  // namespace mixot
