#include "mixot/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mixot {

double integrate(const Fn1& f, double a, double b, double tol) {
    if (!(a < b)) throw InvalidArgument("integrate: empty interval");
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, tol, &error);
    return value;
}

double integrate_union(const Fn1& f, std::vector<std::pair<double, double>> intervals,
                       double tol) {
    if (intervals.empty()) throw InvalidArgument("integrate_union: no intervals");
    std::sort(intervals.begin(), intervals.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : intervals) {
        if (!(iv.first < iv.second))
            throw InvalidArgument("integrate_union: empty interval");
        if (merged.empty() || iv.first > merged.back().second)
            merged.push_back(iv);
        else
            merged.back().second = std::max(merged.back().second, iv.second);
    }
    double total = 0.0;
    for (const auto& iv : merged) total += integrate(f, iv.first, iv.second, tol);
    return total;
}

namespace {

// Expand boost's half-rule (non-negative abscissae) to the full symmetric rule.
template <unsigned N>
void full_gauss_rule(Vec& nodes, Vec& weights) {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& xs = rule::abscissa();
    const auto& ws = rule::weights();
    nodes.clear();
    weights.clear();
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0.0) {
            nodes.push_back(0.0);
            weights.push_back(ws[i]);
        } else {
            nodes.push_back(-xs[i]);
            weights.push_back(ws[i]);
            nodes.push_back(xs[i]);
            weights.push_back(ws[i]);
        }
    }
}

}  // namespace

std::pair<Vec, Vec> gauss_legendre_panels(double a, double b, int panels, int points) {
    if (!(a < b)) throw InvalidArgument("gauss_legendre_panels: empty interval");
    if (panels < 1 || points < 2)
        throw InvalidArgument("gauss_legendre_panels: bad resolution");
    Vec base_x, base_w;
    switch (points) {
        case 8: full_gauss_rule<8>(base_x, base_w); break;
        case 16: full_gauss_rule<16>(base_x, base_w); break;
        case 32: full_gauss_rule<32>(base_x, base_w); break;
        default: full_gauss_rule<16>(base_x, base_w); break;
    }
    Vec xs, ws;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        for (size_t i = 0; i < base_x.size(); ++i) {
            xs.push_back(mid + 0.5 * h * base_x[i]);
            ws.push_back(0.5 * h * base_w[i]);
        }
    }
    return {xs, ws};
}

double integrate_box(const FnN& f, const Box& box, int panels, int points) {
    const int q = box.dim();
    if (q < 1 || q > 3) throw InvalidArgument("integrate_box: dimension must be 1..3");
    std::vector<Vec> xs(q), ws(q);
    for (int d = 0; d < q; ++d) {
        auto rule = gauss_legendre_panels(box.lo[d], box.hi[d], panels, points);
        xs[d] = std::move(rule.first);
        ws[d] = std::move(rule.second);
    }
    Vec point(q);
    double total = 0.0;
    if (q == 1) {
        for (size_t i = 0; i < xs[0].size(); ++i) {
            point[0] = xs[0][i];
            total += ws[0][i] * f(point);
        }
    } else if (q == 2) {
        for (size_t i = 0; i < xs[0].size(); ++i) {
            point[0] = xs[0][i];
            for (size_t j = 0; j < xs[1].size(); ++j) {
                point[1] = xs[1][j];
                total += ws[0][i] * ws[1][j] * f(point);
            }
        }
    } else {
        for (size_t i = 0; i < xs[0].size(); ++i) {
            point[0] = xs[0][i];
            for (size_t j = 0; j < xs[1].size(); ++j) {
                point[1] = xs[1][j];
                const double wij = ws[0][i] * ws[1][j];
                for (size_t l = 0; l < xs[2].size(); ++l) {
                    point[2] = xs[2][l];
                    total += wij * ws[2][l] * f(point);
                }
            }
        }
    }
    return total;
}

std::pair<Vec, Vec> gauss_hermite(int n) {
    if (n < 1 || n > 256) throw InvalidArgument("gauss_hermite: order out of range");
    // Golub–Welsch on the symmetric tridiagonal Jacobi matrix of the
    // (physicists') Hermite recurrence: zero diagonal, off-diagonal sqrt(i/2).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(i / 2.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::sqrt(M_PI);  // integral of exp(-x^2)
    Vec nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = mu0 * v0 * v0;
    }
    return {nodes, weights};
}

}  // namespace mixot
