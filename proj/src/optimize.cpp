#include "mixot/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace mixot {

NelderMeadResult nelder_mead(const Objective& f, const Vec& x0, const Vec& steps,
                             int max_iter, double ftol) {
    const int n = static_cast<int>(x0.size());
    if (n == 0) throw InvalidArgument("nelder_mead: empty start");
    if (steps.size() != x0.size())
        throw InvalidArgument("nelder_mead: step size mismatch");

    std::vector<Vec> xs(n + 1, x0);
    for (int i = 0; i < n; ++i) xs[i + 1][i] += steps[i];
    Vec fs(n + 1);
    for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<int> order(n + 1);
    NelderMeadResult res;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = order[0], worst = order[n], second = order[n - 1];
        if (std::abs(fs[worst] - fs[best]) <=
            ftol * (1.0 + std::abs(fs[best]))) {
            res.converged = true;
            break;
        }
        Vec centroid(n, 0.0);
        for (int i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (int d = 0; d < n; ++d) centroid[d] += xs[i][d];
        }
        for (double& c : centroid) c /= n;

        auto blend = [&](double t) {
            Vec y(n);
            for (int d = 0; d < n; ++d)
                y[d] = centroid[d] + t * (xs[worst][d] - centroid[d]);
            return y;
        };
        const Vec xr = blend(-1.0);
        const double fr = f(xr);
        if (fr < fs[order[0]]) {
            const Vec xe = blend(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            const Vec xc = blend(fr < fs[worst] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {  // shrink toward the best vertex
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (int d = 0; d < n; ++d)
                        xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= static_cast<int>(x0.size()); ++i)
        if (fs[i] < fs[best]) best = i;
    res.x = xs[best];
    res.value = fs[best];
    res.iterations = iter;
    return res;
}

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol) {
    if (!(a < b)) throw InvalidArgument("golden_section: empty interval");
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

Vec project_simplex(const Vec& v) {
    // Sort-based projection: find the largest support whose shifted values
    // stay positive.
    const int n = static_cast<int>(v.size());
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int support = 0;
    for (int i = 0; i < n; ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / (i + 1);
        if (u[i] - t > 0.0) {
            tau = t;
            support = i + 1;
        }
    }
    (void)support;
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - tau);
    return out;
}

std::vector<Vec> latin_hypercube(int count, int dim, Rng& rng) {
    if (count < 1 || dim < 1) throw InvalidArgument("latin_hypercube: bad shape");
    std::vector<Vec> pts(count, Vec(dim));
    std::vector<int> perm(count);
    for (int d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = count - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_int(0, i)]);
        for (int i = 0; i < count; ++i)
            pts[i][d] = (perm[i] + rng.uniform()) / count;
    }
    return pts;
}

Vec gauss_newton(const std::function<Vec(const Vec&)>& residual, Vec x,
                 int max_iter, double tol, double* out_norm) {
    const int n = static_cast<int>(x.size());
    auto sup = [](const Vec& r) {
        double m = 0.0;
        for (double v : r) m = std::max(m, std::abs(v));
        return m;
    };
    Vec r = residual(x);
    double norm = sup(r);
    for (int iter = 0; iter < max_iter && norm > tol; ++iter) {
        const int m = static_cast<int>(r.size());
        Eigen::MatrixXd J(m, n);
        for (int d = 0; d < n; ++d) {
            const double h = 1e-7 * (1.0 + std::abs(x[d]));
            Vec xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            const Vec rp = residual(xp), rm = residual(xm);
            for (int i = 0; i < m; ++i) J(i, d) = (rp[i] - rm[i]) / (2.0 * h);
        }
        Eigen::VectorXd rv(m);
        for (int i = 0; i < m; ++i) rv(i) = r[i];
        // Levenberg damping keeps steps sane when J is rank deficient.
        double lambda = 1e-10;
        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            const Eigen::MatrixXd A =
                J.transpose() * J + lambda * Eigen::MatrixXd::Identity(n, n);
            const Eigen::VectorXd step = A.ldlt().solve(J.transpose() * rv);
            Vec xn = x;
            for (int d = 0; d < n; ++d) xn[d] -= step(d);
            const Vec rn = residual(xn);
            const double norm_n = sup(rn);
            if (norm_n < norm) {
                x = xn;
                r = rn;
                norm = norm_n;
                improved = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) break;
    }
    if (out_norm) *out_norm = norm;
    return x;
}

MixingMeasure decode_gk(const Vec& x, int k, const Box& theta, double* penalty) {
    const int q = theta.dim();
    if (static_cast<int>(x.size()) != k * q + (k - 1))
        throw InvalidArgument("decode_gk: coordinate size mismatch");
    MixingMeasure g;
    double pen = 0.0;
    for (int i = 0; i < k; ++i) {
        Vec atom(q);
        for (int d = 0; d < q; ++d) {
            double t = x[i * q + d];
            const double lo = theta.lo[d], hi = theta.hi[d];
            if (t < lo) {
                pen += sqr(t - lo);
                t = lo;
            } else if (t > hi) {
                pen += sqr(t - hi);
                t = hi;
            }
            atom[d] = t;
        }
        g.atoms.push_back(std::move(atom));
    }
    // Softmax with the first logit pinned to zero; logits are clamped so a
    // runaway coordinate cannot overflow.
    Vec logits(k, 0.0);
    double m = 0.0;
    for (int i = 1; i < k; ++i) {
        logits[i] = std::clamp(x[k * q + (i - 1)], -40.0, 40.0);
        m = std::max(m, logits[i]);
    }
    double z = 0.0;
    for (int i = 0; i < k; ++i) z += std::exp(logits[i] - m);
    g.weights.resize(k);
    for (int i = 0; i < k; ++i) g.weights[i] = std::exp(logits[i] - m) / z;
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += g.weights[i];
    g.weights[k - 1] = 1.0 - s;
    if (penalty) *penalty = pen;
    return g;
}

Vec encode_gk(const MixingMeasure& g, const Box& theta) {
    const int k = g.k(), q = theta.dim();
    Vec x(k * q + (k - 1));
    for (int i = 0; i < k; ++i)
        for (int d = 0; d < q; ++d) x[i * q + d] = g.atoms[i][d];
    const double w0 = std::max(g.weights[0], 1e-12);
    for (int i = 1; i < k; ++i)
        x[k * q + (i - 1)] = std::log(std::max(g.weights[i], 1e-12) / w0);
    return x;
}

GkResult optimize_over_gk(const MeasureObjective& objective, int k, const Box& theta,
                          const GkSettings& settings) {
    if (k < 1) throw InvalidArgument("optimize_over_gk: k must be >= 1");
    theta.validate();
    if (settings.starts < 1)
        throw InvalidArgument("optimize_over_gk: need at least one start");
    const int q = theta.dim();
    const int dim = k * q + (k - 1);

    auto wrapped = [&](const Vec& x) {
        double pen = 0.0;
        const MixingMeasure g = decode_gk(x, k, theta, &pen);
        const double val = objective(g);
        if (std::isnan(val)) return std::numeric_limits<double>::infinity();
        return val + settings.penalty * pen;
    };

    Rng rng(derive_seed(settings.seed, {hash_string("gk-multistart")}));
    const auto cube = latin_hypercube(settings.starts, k * q, rng);

    GkResult best;
    best.value = std::numeric_limits<double>::infinity();
    double worst_converged = -std::numeric_limits<double>::infinity();
    Vec steps(dim, 0.0);
    for (int i = 0; i < k; ++i)
        for (int d = 0; d < q; ++d)
            steps[i * q + d] = 0.08 * (theta.hi[d] - theta.lo[d]);
    for (int i = 0; i + 1 < k; ++i) steps[k * q + i] = 0.5;

    int finite_starts = 0;
    auto run_from = [&](const Vec& x0, const Vec& simplex_steps) {
        if (!std::isfinite(wrapped(x0))) return;
        ++finite_starts;
        const auto r =
            nelder_mead(wrapped, x0, simplex_steps, settings.max_iter, settings.ftol);
        best.iterations += r.iterations;
        if (r.converged) {
            best.converged = true;
            worst_converged = std::max(worst_converged, r.value);
        }
        if (r.value < best.value) {
            best.value = r.value;
            best.argmin = decode_gk(r.x, k, theta, nullptr);
        }
    };

    Vec warm_steps(steps);
    for (double& s : warm_steps) s *= 0.5;
    for (const auto& g : settings.warm_starts) {
        if (g.k() != k)
            throw InvalidArgument("optimize_over_gk: warm start must have exactly k atoms");
        run_from(encode_gk(g, theta), warm_steps);
    }

    for (int s = 0; s < settings.starts; ++s) {
        Vec x0(dim, 0.0);
        for (int i = 0; i < k; ++i)
            for (int d = 0; d < q; ++d)
                x0[i * q + d] =
                    theta.lo[d] + cube[s][i * q + d] * (theta.hi[d] - theta.lo[d]);
        // Dirichlet(1,...,1) weights turned into logits.
        Vec w(k);
        double tot = 0.0;
        for (int i = 0; i < k; ++i) {
            w[i] = -std::log(std::max(rng.uniform(), 1e-300));
            tot += w[i];
        }
        for (int i = 1; i < k; ++i) x0[k * q + (i - 1)] = std::log(w[i] / w[0]);

        run_from(x0, steps);
    }
    if (finite_starts == 0)
        throw RuntimeFailure("optimize_over_gk: objective not finite at any start");
    best.starts = finite_starts;
    if (std::isfinite(worst_converged))
        best.start_spread = worst_converged - best.value;
    // Report the objective without the box penalty (atoms are clipped inside).
    best.value = objective(best.argmin);
    return best;
}

}  // namespace mixot
