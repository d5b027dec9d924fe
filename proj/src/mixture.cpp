#include "mixot/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixot/quadrature.hpp"

namespace mixot {

namespace {

void check_model(const KernelModel& kernel, const MixingMeasure& mixing) {
    kernel.validate();
    mixing.validate();
    if (mixing.dim() != kernel.param_dim())
        throw InvalidArgument("mixture: atom dimension differs from parameter space");
    for (const auto& atom : mixing.atoms)
        if (!kernel.theta.contains(atom))
            throw InvalidArgument("mixture: atom outside the parameter box");
}

double log_sum_exp(const Vec& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

int pick_component(const MixingMeasure& g, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < g.k(); ++i) {
        acc += g.weights[i];
        if (u < acc) return i;
    }
    return g.k() - 1;
}

}  // namespace

void MixtureModel::validate() const { check_model(kernel, mixing); }

void ProductMixtureModel::validate() const {
    check_model(kernel, mixing);
    if (N < 1) throw InvalidArgument("product mixture: N must be >= 1");
}

double mixture_log_density(const MixtureModel& model, const Vec& x) {
    Vec terms;
    terms.reserve(model.mixing.k());
    for (int i = 0; i < model.mixing.k(); ++i) {
        if (model.mixing.weights[i] <= 0.0) continue;
        terms.push_back(std::log(model.mixing.weights[i]) +
                        log_density(model.kernel, x, model.mixing.atoms[i]));
    }
    return log_sum_exp(terms);
}

double mixture_density(const MixtureModel& model, const Vec& x) {
    const double l = mixture_log_density(model, x);
    return std::isfinite(l) ? std::exp(l) : 0.0;
}

double mixture_cdf(const MixtureModel& model, double x) {
    double total = 0.0;
    for (int i = 0; i < model.mixing.k(); ++i) {
        if (model.mixing.weights[i] <= 0.0) continue;
        total += model.mixing.weights[i] * cdf(model.kernel, x, model.mixing.atoms[i]);
    }
    return total;
}

double product_log_density(const ProductMixtureModel& model,
                           const std::vector<Vec>& xs) {
    if (static_cast<int>(xs.size()) != model.N)
        throw InvalidArgument("product mixture: sequence length differs from N");
    Vec terms;
    terms.reserve(model.mixing.k());
    for (int i = 0; i < model.mixing.k(); ++i) {
        if (model.mixing.weights[i] <= 0.0) continue;
        double l = std::log(model.mixing.weights[i]);
        for (const auto& x : xs) l += log_density(model.kernel, x, model.mixing.atoms[i]);
        terms.push_back(l);
    }
    return log_sum_exp(terms);
}

double product_density(const ProductMixtureModel& model, const std::vector<Vec>& xs) {
    const double l = product_log_density(model, xs);
    return std::isfinite(l) ? std::exp(l) : 0.0;
}

std::vector<Vec> sample_data(const MixtureModel& model, int n, Rng& rng) {
    model.validate();
    std::vector<Vec> out;
    out.reserve(n);
    for (int s = 0; s < n; ++s) {
        const int i = pick_component(model.mixing, rng);
        out.push_back(sample(model.kernel, model.mixing.atoms[i], rng, 1)[0]);
    }
    return out;
}

std::vector<std::vector<Vec>> sample_sequences(const ProductMixtureModel& model,
                                               int m, Rng& rng) {
    model.validate();
    std::vector<std::vector<Vec>> out;
    out.reserve(m);
    for (int s = 0; s < m; ++s) {
        const int i = pick_component(model.mixing, rng);
        out.push_back(sample(model.kernel, model.mixing.atoms[i], rng, model.N));
    }
    return out;
}

namespace {

double divergence_integrand(DivergenceKind kind, double p, double q) {
    switch (kind) {
        case DivergenceKind::TotalVariation:
            return 0.5 * std::abs(p - q);
        case DivergenceKind::Hellinger:
            return 0.5 * sqr(std::sqrt(p) - std::sqrt(q));
        case DivergenceKind::KL:
            if (p <= 0.0) return 0.0;
            if (q <= 0.0) return std::numeric_limits<double>::infinity();
            return p * std::log(p / q);
    }
    throw InvalidArgument("unknown divergence kind");
}

double finish(DivergenceKind kind, double raw) {
    return kind == DivergenceKind::Hellinger ? std::sqrt(std::max(0.0, raw)) : raw;
}

std::vector<std::pair<double, double>> component_intervals(const MixtureModel& m) {
    std::vector<std::pair<double, double>> out;
    for (const auto& atom : m.mixing.atoms)
        out.push_back(support_interval(m.kernel, atom));
    return out;
}

}  // namespace

DivergenceResult divergence(const MixtureModel& P, const MixtureModel& Q,
                            DivergenceKind kind, const DivergenceConfig& cfg) {
    P.validate();
    Q.validate();
    if (P.kernel.obs_dim() != Q.kernel.obs_dim())
        throw InvalidArgument("divergence: sample spaces differ");

    if (P.kernel.family == Family::Bernoulli && Q.kernel.family == Family::Bernoulli) {
        double raw = 0.0;
        for (double x : {0.0, 1.0})
            raw += divergence_integrand(kind, mixture_density(P, {x}),
                                        mixture_density(Q, {x}));
        return {finish(kind, raw), 0.0, "exact-sum"};
    }

    const int q = P.kernel.obs_dim();
    if (q == 1) {
        auto intervals = component_intervals(P);
        const auto more = component_intervals(Q);
        intervals.insert(intervals.end(), more.begin(), more.end());
        const double raw = integrate_union(
            [&](double x) {
                return divergence_integrand(kind, mixture_density(P, {x}),
                                            mixture_density(Q, {x}));
            },
            intervals, cfg.tol);
        return {finish(kind, raw), 0.0, "quadrature-1d"};
    }

    if (q <= 3) {
        // Bounding box: union of component boxes at ten marginal deviations.
        if (P.kernel.family != Family::GaussianLocation)
            throw InvalidArgument("divergence: multivariate requires gaussian-location");
        Vec lo(q, std::numeric_limits<double>::infinity());
        Vec hi(q, -std::numeric_limits<double>::infinity());
        for (const auto* m : {&P, &Q}) {
            for (const auto& atom : m->mixing.atoms)
                for (int d = 0; d < q; ++d) {
                    const double s = std::sqrt(m->kernel.sigma[d][d]);
                    lo[d] = std::min(lo[d], atom[d] - 10.0 * s);
                    hi[d] = std::max(hi[d], atom[d] + 10.0 * s);
                }
        }
        const double raw = integrate_box(
            [&](const Vec& x) {
                return divergence_integrand(kind, mixture_density(P, x),
                                            mixture_density(Q, x));
            },
            Box{lo, hi}, cfg.panels, cfg.points);
        return {finish(kind, raw), 0.0, "tensor-grid"};
    }

    // Monte Carlo under the balanced proposal (P + Q) / 2.
    Rng rng(cfg.mc_seed);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < cfg.mc_samples; ++s) {
        const auto& src = rng.uniform() < 0.5 ? P : Q;
        const Vec x = sample_data(src, 1, rng)[0];
        const double p = mixture_density(P, x), qd = mixture_density(Q, x);
        const double r = 0.5 * (p + qd);
        const double g = r > 0.0 ? divergence_integrand(kind, p, qd) / r : 0.0;
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / cfg.mc_samples;
    const double var = std::max(0.0, sumsq / cfg.mc_samples - mean * mean);
    const double se_raw = std::sqrt(var / cfg.mc_samples);
    const double value = finish(kind, mean);
    double se = se_raw;
    if (kind == DivergenceKind::Hellinger && value > 0.0) se = se_raw / (2.0 * value);
    return {value, se, "monte-carlo"};
}

Vec bernoulli_product_pmf(const ProductMixtureModel& model) {
    model.validate();
    if (model.kernel.family != Family::Bernoulli)
        throw InvalidArgument("bernoulli_product_pmf: bernoulli kernel required");
    const int N = model.N;
    Vec pmf(N + 1, 0.0);
    // Binomial coefficients by the Pascal row.
    Vec binom(N + 1, 0.0);
    binom[0] = 1.0;
    for (int n = 1; n <= N; ++n)
        for (int s = n; s >= 1; --s) binom[s] += binom[s - 1];
    for (int i = 0; i < model.mixing.k(); ++i) {
        const double w = model.mixing.weights[i];
        if (w <= 0.0) continue;
        const double t = model.mixing.atoms[i][0];
        for (int s = 0; s <= N; ++s)
            pmf[s] += w * binom[s] * std::pow(t, s) * std::pow(1.0 - t, N - s);
    }
    return pmf;
}

std::pair<double, double> product_divergence_v(const ProductMixtureModel& P,
                                               const ProductMixtureModel& Q,
                                               int mc_samples, Rng& rng) {
    P.validate();
    Q.validate();
    if (P.kernel.family != Q.kernel.family || P.N != Q.N)
        throw InvalidArgument("product_divergence_v: kernel and N must match");

    if (P.kernel.family == Family::Bernoulli && P.N <= 20) {
        const Vec p = bernoulli_product_pmf(P);
        const Vec q = bernoulli_product_pmf(Q);
        double v = 0.0;
        for (size_t s = 0; s < p.size(); ++s) v += std::abs(p[s] - q[s]);
        return {0.5 * v, 0.0};
    }

    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < mc_samples; ++s) {
        const bool from_p = rng.uniform() < 0.5;
        const auto xs = sample_sequences(from_p ? P : Q, 1, rng)[0];
        const double lp = product_log_density(P, xs);
        const double lq = product_log_density(Q, xs);
        const double m = std::max(lp, lq);
        const double ep = std::exp(lp - m), eq = std::exp(lq - m);
        const double g = (ep + eq) > 0.0 ? std::abs(ep - eq) / (0.5 * (ep + eq)) : 0.0;
        sum += 0.5 * g;
        sumsq += 0.25 * g * g;
    }
    const double mean = sum / mc_samples;
    const double var = std::max(0.0, sumsq / mc_samples - mean * mean);
    return {mean, std::sqrt(var / mc_samples)};
}

double product_divergence_v_quadrature(const ProductMixtureModel& P,
                                       const ProductMixtureModel& Q, int panels,
                                       int points) {
    P.validate();
    Q.validate();
    if (P.kernel.family != Q.kernel.family || P.N != Q.N)
        throw InvalidArgument("product divergence: kernel and N must match");

    if (P.kernel.family == Family::Bernoulli) {
        const Vec p = bernoulli_product_pmf(P);
        const Vec q = bernoulli_product_pmf(Q);
        double v = 0.0;
        for (size_t s = 0; s < p.size(); ++s) v += std::abs(p[s] - q[s]);
        return 0.5 * v;
    }
    if (P.kernel.obs_dim() != 1)
        throw InvalidArgument("quadrature product divergence needs 1-D observations");
    if (P.N > 3)
        throw InvalidArgument("quadrature product divergence supports N <= 3");

    // A length-1 product law is the plain mixture: use the adaptive total
    // variation, which resolves the |p - q| kinks far better than a fixed
    // tensor rule.
    if (P.N == 1)
        return divergence({P.kernel, P.mixing}, {Q.kernel, Q.mixing},
                          DivergenceKind::TotalVariation)
            .value;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* m : {&P, &Q})
        for (const auto& atom : m->mixing.atoms) {
            const auto iv = support_interval(m->kernel, atom);
            lo = std::min(lo, iv.first);
            hi = std::max(hi, iv.second);
        }
    Box cube;
    cube.lo.assign(P.N, lo);
    cube.hi.assign(P.N, hi);
    std::vector<Vec> seq(P.N, Vec(1));
    const double integral = integrate_box(
        [&](const Vec& xs) {
            for (int t = 0; t < P.N; ++t) seq[t][0] = xs[t];
            return std::abs(product_density(P, seq) - product_density(Q, seq));
        },
        cube, panels, points);
    return 0.5 * integral;
}

}  // namespace mixot
