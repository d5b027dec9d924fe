#include "mixot/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mixot/phi.hpp"
#include "mixot/rng.hpp"

namespace mixot {

namespace {

// Map the plain simplex onto {w : w_i >= floor, sum w = 1}.
MixingMeasure with_weight_floor(MixingMeasure g, double floor) {
    if (floor <= 0.0) return g;
    const double span = 1.0 - floor * static_cast<double>(g.k());
    if (span < 0.0)
        throw InvalidArgument("weight floor too large for the atom budget");
    for (double& w : g.weights) w = floor + span * w;
    return g;
}

GkSettings gk_settings(const EstimatorConfig& cfg, const char* label) {
    GkSettings s;
    s.starts = cfg.multistart;
    s.max_iter = cfg.max_iter;
    s.ftol = cfg.tol;
    s.seed = derive_seed(cfg.seed, {hash_string(label)});
    return s;
}

EstimateResult from_gk(const GkResult& r) {
    EstimateResult out;
    out.estimate = r.argmin;
    out.objective = r.value;
    out.starts = r.starts;
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

std::vector<double> sorted_scalars(const std::vector<Vec>& data) {
    std::vector<double> xs(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != 1)
            throw InvalidArgument("scalar observations expected");
        xs[i] = data[i][0];
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace

void EstimatorConfig::validate() const {
    if (k < 1) throw InvalidArgument("atom budget must be at least 1");
    if (multistart < 1) throw InvalidArgument("multistart count must be at least 1");
    if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (weight_floor < 0.0 || weight_floor * k > 1.0)
        throw InvalidArgument("weight floor must lie in [0, 1/k]");
    theta.validate();
}

double ks_objective(const MixtureModel& model, const std::vector<double>& sorted_data) {
    const size_t n = sorted_data.size();
    if (n == 0) throw InvalidArgument("empty data");
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f = mixture_cdf(model, sorted_data[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        worst = std::max(worst, std::max(std::abs(f - hi), std::abs(f - lo)));
    }
    return worst;
}

namespace {

// Empirical orthant masses at every data point, with and without ties.
std::vector<std::pair<double, double>> orthant_masses(const std::vector<Vec>& data) {
    const size_t n = data.size();
    const size_t q = data[0].size();
    std::vector<std::pair<double, double>> masses(n);
    for (size_t i = 0; i < n; ++i) {
        int leq = 0, strict = 0;
        for (size_t j = 0; j < n; ++j) {
            bool inside = true, equal = true;
            for (size_t d = 0; d < q && inside; ++d) {
                if (data[j][d] > data[i][d]) inside = false;
                if (data[j][d] != data[i][d]) equal = false;
            }
            if (inside) {
                ++leq;
                if (!equal) ++strict;
            }
        }
        masses[i] = {double(leq) / double(n), double(strict) / double(n)};
    }
    return masses;
}

double ks_rect_with_masses(const MixtureModel& model, const std::vector<Vec>& data,
                           const std::vector<std::pair<double, double>>& masses) {
    double worst = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
        double f = 0.0;
        for (int c = 0; c < model.mixing.k(); ++c)
            f += model.mixing.weights[c] *
                 rect_cdf(model.kernel, data[i], model.mixing.atoms[c]);
        worst = std::max(worst, std::abs(f - masses[i].first));
        worst = std::max(worst, std::abs(f - masses[i].second));
    }
    return worst;
}

}  // namespace

double ks_objective_rect(const MixtureModel& model, const std::vector<Vec>& data) {
    if (data.empty()) throw InvalidArgument("empty data");
    return ks_rect_with_masses(model, data, orthant_masses(data));
}

// Deterministic seed for the location families: atoms at the per-coordinate
// data quantiles (i + 1/2)/k, uniform weights, and (for location-scale) the
// overall sample variance.  Random box-corner starts alone frequently stall
// in weight-collapsed local minima; one start in the right basin fixes that
// without raising the whole multistart budget.
std::vector<MixingMeasure> location_warm_starts(const std::vector<Vec>& data,
                                                const KernelModel& kernel, int k) {
    if (kernel.family != Family::GaussianLocation &&
        kernel.family != Family::GaussianLocationScale)
        return {};
    const int q = kernel.obs_dim();
    MixingMeasure g;
    g.atoms.assign(k, Vec(kernel.param_dim(), 0.0));
    g.weights.assign(k, 1.0 / k);
    Vec coord(data.size());
    for (int d = 0; d < q; ++d) {
        for (size_t t = 0; t < data.size(); ++t) coord[t] = data[t][d];
        std::sort(coord.begin(), coord.end());
        for (int i = 0; i < k; ++i) {
            const size_t at = std::min(
                data.size() - 1,
                static_cast<size_t>((i + 0.5) / k * static_cast<double>(data.size())));
            g.atoms[i][d] = coord[at];
        }
    }
    if (kernel.family == Family::GaussianLocationScale) {
        double mean = 0.0, var = 0.0;
        for (const auto& x : data) mean += x[0];
        mean /= static_cast<double>(data.size());
        for (const auto& x : data) var += sqr(x[0] - mean);
        var /= std::max<double>(1.0, static_cast<double>(data.size()) - 1.0);
        for (int i = 0; i < k; ++i) g.atoms[i][1] = var;
    }
    for (auto& atom : g.atoms) atom = kernel.theta.clip(atom);
    return {std::move(g)};
}

EstimateResult min_ks_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                               const EstimatorConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw InvalidArgument("empty data");

    MeasureObjective obj;
    if (kernel.obs_dim() == 1) {
        auto xs = sorted_scalars(data);
        obj = [xs, &kernel, &cfg](const MixingMeasure& g) {
            return ks_objective({kernel, with_weight_floor(g, cfg.weight_floor)}, xs);
        };
    } else {
        if (!kernel.diagonal_sigma())
            throw InvalidArgument("multivariate KS needs a diagonal covariance");
        auto masses = orthant_masses(data);
        obj = [&data, masses = std::move(masses), &kernel, &cfg](const MixingMeasure& g) {
            return ks_rect_with_masses({kernel, with_weight_floor(g, cfg.weight_floor)},
                                       data, masses);
        };
    }
    GkSettings settings = gk_settings(cfg, "ks");
    settings.warm_starts = location_warm_starts(data, kernel, cfg.k);
    auto res = from_gk(optimize_over_gk(obj, cfg.k, kernel.theta, settings));
    res.estimate = with_weight_floor(res.estimate, cfg.weight_floor);
    return res;
}

double mmd_objective(const KernelModel& kernel, const MixingMeasure& g,
                     const std::vector<Vec>& data, double gamma) {
    const int k = g.k();
    const size_t n = data.size();
    if (n == 0) throw InvalidArgument("empty data");
    double quad = 0.0, cross = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
            quad += g.weights[i] * g.weights[j] *
                    mmd_pair_kernel(kernel, g.atoms[i], g.atoms[j], gamma);
        double jn = 0.0;
        for (const auto& x : data) jn += mmd_point_kernel(kernel, g.atoms[i], x, gamma);
        cross += g.weights[i] * jn / static_cast<double>(n);
    }
    return quad - 2.0 * cross;
}

namespace {

// Objective, analytic gradient, and projected-gradient machinery for the
// kernel-embedding estimator.  The kernel matrices M = I + 4 gamma Sigma and
// M2 = I + 2 gamma Sigma are fixed, so their factorizations are shared.
struct MmdProblem {
    const KernelModel& kernel;
    const std::vector<Vec>& data;
    double gamma;
    int k, dim;
    double floor;
    Eigen::LLT<Eigen::MatrixXd> pair_llt, point_llt;
    double pair_scale = 1.0, point_scale = 1.0;

    MmdProblem(const KernelModel& kern, const std::vector<Vec>& d, double g, int kk,
               double fl)
        : kernel(kern), data(d), gamma(g), k(kk), dim(kern.param_dim()), floor(fl) {
        const int q = kern.obs_dim();
        Eigen::MatrixXd sigma(q, q);
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c) sigma(r, c) = kern.sigma[r][c];
        Eigen::MatrixXd mp = Eigen::MatrixXd::Identity(q, q) + 4.0 * gamma * sigma;
        Eigen::MatrixXd mj = Eigen::MatrixXd::Identity(q, q) + 2.0 * gamma * sigma;
        pair_llt.compute(mp);
        point_llt.compute(mj);
        pair_scale = 1.0 / std::sqrt(mp.determinant());
        point_scale = 1.0 / std::sqrt(mj.determinant());
    }

    // value of exp kernel and its gradient factor -2 gamma M^{-1} d
    double pair(const Vec& a, const Vec& b, Eigen::VectorXd* grad) const {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = a[i] - b[i];
        Eigen::VectorXd md = pair_llt.solve(d);
        const double v = pair_scale * std::exp(-gamma * d.dot(md));
        if (grad) *grad = -2.0 * gamma * v * md;
        return v;
    }
    double point(const Vec& a, const Vec& x, Eigen::VectorXd* grad) const {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = a[i] - x[i];
        Eigen::VectorXd md = point_llt.solve(d);
        const double v = point_scale * std::exp(-gamma * d.dot(md));
        if (grad) *grad = -2.0 * gamma * v * md;
        return v;
    }

    // x layout: k*dim atom coordinates then k weights.
    double eval(const Vec& x, Vec* grad) const {
        const double n = static_cast<double>(data.size());
        std::vector<Vec> atoms(k);
        for (int i = 0; i < k; ++i)
            atoms[i].assign(x.begin() + i * dim, x.begin() + (i + 1) * dim);
        const double* w = x.data() + k * dim;

        double obj = 0.0;
        std::vector<Eigen::VectorXd> gtheta(k, Eigen::VectorXd::Zero(dim));
        Vec gw(k, 0.0);
        Eigen::VectorXd gk(dim);
        for (int i = 0; i < k; ++i) {
            const Vec& a = atoms[i];
            for (int j = 0; j < k; ++j) {
                const double kij = pair(a, atoms[j], grad ? &gk : nullptr);
                obj += w[i] * w[j] * kij;
                if (grad) {
                    gtheta[i] += 2.0 * w[i] * w[j] * gk;
                    gw[i] += 2.0 * w[j] * kij;  // symmetric quadratic form
                }
            }
            double jn = 0.0;
            Eigen::VectorXd gjn = Eigen::VectorXd::Zero(dim);
            for (const auto& xs : data) {
                jn += point(a, xs, grad ? &gk : nullptr);
                if (grad) gjn += gk;
            }
            jn /= n;
            obj -= 2.0 * w[i] * jn;
            if (grad) {
                gtheta[i] -= 2.0 * w[i] * gjn / n;
                gw[i] -= 2.0 * jn;
            }
        }
        if (grad) {
            grad->assign(x.size(), 0.0);
            for (int i = 0; i < k; ++i) {
                for (int d = 0; d < dim; ++d) (*grad)[i * dim + d] = gtheta[i][d];
                (*grad)[k * dim + i] = gw[i];
            }
        }
        return obj;
    }

    Vec project(Vec x) const {
        for (int i = 0; i < k; ++i) {
            Vec a(dim);
            for (int d = 0; d < dim; ++d) a[d] = x[i * dim + d];
            a = kernel.theta.clip(a);
            for (int d = 0; d < dim; ++d) x[i * dim + d] = a[d];
        }
        Vec w(x.begin() + k * dim, x.end());
        if (floor > 0.0) {
            const double span = 1.0 - floor * k;
            for (double& wi : w) wi = (wi - floor) / std::max(span, 1e-300);
            w = project_simplex(w);
            for (double& wi : w) wi = floor + span * wi;
        } else {
            w = project_simplex(w);
        }
        std::copy(w.begin(), w.end(), x.begin() + k * dim);
        return x;
    }
};

struct PgdOutcome {
    Vec x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

PgdOutcome projected_gradient(const MmdProblem& prob, Vec x, int max_iter, double tol) {
    x = prob.project(std::move(x));
    Vec grad;
    double f = prob.eval(x, &grad);
    double eta = 1.0;
    PgdOutcome out;
    for (int it = 0; it < max_iter; ++it) {
        ++out.iterations;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            Vec cand(x.size());
            for (size_t i = 0; i < x.size(); ++i) cand[i] = x[i] - eta * grad[i];
            cand = prob.project(std::move(cand));
            double move2 = 0.0;
            for (size_t i = 0; i < x.size(); ++i) move2 += sqr(cand[i] - x[i]);
            const double fc = prob.eval(cand, nullptr);
            if (fc <= f - 1e-4 * move2 / eta) {
                const double drop = f - fc;
                x = std::move(cand);
                f = fc;
                accepted = true;
                if (move2 <= tol && drop <= tol * (1.0 + std::abs(f)))
                    out.converged = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        if (out.converged) break;
        prob.eval(x, &grad);
        eta = std::min(eta * 1.5, 1e3);
    }
    out.x = std::move(x);
    out.value = f;
    return out;
}

}  // namespace

EstimateResult min_mmd_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                                double gamma, const EstimatorConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw InvalidArgument("empty data");
    if (kernel.family != Family::GaussianLocation)
        throw InvalidArgument("kernel-embedding estimator needs a gaussian location kernel");
    if (gamma <= 0.0) throw InvalidArgument("bandwidth must be positive");

    const int k = cfg.k, dim = kernel.param_dim();
    MmdProblem prob(kernel, data, gamma, k, cfg.weight_floor);

    Rng rng(derive_seed(cfg.seed, {hash_string("mmd-pgd")}));
    const auto lhs = latin_hypercube(cfg.multistart, k * dim, rng);

    // Deterministic first start: atoms at the per-coordinate data quantiles
    // (i + 1/2)/k with uniform weights.  Random starts from a distant box
    // corner often stall in weight-collapsed local minima; the quantile start
    // sits in the right basin whenever the mixture is roughly exact-fitted.
    Vec quantile_start(static_cast<size_t>(k * dim + k), 1.0 / k);
    {
        Vec coord(data.size());
        for (int d = 0; d < dim; ++d) {
            for (size_t t = 0; t < data.size(); ++t) coord[t] = data[t][d];
            std::sort(coord.begin(), coord.end());
            for (int i = 0; i < k; ++i) {
                const size_t at = std::min(
                    data.size() - 1,
                    static_cast<size_t>((i + 0.5) / k * static_cast<double>(data.size())));
                quantile_start[static_cast<size_t>(i) * dim + d] = coord[at];
            }
        }
    }

    EstimateResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int s = 0; s < cfg.multistart; ++s) {
        Vec x(static_cast<size_t>(k * dim + k));
        for (int i = 0; i < k * dim; ++i) {
            const int d = i % dim;
            x[i] = kernel.theta.lo[d] +
                   lhs[s][i] * (kernel.theta.hi[d] - kernel.theta.lo[d]);
        }
        double tot = 0.0;
        for (int i = 0; i < k; ++i) {
            const double e = -std::log(std::max(rng.uniform(), 1e-300));
            x[k * dim + i] = e;
            tot += e;
        }
        for (int i = 0; i < k; ++i) x[k * dim + i] /= tot;
        if (s == 0) x = quantile_start;

        auto run = projected_gradient(prob, std::move(x), cfg.max_iter, cfg.tol);
        ++best.starts;
        best.iterations += run.iterations;
        if (run.value < best.objective) {
            best.objective = run.value;
            best.converged = run.converged;
            MixingMeasure g;
            for (int i = 0; i < k; ++i) {
                g.atoms.emplace_back(run.x.begin() + i * dim,
                                     run.x.begin() + (i + 1) * dim);
                g.weights.push_back(run.x[k * dim + i]);
            }
            best.estimate = std::move(g);
        }
    }
    if (!std::isfinite(best.objective))
        throw RuntimeFailure("kernel-embedding objective non-finite at every start");
    return best;
}

double gmm_objective(const MixingMeasure& g, const Vec& stat_means, double center) {
    double worst = 0.0;
    for (size_t j = 1; j <= stat_means.size(); ++j) {
        double m = 0.0;
        for (int i = 0; i < g.k(); ++i)
            m += g.weights[i] * std::pow(g.atoms[i][0] - center, static_cast<double>(j));
        worst = std::max(worst, std::abs(m - stat_means[j - 1]));
    }
    return worst;
}

namespace {

// Square moment system for the Gauss-Newton polish: unknowns are the k atom
// locations and the first k-1 weights; residuals are the 2k-1 moment gaps.
Vec moment_residual(const Vec& z, int k, const Vec& tbar, double center) {
    Vec r(tbar.size());
    for (size_t j = 1; j <= tbar.size(); ++j) {
        double m = 0.0, wsum = 0.0;
        for (int i = 0; i < k; ++i) {
            const double w = (i + 1 < k) ? z[k + i] : 1.0 - wsum;
            wsum += (i + 1 < k) ? z[k + i] : 0.0;
            m += w * std::pow(z[i] - center, static_cast<double>(j));
        }
        r[j - 1] = m - tbar[j - 1];
    }
    return r;
}

}  // namespace

EstimateResult gmm_estimate_from_moments(const Vec& stat_means, const KernelModel& kernel,
                                         const EstimatorConfig& cfg, double center) {
    cfg.validate();
    if (kernel.family != Family::GaussianLocation || kernel.obs_dim() != 1)
        throw InvalidArgument("moment estimator is registered for the 1-D gaussian location kernel");
    if (stat_means.size() != static_cast<size_t>(2 * cfg.k - 1))
        throw InvalidArgument("need exactly 2k-1 statistic means");

    const auto obj = [&](const MixingMeasure& g) {
        return gmm_objective(with_weight_floor(g, cfg.weight_floor), stat_means, center);
    };
    auto res = from_gk(optimize_over_gk(obj, cfg.k, kernel.theta, gk_settings(cfg, "gmm")));
    res.estimate = with_weight_floor(res.estimate, cfg.weight_floor);

    // Gauss-Newton polish on the square system (skipped under a weight floor,
    // where the active constraint breaks the square-system structure).
    if (cfg.weight_floor == 0.0) {
        const int k = cfg.k;
        Vec z(static_cast<size_t>(2 * k - 1));
        for (int i = 0; i < k; ++i) z[i] = res.estimate.atoms[i][0];
        for (int i = 0; i + 1 < k; ++i) z[k + i] = res.estimate.weights[i];
        double norm = 0.0;
        const Vec polished = gauss_newton(
            [&](const Vec& x) { return moment_residual(x, k, stat_means, center); }, z,
            80, 1e-15, &norm);
        MixingMeasure g;
        double wsum = 0.0;
        bool ok = true;
        for (int i = 0; i < k; ++i) {
            const Vec atom = kernel.theta.clip({polished[i]});
            if (std::abs(atom[0] - polished[i]) > 1e-9) ok = false;
            g.atoms.push_back(atom);
            const double w = (i + 1 < k) ? polished[k + i] : 1.0 - wsum;
            wsum += (i + 1 < k) ? polished[k + i] : 0.0;
            if (w < -1e-12 || w > 1.0 + 1e-12) ok = false;
            g.weights.push_back(std::min(std::max(w, 0.0), 1.0));
        }
        if (ok) {
            const double v = gmm_objective(g, stat_means, center);
            if (v < res.objective) {
                res.estimate = std::move(g);
                res.objective = v;
            }
        }
    }
    return res;
}

EstimateResult gmm_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                            const EstimatorConfig& cfg, double center) {
    if (data.empty()) throw InvalidArgument("empty data");
    if (kernel.family != Family::GaussianLocation || kernel.obs_dim() != 1)
        throw InvalidArgument("moment estimator is registered for the 1-D gaussian location kernel");
    const double sigma = std::sqrt(kernel.sigma[0][0]);
    const auto rows = gmm_statistic_coeffs(2 * cfg.k - 1, sigma, center);
    Vec tbar(rows.size(), 0.0);
    for (const auto& x : data)
        for (size_t j = 0; j < rows.size(); ++j)
            tbar[j] += gmm_statistic_eval(rows[j], center, x[0]);
    for (double& t : tbar) t /= static_cast<double>(data.size());
    return gmm_estimate_from_moments(tbar, kernel, cfg, center);
}

double mean_loglik(const MixtureModel& model, const std::vector<Vec>& data) {
    if (data.empty()) throw InvalidArgument("empty data");
    double total = 0.0;
    for (const auto& x : data) total += mixture_log_density(model, x);
    return total / static_cast<double>(data.size());
}

double mean_loglik_product(const ProductMixtureModel& model,
                           const std::vector<std::vector<Vec>>& sequences) {
    if (sequences.empty()) throw InvalidArgument("empty data");
    double total = 0.0;
    for (const auto& s : sequences) total += product_log_density(model, s);
    return total / static_cast<double>(sequences.size());
}

}  // namespace mixot
