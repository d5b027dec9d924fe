#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "mixot/estimators.hpp"
#include "mixot/rng.hpp"

namespace mixot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SeqStats {
    Vec sum;               // componentwise observation sum
    double sum_log = 0.0;  // gamma only
    int count = 0;
};

// k-means++ seeding: indices of k summary points, each drawn with probability
// proportional to its squared distance from the points already chosen.
std::vector<int> kmeanspp(const std::vector<Vec>& pts, int k, Rng& rng) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> picked;
    picked.push_back(rng.uniform_int(0, n - 1));
    Vec d2(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(picked.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sqr(euclidean(pts[i], pts[picked.back()])));
            total += d2[i];
        }
        int next = rng.uniform_int(0, n - 1);  // fallback when all points coincide
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (int i = 0; i < n; ++i) {
                u -= d2[i];
                if (u <= 0.0) {
                    next = i;
                    break;
                }
            }
        }
        picked.push_back(next);
    }
    return picked;
}

// Weighted gamma MLE: solve log(alpha) - digamma(alpha) = log(mean) - mean(log)
// by Newton from the Minka closed-form initializer.
Vec gamma_update(double mean, double mean_log, const Box& box) {
    const double s = std::max(std::log(mean) - mean_log, 1e-12);
    double alpha = (3.0 - s + std::sqrt(sqr(s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 30; ++it) {
        const double g = std::log(alpha) - boost::math::digamma(alpha) - s;
        const double gp = 1.0 / alpha - boost::math::trigamma(alpha);
        const double step = g / gp;
        alpha = std::min(std::max(alpha - step, alpha * 0.1), alpha * 10.0);
        if (std::abs(step) <= 1e-12 * (1.0 + alpha)) break;
    }
    return box.clip({alpha, alpha / mean});
}

struct EmRun {
    MixingMeasure g;
    double loglik = kNegInf;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    Vec trace;
};

EmRun em_core(const std::vector<std::vector<Vec>>& sequences,
              const std::vector<SeqStats>& stats, const std::vector<Vec>& summaries,
              const KernelModel& kernel, const EstimatorConfig& cfg, Rng& rng,
              double jitter) {
    const int m = static_cast<int>(sequences.size());
    const int k = cfg.k;
    const int q = kernel.obs_dim();

    // --- initialization from k-means++ centers on the sequence summaries ---
    EmRun run;
    const auto seeds = kmeanspp(summaries, k, rng);
    double pooled_mean = 0.0, pooled_var = 0.0;
    if (kernel.family == Family::Gamma) {
        double tot = 0.0, tot2 = 0.0;
        long cnt = 0;
        for (const auto& st : stats) {
            tot += st.sum[0];
            cnt += st.count;
        }
        pooled_mean = tot / static_cast<double>(cnt);
        for (const auto& s : sequences)
            for (const auto& x : s) tot2 += sqr(x[0] - pooled_mean);
        pooled_var = std::max(tot2 / static_cast<double>(cnt), 1e-12);
    }
    for (int i = 0; i < k; ++i) {
        Vec center = summaries[seeds[i]];
        for (double& c : center) c += jitter * rng.normal();
        Vec theta;
        switch (kernel.family) {
            case Family::GaussianLocation:
                theta = center;
                break;
            case Family::Gamma: {
                const double alpha =
                    std::min(std::max(sqr(pooled_mean) / pooled_var, 0.05), 100.0);
                theta = {alpha, alpha / std::max(center[0], 1e-6)};
                break;
            }
            case Family::Bernoulli:
                theta = {std::min(std::max(center[0], 0.02), 0.98)};
                break;
            default:
                throw InvalidArgument("EM supports gaussian-location, gamma, and bernoulli kernels");
        }
        run.g.atoms.push_back(kernel.theta.clip(theta));
        run.g.weights.push_back(1.0 / k);
    }

    // --- EM iterations ---
    std::vector<Vec> resp(m, Vec(k));
    Vec logw(k);
    double prev = kNegInf;
    for (int it = 0; it < cfg.max_iter; ++it) {
        ++run.iterations;
        for (int i = 0; i < k; ++i)
            logw[i] = run.g.weights[i] > 0.0 ? std::log(run.g.weights[i]) : kNegInf;

        double loglik = 0.0;
        for (int s = 0; s < m; ++s) {
            double best = kNegInf;
            for (int i = 0; i < k; ++i) {
                double l = logw[i];
                for (const auto& x : sequences[s])
                    l += log_density(kernel, x, run.g.atoms[i]);
                resp[s][i] = l;
                best = std::max(best, l);
            }
            if (best == kNegInf) {  // every component vanishes on this sequence
                run.degenerate = true;
                return run;
            }
            double z = 0.0;
            for (int i = 0; i < k; ++i) z += std::exp(resp[s][i] - best);
            const double lz = best + std::log(z);
            loglik += lz;
            for (int i = 0; i < k; ++i) resp[s][i] = std::exp(resp[s][i] - lz);
        }
        run.loglik = loglik;
        if (cfg.record_trace) run.trace.push_back(loglik);
        if (std::abs(loglik - prev) <= cfg.tol * (1.0 + std::abs(loglik))) {
            run.converged = true;
            break;
        }
        prev = loglik;

        for (int i = 0; i < k; ++i) {
            double r_total = 0.0, n_eff = 0.0, sum_log = 0.0;
            Vec sum(q, 0.0);
            for (int s = 0; s < m; ++s) {
                const double r = resp[s][i];
                r_total += r;
                n_eff += r * stats[s].count;
                sum_log += r * stats[s].sum_log;
                for (int d = 0; d < q; ++d) sum[d] += r * stats[s].sum[d];
            }
            run.g.weights[i] = r_total / static_cast<double>(m);
            if (n_eff <= 1e-12) continue;  // dead component keeps its parameters
            switch (kernel.family) {
                case Family::GaussianLocation: {
                    for (double& v : sum) v /= n_eff;
                    run.g.atoms[i] = kernel.theta.clip(sum);
                    break;
                }
                case Family::Gamma:
                    run.g.atoms[i] =
                        gamma_update(sum[0] / n_eff, sum_log / n_eff, kernel.theta);
                    break;
                case Family::Bernoulli:
                    run.g.atoms[i] = kernel.theta.clip({sum[0] / n_eff});
                    break;
                default:
                    break;
            }
        }
    }
    return run;
}

EstimateResult em_multistart(const std::vector<std::vector<Vec>>& sequences,
                             const KernelModel& kernel, const EstimatorConfig& cfg) {
    cfg.validate();
    if (sequences.empty()) throw InvalidArgument("empty data");
    const int q = kernel.obs_dim();

    std::vector<SeqStats> stats(sequences.size());
    std::vector<Vec> summaries(sequences.size());
    for (size_t s = 0; s < sequences.size(); ++s) {
        if (sequences[s].empty()) throw InvalidArgument("empty sequence");
        SeqStats st;
        st.sum.assign(q, 0.0);
        for (const auto& x : sequences[s]) {
            if (static_cast<int>(x.size()) != q)
                throw InvalidArgument("observation dimension mismatch");
            for (int d = 0; d < q; ++d) st.sum[d] += x[d];
            if (kernel.family == Family::Gamma) {
                if (x[0] <= 0.0) throw InvalidArgument("gamma EM needs positive data");
                st.sum_log += std::log(x[0]);
            }
            ++st.count;
        }
        summaries[s] = st.sum;
        for (double& v : summaries[s]) v /= st.count;
        stats[s] = std::move(st);
    }
    double spread = 0.0;  // jitter scale for degenerate restarts
    for (int d = 0; d < q; ++d) {
        double lo = summaries[0][d], hi = lo;
        for (const auto& p : summaries) {
            lo = std::min(lo, p[d]);
            hi = std::max(hi, p[d]);
        }
        spread = std::max(spread, hi - lo);
    }

    EstimateResult best;
    best.objective = std::numeric_limits<double>::infinity();
    int failures = 0;
    for (int start = 0; start < cfg.multistart; ++start) {
        constexpr int kMaxJitterRetries = 3;
        EmRun run;
        for (int attempt = 0; attempt <= kMaxJitterRetries; ++attempt) {
            Rng rng(derive_seed(cfg.seed, {hash_string("em"),
                                           static_cast<std::uint64_t>(start),
                                           static_cast<std::uint64_t>(attempt)}));
            run = em_core(sequences, stats, summaries, kernel, cfg, rng,
                          attempt == 0 ? 0.0 : 0.05 * spread * attempt);
            if (!run.degenerate) break;
        }
        if (run.degenerate) {
            ++failures;
            continue;
        }
        ++best.starts;
        best.iterations += run.iterations;
        const double obj = -run.loglik / static_cast<double>(sequences.size());
        if (obj < best.objective) {
            best.objective = obj;
            best.estimate = run.g;
            best.converged = run.converged;
            best.loglik_trace = std::move(run.trace);
        }
    }
    if (failures == cfg.multistart)
        throw RuntimeFailure("EM degenerate responsibilities at every restart");
    return best;
}

}  // namespace

EstimateResult em_estimate(const std::vector<Vec>& data, const KernelModel& kernel,
                           const EstimatorConfig& cfg) {
    std::vector<std::vector<Vec>> as_sequences(data.size());
    for (size_t i = 0; i < data.size(); ++i) as_sequences[i] = {data[i]};
    return em_multistart(as_sequences, kernel, cfg);
}

EstimateResult em_estimate_product(const std::vector<std::vector<Vec>>& sequences,
                                   const KernelModel& kernel, const EstimatorConfig& cfg) {
    return em_multistart(sequences, kernel, cfg);
}

}  // namespace mixot
