#include "mixot/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "mixot/config_json.hpp"
#include "mixot/mixture.hpp"
#include "mixot/phi.hpp"
#include "mixot/rng.hpp"
#include "mixot/threadpool.hpp"
#include "mixot/transport.hpp"

namespace mixot {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxFailureRate = 0.05;
constexpr int kMinFitRungs = 4;
constexpr int kMinFitReplicates = 30;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_compact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

bool known_estimator(const std::string& s) {
    return s == "ks" || s == "mmd" || s == "gmm" || s == "em";
}

// Fill the pieces callers are allowed to omit: the optimizer box defaults to
// the kernel's parameter box, the tag to the estimator name.
ExperimentConfig normalized(const ExperimentConfig& raw) {
    ExperimentConfig cfg = raw;
    if (cfg.estimator_config.theta.dim() == 0) cfg.estimator_config.theta = cfg.kernel.theta;
    if (cfg.estimator_config.tag.empty()) cfg.estimator_config.tag = cfg.estimator;
    return cfg;
}

double resolve_worst_case_radius(const ExperimentConfig& cfg) {
    if (cfg.local_radius > 0.0) return cfg.local_radius;
    if (cfg.truth.k() < 2) return 0.0;  // no separation to scale from
    double min_sep = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.truth.k(); ++i)
        for (int j = i + 1; j < cfg.truth.k(); ++j)
            min_sep = std::min(min_sep, euclidean(cfg.truth.atoms[i], cfg.truth.atoms[j]));
    return 0.2 * min_sep;
}

// Uniform redraw in a ball around each atom (clipped to the box) plus a
// multiplicative jitter on the weights.  Keeps the atom count, so matched
// errors stay well defined.
MixingMeasure perturb_truth(const MixingMeasure& g0, double radius, const Box& box, Rng& rng) {
    MixingMeasure g = g0;
    const int q = g.dim();
    for (auto& atom : g.atoms) {
        Vec dir(q);
        double norm = 0.0;
        for (int d = 0; d < q; ++d) {
            dir[d] = rng.normal();
            norm += sqr(dir[d]);
        }
        norm = std::sqrt(std::max(norm, 1e-300));
        const double rad = radius * std::pow(rng.uniform(), 1.0 / q);
        for (int d = 0; d < q; ++d) atom[d] += rad * dir[d] / norm;
        atom = box.clip(atom);
    }
    double total = 0.0;
    for (double& w : g.weights) {
        w *= std::exp(rng.uniform(-radius, radius));
        total += w;
    }
    for (double& w : g.weights) w /= total;
    return g;
}

struct FitOutcome {
    MixingMeasure estimate;
    double objective = 0.0;
};

// One replicate: derive the estimator's stream, draw the data, fit.  The
// order (sub-seed, then sample, then fit) is part of the reproducibility
// contract — tests rebuild rows from the row seed by repeating it.
FitOutcome fit_one(const ExperimentConfig& cfg, const Rung& rung, const MixingMeasure& gen,
                   Rng& rng) {
    EstimatorConfig ec = cfg.estimator_config;
    ec.seed = rng.next_u64();
    EstimateResult r;
    if (rung.product()) {
        const auto seqs =
            sample_sequences({cfg.kernel, gen, rung.N}, static_cast<int>(rung.m), rng);
        r = em_estimate_product(seqs, cfg.kernel, ec);
    } else {
        const auto data = sample_data({cfg.kernel, gen}, static_cast<int>(rung.n), rng);
        if (cfg.estimator == "ks") {
            r = min_ks_estimate(data, cfg.kernel, ec);
        } else if (cfg.estimator == "mmd") {
            const double gamma = cfg.mmd_gamma > 0.0 ? cfg.mmd_gamma : mmd_median_bandwidth(data);
            r = min_mmd_estimate(data, cfg.kernel, gamma, ec);
        } else if (cfg.estimator == "gmm") {
            r = gmm_estimate(data, cfg.kernel, ec, cfg.gmm_center);
        } else {
            r = em_estimate(data, cfg.kernel, ec);
        }
    }
    return {std::move(r.estimate), r.objective};
}

double score(const ErrorMetric& metric, const MixingMeasure& est, const MixingMeasure& gen,
             const Rung& rung) {
    switch (metric.kind) {
        case ErrorMetric::Kind::Wasserstein:
            return wasserstein_value(est, gen, metric.r);
        case ErrorMetric::Kind::DN:
            if (est.k() != gen.k())
                throw RuntimeFailure("bench: matched metric needs equal atom counts");
            return d_n_metric(est, gen, rung.product() ? static_cast<double>(rung.N) : 1.0);
        default:
            break;
    }
    if (est.k() != gen.k())
        throw RuntimeFailure("bench: matched metric needs equal atom counts");
    const auto tau = d_n_matching(est, gen, 1.0);
    double total = 0.0;
    for (int i = 0; i < gen.k(); ++i) {
        total += metric.kind == ErrorMetric::Kind::Atom
                     ? euclidean(est.atoms[static_cast<size_t>(tau[i])], gen.atoms[i])
                     : std::abs(est.weights[static_cast<size_t>(tau[i])] - gen.weights[i]);
    }
    return total / gen.k();
}

struct Ols {
    double slope = 0.0;
    double slope_se = 0.0;
    double r2 = 1.0;
};

Ols ols_line(const Vec& xs, const Vec& ys) {
    const int n = static_cast<int>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (int i = 0; i < n; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
        syy += (ys[i] - ybar) * (ys[i] - ybar);
    }
    Ols fit;
    fit.slope = sxy / sxx;
    const double intercept = ybar - fit.slope * xbar;
    double ssres = 0.0;
    for (int i = 0; i < n; ++i) ssres += sqr(ys[i] - intercept - fit.slope * xs[i]);
    fit.slope_se = n > 2 ? std::sqrt(std::max(ssres, 0.0) / (n - 2) / sxx) : 0.0;
    fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
    return fit;
}

RateFit fit_from_points(std::vector<RatePoint> points, bool worst_case, int replicates) {
    Vec xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& p : points) {
        const double err = worst_case ? p.max_error : p.mean_error;
        if (!(err > 0.0) || !std::isfinite(err))
            throw InvalidArgument("fit_rate: errors must be positive and finite");
        if (!(p.size > 0.0)) throw InvalidArgument("fit_rate: sizes must be positive");
        xs.push_back(std::log(p.size));
        ys.push_back(std::log(err));
    }
    const Ols line = ols_line(xs, ys);
    RateFit fit;
    fit.points = std::move(points);
    fit.slope = line.slope;
    fit.slope_se = line.slope_se;
    fit.r2 = line.r2;
    fit.replicates = replicates;
    fit.worst_case = worst_case;
    return fit;
}

nlohmann::json fit_to_json(const std::string& metric, const RateFit& fit, int replicates) {
    nlohmann::json j;
    j["metric"] = metric;
    j["slope"] = fit.slope;
    j["slope_se"] = fit.slope_se;
    j["r2"] = fit.r2;
    j["rungs"] = fit.points.size();
    j["replicates"] = replicates;
    if (fit.worst_case) {
        j["worst_case"] = true;
        j["heuristic"] = true;
    }
    return j;
}

}  // namespace

std::string metric_name(const ErrorMetric& m) {
    switch (m.kind) {
        case ErrorMetric::Kind::Wasserstein:
            return "w" + std::string(fmt_compact(m.r));
        case ErrorMetric::Kind::DN:
            return "d_n";
        case ErrorMetric::Kind::Atom:
            return "atom";
        default:
            return "weight";
    }
}

ErrorMetric metric_from_name(const std::string& name) {
    if (name == "d_n") return {ErrorMetric::Kind::DN, 0.0};
    if (name == "atom") return {ErrorMetric::Kind::Atom, 0.0};
    if (name == "weight") return {ErrorMetric::Kind::Weight, 0.0};
    if (name.size() >= 2 && name[0] == 'w') {
        size_t used = 0;
        double r = 0.0;
        try {
            r = std::stod(name.substr(1), &used);
        } catch (const std::exception&) {
            throw InvalidArgument("metric: cannot parse order in '" + name + "'");
        }
        if (used + 1 != name.size() || !(r >= 1.0) || !std::isfinite(r))
            throw InvalidArgument("metric: Wasserstein order must be a number >= 1 in '" + name +
                                  "'");
        return {ErrorMetric::Kind::Wasserstein, r};
    }
    throw InvalidArgument("metric: unknown name '" + name + "'");
}

void ExperimentConfig::validate() const {
    const ExperimentConfig cfg = normalized(*this);
    if (cfg.scenario.empty()) throw InvalidArgument("experiment: scenario name is empty");
    cfg.kernel.validate();
    cfg.truth.validate();
    if (cfg.truth.dim() != cfg.kernel.param_dim())
        throw InvalidArgument("experiment: truth atoms do not match the kernel parameter space");
    for (const auto& atom : cfg.truth.atoms)
        if (!cfg.kernel.theta.contains(atom, 1e-12))
            throw InvalidArgument("experiment: truth atom outside the parameter box");
    if (!known_estimator(cfg.estimator))
        throw InvalidArgument("experiment: unknown estimator '" + cfg.estimator + "'");
    cfg.estimator_config.validate();
    if (cfg.estimator_config.theta.dim() != cfg.kernel.param_dim())
        throw InvalidArgument("experiment: estimator box does not match the kernel");
    if (cfg.metrics.empty()) throw InvalidArgument("experiment: no error metrics");
    if (cfg.ladder.empty()) throw InvalidArgument("experiment: empty ladder");
    const bool product = cfg.ladder.front().product();
    long prev = 0;
    for (const auto& rung : cfg.ladder) {
        if (rung.product() != product)
            throw InvalidArgument("experiment: ladder mixes i.i.d. and product rungs");
        if (rung.product()) {
            if (rung.m <= 0 || rung.N < 1)
                throw InvalidArgument("experiment: product rung needs m > 0 and N >= 1");
        } else if (rung.n <= 0) {
            throw InvalidArgument("experiment: rung needs n > 0");
        }
        if (rung.total() <= prev)
            throw InvalidArgument("experiment: ladder must be strictly increasing");
        prev = rung.total();
    }
    if (product && cfg.estimator != "em")
        throw InvalidArgument("experiment: product rungs are fit by the em estimator only");
    if (cfg.replicates < 1) throw InvalidArgument("experiment: replicates must be >= 1");
    for (const auto& m : cfg.metrics) {
        if (m.kind == ErrorMetric::Kind::Wasserstein && !(m.r >= 1.0 && std::isfinite(m.r)))
            throw InvalidArgument("experiment: Wasserstein order must be >= 1");
        const bool matched = m.kind != ErrorMetric::Kind::Wasserstein;
        if (matched && cfg.estimator_config.k != cfg.truth.k())
            throw InvalidArgument(
                "experiment: matched metrics need the atom budget to equal the true atom count");
    }
    if (cfg.estimator == "mmd" && cfg.kernel.family != Family::GaussianLocation)
        throw InvalidArgument("experiment: mmd estimation needs a gaussian-location kernel");
    if (cfg.estimator == "gmm" &&
        (cfg.kernel.family != Family::GaussianLocation || cfg.kernel.param_dim() != 1))
        throw InvalidArgument("experiment: gmm estimation needs the 1-D gaussian-location kernel");
    if (cfg.estimator == "em" && cfg.kernel.family != Family::GaussianLocation &&
        cfg.kernel.family != Family::Gamma && cfg.kernel.family != Family::Bernoulli)
        throw InvalidArgument("experiment: em supports gaussian-location, gamma, bernoulli");
    if (cfg.local_worst_case && !(resolve_worst_case_radius(cfg) > 0.0))
        throw InvalidArgument(
            "experiment: worst-case variant needs local_radius > 0 (or >= 2 separated atoms)");
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& rung_means) {
    if (static_cast<int>(rung_means.size()) < kMinFitRungs)
        throw InvalidArgument("fit_rate: need at least 4 rungs");
    std::vector<RatePoint> points;
    points.reserve(rung_means.size());
    for (const auto& [size, err] : rung_means) points.push_back({size, err, 0.0, err});
    return fit_from_points(std::move(points), false, 0);
}

ExperimentResult run_experiment(const ExperimentConfig& raw) {
    const ExperimentConfig cfg = normalized(raw);
    cfg.validate();

    ExperimentResult res;
    res.config = cfg;
    const int nm = static_cast<int>(cfg.metrics.size());
    const double radius = cfg.local_worst_case ? resolve_worst_case_radius(cfg) : 0.0;
    std::map<std::string, std::vector<RatePoint>> points;

    for (const Rung& rung : cfg.ladder) {
        std::vector<ReplicateRow> rows(static_cast<size_t>(cfg.replicates) * nm);
        parallel_for(cfg.replicates, [&](int rep) {
            const std::uint64_t seed = derive_seed(
                cfg.master_seed,
                {hash_string(cfg.scenario), static_cast<std::uint64_t>(rung.n),
                 static_cast<std::uint64_t>(rung.m), static_cast<std::uint64_t>(rung.N),
                 static_cast<std::uint64_t>(rep)});
            Rng rng(seed);
            const auto t0 = std::chrono::steady_clock::now();
            Vec values(nm, kNan);
            double objective = kNan;
            bool failed = false;
            try {
                const MixingMeasure gen = cfg.local_worst_case
                                              ? perturb_truth(cfg.truth, radius, cfg.kernel.theta, rng)
                                              : cfg.truth;
                const FitOutcome fit = fit_one(cfg, rung, gen, rng);
                objective = fit.objective;
                for (int j = 0; j < nm; ++j)
                    values[j] = score(cfg.metrics[j], fit.estimate, gen, rung);
            } catch (const RuntimeFailure&) {
                failed = true;
                objective = kNan;
                std::fill(values.begin(), values.end(), kNan);
            }
            const double ms =
                cfg.timings
                    ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                t0)
                          .count()
                    : 0.0;
            for (int j = 0; j < nm; ++j) {
                ReplicateRow& row = rows[static_cast<size_t>(rep) * nm + j];
                row.rung_n = rung.n;
                row.rung_m = rung.m;
                row.rung_N = rung.N;
                row.replicate = rep;
                row.seed = seed;
                row.metric = metric_name(cfg.metrics[j]);
                row.value = values[j];
                row.objective = objective;
                row.wallclock_ms = ms;
                row.failed = failed;
            }
        });

        int rung_failed = 0;
        for (int j = 0; j < nm; ++j) {
            double sum = 0.0, sumsq = 0.0, maxv = 0.0;
            int used = 0;
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                const ReplicateRow& row = rows[static_cast<size_t>(rep) * nm + j];
                if (row.failed) continue;
                sum += row.value;
                sumsq += sqr(row.value);
                maxv = std::max(maxv, row.value);
                ++used;
            }
            const double mean = used > 0 ? sum / used : kNan;
            const double var = used > 1 ? std::max(0.0, (sumsq - used * sqr(mean)) / (used - 1))
                                        : 0.0;
            points[metric_name(cfg.metrics[j])].push_back(
                {static_cast<double>(rung.total()), mean,
                 used > 1 ? std::sqrt(var / used) : 0.0, used > 0 ? maxv : kNan});
        }
        for (int rep = 0; rep < cfg.replicates; ++rep)
            if (rows[static_cast<size_t>(rep) * nm].failed) ++rung_failed;
        res.failed_rows += rung_failed * nm;
        res.max_rung_failure_rate = std::max(
            res.max_rung_failure_rate, static_cast<double>(rung_failed) / cfg.replicates);
        res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    }
    res.excess_failures = res.max_rung_failure_rate > kMaxFailureRate;

    if (cfg.replicates >= kMinFitReplicates &&
        static_cast<int>(cfg.ladder.size()) >= kMinFitRungs) {
        for (auto& [name, pts] : points) {
            bool usable = true;
            for (const auto& p : pts) {
                const double err = cfg.local_worst_case ? p.max_error : p.mean_error;
                if (!std::isfinite(err) || !(err > 0.0)) usable = false;
            }
            if (usable)
                res.fits.emplace(name,
                                 fit_from_points(pts, cfg.local_worst_case, cfg.replicates));
        }
    }
    return res;
}

ReplicateOutcome run_replicate(const ExperimentConfig& raw, int rung_index, int replicate) {
    const ExperimentConfig cfg = normalized(raw);
    cfg.validate();
    if (rung_index < 0 || rung_index >= static_cast<int>(cfg.ladder.size()))
        throw InvalidArgument("replicate: rung index out of range");
    if (replicate < 0) throw InvalidArgument("replicate: replicate index must be >= 0");
    const Rung rung = cfg.ladder[static_cast<size_t>(rung_index)];

    ReplicateOutcome out;
    out.rung = rung;
    out.seed = derive_seed(cfg.master_seed,
                           {hash_string(cfg.scenario), static_cast<std::uint64_t>(rung.n),
                            static_cast<std::uint64_t>(rung.m), static_cast<std::uint64_t>(rung.N),
                            static_cast<std::uint64_t>(replicate)});
    Rng rng(out.seed);
    out.generating =
        cfg.local_worst_case
            ? perturb_truth(cfg.truth, resolve_worst_case_radius(cfg), cfg.kernel.theta, rng)
            : cfg.truth;
    const FitOutcome fit = fit_one(cfg, rung, out.generating, rng);
    out.estimate = fit.estimate;
    out.objective = fit.objective;
    for (const auto& m : cfg.metrics)
        out.scores.emplace_back(metric_name(m), score(m, out.estimate, out.generating, rung));
    return out;
}

void write_csv(const ExperimentResult& res, std::ostream& out) {
    out << "scenario,rung_n,rung_m,rung_N,replicate,seed,error_metric,error_value,"
           "estimator_objective,wallclock_ms,failed\n";
    for (const auto& row : res.rows) {
        out << res.config.scenario << ',' << row.rung_n << ',' << row.rung_m << ',' << row.rung_N
            << ',' << row.replicate << ',' << row.seed << ',' << row.metric << ','
            << fmt_double(row.value) << ',' << fmt_double(row.objective) << ','
            << fmt_double(row.wallclock_ms) << ',' << (row.failed ? 1 : 0) << '\n';
    }
}

std::string result_csv(const ExperimentResult& res) {
    std::ostringstream out;
    write_csv(res, out);
    return out.str();
}

std::string summary_json(const ExperimentResult& res) {
    nlohmann::json j;
    j["scenario"] = res.config.scenario;
    j["estimator"] = res.config.estimator;
    j["replicates"] = res.config.replicates;
    j["rungs"] = res.config.ladder.size();
    j["master_seed"] = res.config.master_seed;
    j["failed_rows"] = res.failed_rows;
    j["max_rung_failure_rate"] = res.max_rung_failure_rate;
    j["excess_failures"] = res.excess_failures;
    if (res.config.local_worst_case) {
        j["local_worst_case"] = true;
        j["heuristic"] = true;
    }
    nlohmann::json fits = nlohmann::json::object();
    for (const auto& [name, fit] : res.fits) fits[name] = fit_to_json(name, fit, fit.replicates);
    j["fits"] = std::move(fits);
    nlohmann::json points = nlohmann::json::object();
    std::map<std::string, std::vector<RatePoint>> per_metric;
    for (const auto& row : res.rows) per_metric[row.metric];  // stable key order
    // Recover per-rung aggregates from the rows so summaries exist even when
    // no fit was eligible.
    for (auto& [name, pts] : per_metric) {
        for (size_t start = 0; start < res.rows.size();
             start += static_cast<size_t>(res.config.replicates) * res.config.metrics.size()) {
            double sum = 0.0, sumsq = 0.0, maxv = 0.0;
            int used = 0;
            const size_t block =
                static_cast<size_t>(res.config.replicates) * res.config.metrics.size();
            for (size_t i = start; i < std::min(start + block, res.rows.size()); ++i) {
                const auto& row = res.rows[i];
                if (row.metric != name || row.failed) continue;
                sum += row.value;
                sumsq += sqr(row.value);
                maxv = std::max(maxv, row.value);
                ++used;
            }
            const double mean = used > 0 ? sum / used : kNan;
            const double var =
                used > 1 ? std::max(0.0, (sumsq - used * sqr(mean)) / (used - 1)) : 0.0;
            pts.push_back({res.rows.empty() ? 0.0
                                            : static_cast<double>(Rung{res.rows[start].rung_n,
                                                                       res.rows[start].rung_m,
                                                                       res.rows[start].rung_N}
                                                                      .total()),
                           mean, used > 1 ? std::sqrt(var / used) : 0.0,
                           used > 0 ? maxv : kNan});
        }
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : pts) {
            nlohmann::json q;
            q["size"] = p.size;
            q["mean_error"] = p.mean_error;
            q["std_error"] = p.std_error;
            q["max_error"] = p.max_error;
            arr.push_back(std::move(q));
        }
        points[name] = std::move(arr);
    }
    j["points"] = std::move(points);
    return j.dump(2) + "\n";
}

nlohmann::json box_to_json(const Box& box) {
    return nlohmann::json{{"lo", box.lo}, {"hi", box.hi}};
}

Box box_from_json(const nlohmann::json& j) {
    reject_unknown_fields(j, {"lo", "hi"}, "box");
    Box box;
    box.lo = j.at("lo").get<Vec>();
    box.hi = j.at("hi").get<Vec>();
    return box;
}

void reject_unknown_fields(const nlohmann::json& j,
                           std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* name : allowed)
            if (key == name) ok = true;
        if (!ok) throw InvalidArgument("config: unknown field '" + key + "' in " + where);
    }
}

KernelModel kernel_from_json(const nlohmann::json& j) {
    reject_unknown_fields(j, {"family", "theta", "sigma"}, "kernel");
    const Family family = family_from_name(j.at("family").get<std::string>());
    if (family == Family::Bernoulli) return bernoulli_kernel();
    const Box box = box_from_json(j.at("theta"));
    switch (family) {
        case Family::GaussianLocation: {
            std::vector<Vec> sigma;
            if (j.contains("sigma")) sigma = j.at("sigma").get<std::vector<Vec>>();
            return gaussian_location(box, std::move(sigma));
        }
        case Family::GaussianLocationScale:
            return gaussian_location_scale(box);
        case Family::Gamma:
            return gamma_kernel(box);
        default:
            return skew_normal_kernel(box);
    }
}

nlohmann::json kernel_to_json(const KernelModel& k) {
    nlohmann::json j;
    j["family"] = family_name(k.family);
    j["theta"] = box_to_json(k.theta);
    if (k.family == Family::GaussianLocation) j["sigma"] = k.sigma;
    return j;
}

nlohmann::json measure_to_json(const MixingMeasure& g) {
    return nlohmann::json{{"atoms", g.atoms}, {"weights", g.weights}};
}

MixingMeasure measure_from_json(const nlohmann::json& j) {
    reject_unknown_fields(j, {"atoms", "weights"}, "measure");
    return make_measure(j.at("atoms").get<std::vector<Vec>>(), j.at("weights").get<Vec>());
}

ExperimentConfig experiment_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
    }
    try {
        reject_unknown_fields(j,
                              {"scenario", "kernel", "truth", "estimator", "estimator_config",
                               "metrics", "ladder", "replicates", "master_seed", "mmd_gamma",
                               "gmm_center", "timings", "local_worst_case", "local_radius"},
                              "experiment");
        ExperimentConfig cfg;
        cfg.scenario = j.at("scenario").get<std::string>();
        cfg.kernel = kernel_from_json(j.at("kernel"));
        cfg.truth = measure_from_json(j.at("truth"));
        cfg.estimator = j.at("estimator").get<std::string>();
        if (j.contains("estimator_config")) {
            const auto& ec = j.at("estimator_config");
            reject_unknown_fields(ec,
                                  {"k", "theta", "multistart", "max_iter", "tol", "weight_floor"},
                                  "estimator_config");
            cfg.estimator_config.k = ec.value("k", 1);
            if (ec.contains("theta")) cfg.estimator_config.theta = box_from_json(ec.at("theta"));
            cfg.estimator_config.multistart = ec.value("multistart", 16);
            cfg.estimator_config.max_iter = ec.value("max_iter", 400);
            cfg.estimator_config.tol = ec.value("tol", 1e-10);
            cfg.estimator_config.weight_floor = ec.value("weight_floor", 0.0);
        }
        for (const auto& name : j.at("metrics").get<std::vector<std::string>>())
            cfg.metrics.push_back(metric_from_name(name));
        for (const auto& rj : j.at("ladder")) {
            reject_unknown_fields(rj, {"n", "m", "N"}, "ladder");
            Rung rung;
            rung.n = rj.value("n", 0L);
            rung.m = rj.value("m", 0L);
            rung.N = rj.value("N", rung.m > 0 ? 1 : 0);
            cfg.ladder.push_back(rung);
        }
        cfg.replicates = j.value("replicates", 30);
        cfg.master_seed = j.value("master_seed", std::uint64_t{0});
        cfg.mmd_gamma = j.value("mmd_gamma", 0.0);
        cfg.gmm_center = j.value("gmm_center", 0.0);
        cfg.timings = j.value("timings", false);
        cfg.local_worst_case = j.value("local_worst_case", false);
        cfg.local_radius = j.value("local_radius", 0.0);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
}

std::string experiment_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = cfg.scenario;
    j["kernel"] = kernel_to_json(cfg.kernel);
    j["truth"] = measure_to_json(cfg.truth);
    j["estimator"] = cfg.estimator;
    j["estimator_config"] = {{"k", cfg.estimator_config.k},
                             {"theta", box_to_json(cfg.estimator_config.theta)},
                             {"multistart", cfg.estimator_config.multistart},
                             {"max_iter", cfg.estimator_config.max_iter},
                             {"tol", cfg.estimator_config.tol},
                             {"weight_floor", cfg.estimator_config.weight_floor}};
    std::vector<std::string> metric_names;
    for (const auto& m : cfg.metrics) metric_names.push_back(metric_name(m));
    j["metrics"] = metric_names;
    nlohmann::json ladder = nlohmann::json::array();
    for (const auto& rung : cfg.ladder) {
        if (rung.product())
            ladder.push_back({{"m", rung.m}, {"N", rung.N}});
        else
            ladder.push_back({{"n", rung.n}});
    }
    j["ladder"] = std::move(ladder);
    j["replicates"] = cfg.replicates;
    j["master_seed"] = cfg.master_seed;
    j["mmd_gamma"] = cfg.mmd_gamma;
    j["gmm_center"] = cfg.gmm_center;
    j["timings"] = cfg.timings;
    j["local_worst_case"] = cfg.local_worst_case;
    j["local_radius"] = cfg.local_radius;
    return j.dump(2) + "\n";
}

ExperimentConfig scaled_config(const ExperimentConfig& cfg, double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("scale must be positive");
    if (scale >= 1.0) return cfg;
    ExperimentConfig out = cfg;
    out.replicates = std::max(2, static_cast<int>(std::lround(scale * cfg.replicates)));
    long max_total = 0;
    for (const auto& rung : cfg.ladder) max_total = std::max(max_total, rung.total());
    const double cutoff = scale * static_cast<double>(max_total);
    out.ladder.clear();
    for (const auto& rung : cfg.ladder)
        if (static_cast<double>(rung.total()) <= cutoff) out.ladder.push_back(rung);
    if (out.ladder.empty()) out.ladder.push_back(cfg.ladder.front());
    return out;
}

}  // namespace mixot
