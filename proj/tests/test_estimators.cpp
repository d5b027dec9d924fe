#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixot/estimators.hpp"
#include "mixot/phi.hpp"
#include "mixot/rng.hpp"
#include "mixot/transport.hpp"

using namespace mixot;

namespace {

KernelModel gauss1d(double var = 1.0, double half_width = 8.0) {
    return gaussian_location(Box{{-half_width}, {half_width}}, {{var}});
}

std::vector<double> scalars(const std::vector<Vec>& data) {
    std::vector<double> xs;
    for (const auto& x : data) xs.push_back(x[0]);
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace

TEST_CASE("ks objective equals the brute-force sup over a fine grid") {
    Rng rng(7);
    const auto k = gauss1d();
    const auto g = make_measure_1d({-1.0, 1.5}, {0.4, 0.6});
    const MixtureModel model{k, g};
    const auto data = sample_data(model, 200, rng);
    const auto xs = scalars(data);
    const double exact = ks_objective(model, xs);

    // Dense scan: the empirical CDF is piecewise constant, so the sup of
    // |F - Fhat| over any grid is a lower bound that approaches the exact
    // breakpoint value.
    double scanned = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -6.0 + 12.0 * i / 200000.0;
        const double fhat =
            double(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) / xs.size();
        scanned = std::max(scanned, std::abs(mixture_cdf(model, x) - fhat));
    }
    CHECK(scanned <= exact + 1e-12);
    CHECK(exact - scanned <= 1e-4);
}

TEST_CASE("min-ks estimate: single-component data recovers the atom") {
    Rng rng(11);
    const auto k = gauss1d();
    const MixtureModel truth{k, dirac({1.3})};
    const auto data = sample_data(truth, 4000, rng);

    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = k.theta;
    cfg.multistart = 8;
    cfg.seed = 1;
    const auto res = min_ks_estimate(data, k, cfg);
    CHECK(res.estimate.k() == 1);
    CHECK(std::abs(res.estimate.atoms[0][0] - 1.3) <= 5.0 / std::sqrt(4000.0));

    // Argmin contract: no worse than the truth on the empirical objective.
    const auto xs = scalars(data);
    CHECK(res.objective <= ks_objective(truth, xs) + 1e-9);
}

TEST_CASE("min-ks estimate with k=1 matches a golden-section search") {
    Rng rng(13);
    const auto k = gauss1d();
    const auto data = sample_data({k, dirac({-0.7})}, 500, rng);
    const auto xs = scalars(data);

    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = k.theta;
    cfg.multistart = 8;
    cfg.seed = 2;
    const auto res = min_ks_estimate(data, k, cfg);

    const double golden = golden_section(
        [&](double t) {
            return ks_objective({k, dirac({t})}, xs);
        },
        -8.0, 8.0, 1e-10);
    CHECK(std::abs(res.estimate.atoms[0][0] - golden) <= 1e-6);
}

TEST_CASE("min-ks estimate: two-component argmin contract and recovery") {
    Rng rng(17);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-2.0, 2.0}, {0.35, 0.65});
    const MixtureModel truth{k, g0};
    const auto data = sample_data(truth, 2000, rng);
    const auto xs = scalars(data);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 12;
    cfg.seed = 3;
    const auto res = min_ks_estimate(data, k, cfg);
    CHECK(res.objective <= ks_objective(truth, xs) + 1e-9);
    CHECK(wasserstein(res.estimate.canonicalized(), g0, 1).value <= 0.35);
}

TEST_CASE("min-ks estimate honours a weight floor") {
    Rng rng(19);
    const auto k = gauss1d();
    const auto data = sample_data({k, dirac({0.5})}, 300, rng);
    EstimatorConfig cfg;
    cfg.k = 3;
    cfg.theta = k.theta;
    cfg.multistart = 4;
    cfg.max_iter = 150;
    cfg.weight_floor = 0.05;
    cfg.seed = 4;
    const auto res = min_ks_estimate(data, k, cfg);
    for (double w : res.estimate.weights) CHECK(w >= 0.05 - 1e-12);
}

TEST_CASE("min-ks estimate: rectangular CDF variant in 2-D") {
    Rng rng(23);
    const auto k = gaussian_location(Box{{-6, -6}, {6, 6}}, {{1.0, 0.0}, {0.0, 1.0}});
    const MixtureModel truth{k, dirac({1.0, -0.5})};
    const auto data = sample_data(truth, 200, rng);

    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = k.theta;
    cfg.multistart = 4;
    cfg.max_iter = 150;
    cfg.seed = 5;
    const auto res = min_ks_estimate(data, k, cfg);
    CHECK(euclidean(res.estimate.atoms[0], {1.0, -0.5}) <= 0.4);
    CHECK(res.objective <= ks_objective_rect(truth, data) + 1e-9);
}

TEST_CASE("ks estimator rejects bad input") {
    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = gauss1d().theta;
    CHECK_THROWS_AS((void)min_ks_estimate({}, gauss1d(), cfg), InvalidArgument);
    EstimatorConfig bad = cfg;
    bad.k = 0;
    CHECK_THROWS_AS((void)min_ks_estimate({{0.0}}, gauss1d(), bad), InvalidArgument);
}

TEST_CASE("min-mmd estimate: single-component data recovers the atom") {
    Rng rng(29);
    const auto k = gauss1d();
    const MixtureModel truth{k, dirac({0.9})};
    const auto data = sample_data(truth, 2000, rng);

    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = k.theta;
    cfg.multistart = 6;
    cfg.max_iter = 200;
    cfg.seed = 6;
    const auto res = min_mmd_estimate(data, k, 1.0, cfg);
    CHECK(std::abs(res.estimate.atoms[0][0] - 0.9) <= 5.0 / std::sqrt(2000.0));
    CHECK(res.objective <= mmd_objective(k, dirac({0.9}), data, 1.0) + 1e-9);
}

TEST_CASE("min-mmd estimate: two components, argmin contract, simplex weights") {
    Rng rng(31);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-1.5, 1.5}, {0.3, 0.7});
    const auto data = sample_data({k, g0}, 1500, rng);
    const double gamma = mmd_median_bandwidth(data);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 8;
    cfg.max_iter = 300;
    cfg.seed = 7;
    const auto res = min_mmd_estimate(data, k, gamma, cfg);
    CHECK(res.objective <= mmd_objective(k, g0, data, gamma) + 1e-9);
    double total = 0.0;
    for (double w : res.estimate.weights) {
        CHECK(w >= -1e-12);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(wasserstein(res.estimate.canonicalized(), g0, 1).value <= 0.4);
}

TEST_CASE("mmd estimator rejects non-positive bandwidths and wrong kernels") {
    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = gauss1d().theta;
    CHECK_THROWS_AS((void)min_mmd_estimate({{0.0}}, gauss1d(), 0.0, cfg), InvalidArgument);
    const auto gk = gamma_kernel(Box{{0.1, 0.1}, {10, 10}});
    EstimatorConfig gcfg;
    gcfg.k = 1;
    gcfg.theta = gk.theta;
    CHECK_THROWS_AS((void)min_mmd_estimate({{1.0}}, gk, 1.0, gcfg), InvalidArgument);
}

TEST_CASE("moment estimator: empirical statistics of centred data vanish") {
    Rng rng(37);
    const auto k = gauss1d();
    const auto data = sample_data({k, dirac({0.0})}, 50000, rng);
    const auto rows = gmm_statistic_coeffs(3, 1.0, 0.0);
    for (int j = 1; j <= 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (const auto& x : data) {
            const double t = gmm_statistic_eval(rows[j - 1], 0.0, x[0]);
            mean += t;
            var += t * t;
        }
        mean /= data.size();
        var = var / data.size() - mean * mean;
        CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / data.size()));
    }
}

TEST_CASE("moment estimator: noiseless moments recover the planted measure") {
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-1.0, 0.8}, {0.3, 0.7});
    Vec moments;
    for (int j = 1; j <= 3; ++j) {
        double m = 0.0;
        for (int i = 0; i < g0.k(); ++i)
            m += g0.weights[i] * std::pow(g0.atoms[i][0], j);
        moments.push_back(m);
    }
    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 16;
    cfg.seed = 8;
    const auto res = gmm_estimate_from_moments(moments, k, cfg);
    CHECK(res.objective <= 1e-10);
    CHECK(wasserstein(res.estimate.canonicalized(), g0, 1).value <= 1e-6);
}

TEST_CASE("moment estimator on sampled data: argmin contract") {
    Rng rng(41);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-1.0, 1.0}, {0.5, 0.5});
    const auto data = sample_data({k, g0}, 5000, rng);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 12;
    cfg.seed = 9;
    const auto res = gmm_estimate(data, k, cfg);

    const auto rows = gmm_statistic_coeffs(3, 1.0, 0.0);
    Vec tbar(3, 0.0);
    for (const auto& x : data)
        for (int j = 0; j < 3; ++j) tbar[j] += gmm_statistic_eval(rows[j], 0.0, x[0]);
    for (double& t : tbar) t /= data.size();
    CHECK(res.objective <= gmm_objective(g0, tbar, 0.0) + 1e-9);
    CHECK(wasserstein(res.estimate.canonicalized(), g0, 1).value <= 0.3);
}

TEST_CASE("moment estimator rejects unsupported kernels") {
    const auto gk = gamma_kernel(Box{{0.1, 0.1}, {10, 10}});
    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = gk.theta;
    CHECK_THROWS_AS((void)gmm_estimate({{1.0}}, gk, cfg), InvalidArgument);
}

TEST_CASE("em with one gaussian component returns the sample mean") {
    Rng rng(43);
    const auto k = gauss1d();
    const auto data = sample_data({k, dirac({0.4})}, 500, rng);
    double mean = 0.0;
    for (const auto& x : data) mean += x[0];
    mean /= data.size();

    EstimatorConfig cfg;
    cfg.k = 1;
    cfg.theta = k.theta;
    cfg.multistart = 2;
    cfg.seed = 10;
    const auto res = em_estimate(data, k, cfg);
    CHECK(res.estimate.atoms[0][0] == doctest::Approx(mean).epsilon(1e-10));
    CHECK(res.estimate.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("em log-likelihood trace is non-decreasing") {
    Rng rng(47);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-2.0, 2.0}, {0.5, 0.5});
    const auto data = sample_data({k, g0}, 800, rng);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 4;
    cfg.seed = 11;
    cfg.record_trace = true;
    const auto res = em_estimate(data, k, cfg);
    REQUIRE(res.loglik_trace.size() >= 2);
    for (size_t i = 1; i < res.loglik_trace.size(); ++i)
        CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-9);
    CHECK(res.objective == doctest::Approx(-res.loglik_trace.back() / 800.0));
}

TEST_CASE("em recovers a separated gaussian mixture") {
    Rng rng(53);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-3.0, 3.0}, {0.3, 0.7});
    const auto data = sample_data({k, g0}, 3000, rng);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 8;
    cfg.seed = 12;
    const auto res = em_estimate(data, k, cfg);
    CHECK(wasserstein(res.estimate.canonicalized(), g0, 1).value <= 0.15);
}

TEST_CASE("em gamma mixture: positive data, atoms stay in the box") {
    Rng rng(59);
    const auto gk = gamma_kernel(Box{{0.2, 0.2}, {40, 40}});
    const auto g0 = MixingMeasure{{{2.0, 2.0}, {16.0, 2.0}}, {0.5, 0.5}};
    const auto data = sample_data({gk, g0}, 3000, rng);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = gk.theta;
    cfg.multistart = 8;
    cfg.max_iter = 300;
    cfg.seed = 13;
    const auto res = em_estimate(data, gk, cfg);
    for (const auto& a : res.estimate.atoms) CHECK(gk.theta.contains(a));
    // Component means 1.0 and 8.0 are well separated; EM should find both.
    std::vector<double> means;
    for (const auto& a : res.estimate.atoms) means.push_back(a[0] / a[1]);
    std::sort(means.begin(), means.end());
    CHECK(std::abs(means[0] - 1.0) <= 0.25);
    CHECK(std::abs(means[1] - 8.0) <= 0.6);
    CHECK_THROWS_AS((void)em_estimate({{-1.0}}, gk, cfg), InvalidArgument);
}

TEST_CASE("product em recovers a planted bernoulli mixture") {
    Rng rng(61);
    const auto bk = bernoulli_kernel();
    const auto g0 = make_measure_1d({0.25, 0.7}, {0.4, 0.6});
    const ProductMixtureModel truth{bk, g0, 20};
    const auto seqs = sample_sequences(truth, 2000, rng);

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = bk.theta;
    cfg.multistart = 8;
    cfg.seed = 14;
    const auto res = em_estimate_product(seqs, bk, cfg);
    auto est = res.estimate.canonicalized();
    REQUIRE(est.k() == 2);
    if (est.atoms[0][0] > est.atoms[1][0]) {
        std::swap(est.atoms[0], est.atoms[1]);
        std::swap(est.weights[0], est.weights[1]);
    }
    CHECK(std::abs(est.atoms[0][0] - 0.25) <= 0.05);
    CHECK(std::abs(est.atoms[1][0] - 0.7) <= 0.05);
    CHECK(std::abs(est.weights[0] - 0.4) <= 0.05);

    // Argmin-style contract on the likelihood: EM is no worse than the truth.
    CHECK(-res.objective >= mean_loglik_product(truth, seqs) - 1e-9);
}

TEST_CASE("estimators are insensitive to permuting the data") {
    Rng rng(67);
    const auto k = gauss1d();
    const auto g0 = make_measure_1d({-2.5, 2.5}, {0.5, 0.5});
    auto data = sample_data({k, g0}, 1200, rng);
    auto reversed = data;
    std::reverse(reversed.begin(), reversed.end());

    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 6;
    cfg.max_iter = 300;
    cfg.seed = 15;

    const auto ks1 = min_ks_estimate(data, k, cfg);
    const auto ks2 = min_ks_estimate(reversed, k, cfg);
    CHECK(wasserstein(ks1.estimate, ks2.estimate, 1).value <= 1e-8);

    const auto mmd1 = min_mmd_estimate(data, k, 0.7, cfg);
    const auto mmd2 = min_mmd_estimate(reversed, k, 0.7, cfg);
    CHECK(wasserstein(mmd1.estimate, mmd2.estimate, 1).value <= 1e-4);

    const auto gmm1 = gmm_estimate(data, k, cfg);
    const auto gmm2 = gmm_estimate(reversed, k, cfg);
    CHECK(wasserstein(gmm1.estimate, gmm2.estimate, 1).value <= 1e-4);

    const auto em1 = em_estimate(data, k, cfg);
    const auto em2 = em_estimate(reversed, k, cfg);
    CHECK(wasserstein(em1.estimate.canonicalized(), em2.estimate.canonicalized(), 1)
              .value <= 1e-3);
}

TEST_CASE("multistart stability: repeated seeds give identical estimates") {
    Rng rng(71);
    const auto k = gauss1d();
    const auto data = sample_data({k, make_measure_1d({-1.0, 1.0}, {0.5, 0.5})}, 400, rng);
    EstimatorConfig cfg;
    cfg.k = 2;
    cfg.theta = k.theta;
    cfg.multistart = 6;
    cfg.max_iter = 200;
    cfg.seed = 16;
    const auto a = min_ks_estimate(data, k, cfg);
    const auto b = min_ks_estimate(data, k, cfg);
    CHECK(a.objective == b.objective);
    CHECK(a.estimate.atoms == b.estimate.atoms);
    CHECK(a.estimate.weights == b.estimate.weights);
    const auto ma = min_mmd_estimate(data, k, 1.0, cfg);
    const auto mb = min_mmd_estimate(data, k, 1.0, cfg);
    CHECK(ma.estimate.atoms == mb.estimate.atoms);
    const auto ea = em_estimate(data, k, cfg);
    const auto eb = em_estimate(data, k, cfg);
    CHECK(ea.estimate.atoms == eb.estimate.atoms);
}
