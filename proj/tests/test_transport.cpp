#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixot/rng.hpp"
#include "mixot/transport.hpp"

using namespace mixot;

namespace {

MixingMeasure random_measure(Rng& rng, int k, int q, double span = 4.0) {
    std::vector<Vec> atoms;
    Vec w;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        Vec a(q);
        for (int d = 0; d < q; ++d) a[d] = rng.uniform(-span, span);
        atoms.push_back(a);
        const double wi = rng.uniform(0.05, 1.0);
        w.push_back(wi);
        total += wi;
    }
    for (double& wi : w) wi /= total;
    // Nudge the last weight so the sum is exactly 1 within the invariant.
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += w[i];
    w[k - 1] = 1.0 - s;
    return make_measure(std::move(atoms), std::move(w));
}

MixingMeasure random_equal_weight(Rng& rng, int k, int q, double span = 4.0) {
    std::vector<Vec> atoms;
    for (int i = 0; i < k; ++i) {
        Vec a(q);
        for (int d = 0; d < q; ++d) a[d] = rng.uniform(-span, span);
        atoms.push_back(a);
    }
    Vec w(k, 1.0 / k);
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += w[i];
    w[k - 1] = 1.0 - s;
    return make_measure(std::move(atoms), std::move(w));
}

}  // namespace

TEST_CASE("single-atom transport is the forced coupling") {
    const auto g = dirac({0.0});
    const auto h = dirac({1.0});
    CHECK(wasserstein_value(g, h, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wasserstein_value(g, g, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("self distance is zero for arbitrary measures") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto g = random_measure(rng, 1 + rep % 5, 1 + rep % 3);
        for (double r : {1.0, 2.0, 3.0})
            CHECK(wasserstein_value(g, g, r) <= 1e-9);
    }
}

TEST_CASE("two atoms against one: hand-enumerated coupling") {
    const auto g = make_measure_1d({0.0, 2.0}, {0.5, 0.5});
    const auto h = dirac({1.0});
    const auto res = wasserstein(g, h, 1.0);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
    res.plan.validate();
    CHECK(res.plan.flow(0, 0) == doctest::Approx(0.5));
    CHECK(res.plan.flow(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("plan invariants hold on random instances") {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = random_measure(rng, 2 + rep % 6, 2);
        const auto h = random_measure(rng, 2 + (rep + 3) % 6, 2);
        const auto res = wasserstein(g, h, 2.0);
        res.plan.validate(1e-9);
        double cost = 0.0;
        for (int i = 0; i < g.k(); ++i)
            for (int j = 0; j < h.k(); ++j)
                cost += res.plan.flow(i, j) * std::pow(euclidean(g.atoms[i], h.atoms[j]), 2.0);
        CHECK(cost == doctest::Approx(res.plan.total_cost).epsilon(1e-9));
    }
}

TEST_CASE("brute-force permutation oracle: trivial cases") {
    const auto g = make_measure_1d({0.0, 1.0}, {0.5, 0.5});
    const auto h = make_measure_1d({1.0, 0.0}, {0.5, 0.5});
    CHECK(wasserstein_equal_weight_bruteforce(g, h, 1.0) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const auto g2 = make_measure_1d({0.0, 2.0}, {0.5, 0.5});
    const auto h2 = make_measure_1d({1.0, 3.0}, {0.5, 0.5});
    CHECK(wasserstein_equal_weight_bruteforce(g2, h2, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("brute force refuses factorial blowup") {
    Rng rng(5);
    const auto g = random_equal_weight(rng, 9, 1);
    const auto h = random_equal_weight(rng, 9, 1);
    CHECK_THROWS_AS((void)wasserstein_equal_weight_bruteforce(g, h, 1.0),
                    InvalidArgument);
}

TEST_CASE("LP equals brute force on equal-weight instances") {
    Rng rng(13);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + rep % 5;
        const int q = 1 + rep % 3;
        const auto g = random_equal_weight(rng, k, q);
        const auto h = random_equal_weight(rng, k, q);
        for (double r : {1.0, 2.0}) {
            const double lp = wasserstein_value(g, h, r);
            const double bf = wasserstein_equal_weight_bruteforce(g, h, r);
            CHECK(std::abs(lp - bf) <= 1e-9);
        }
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const auto g = dirac({0.0});
    const auto h = dirac({0.0, 1.0});
    CHECK_THROWS_AS((void)wasserstein(g, h, 1.0), InvalidArgument);
}

TEST_CASE("metric axioms on random triples") {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const int q = 1 + rep % 2;
        const auto g = random_measure(rng, 2 + rep % 4, q);
        const auto h = random_measure(rng, 2 + (rep + 1) % 4, q);
        const auto f = random_measure(rng, 2 + (rep + 2) % 4, q);
        for (double r : {1.0, 2.0}) {
            const double gh = wasserstein_value(g, h, r);
            const double hg = wasserstein_value(h, g, r);
            CHECK(std::abs(gh - hg) <= 1e-9);
            const double gf = wasserstein_value(g, f, r);
            const double fh = wasserstein_value(f, h, r);
            CHECK(gh <= gf + fh + 1e-7);
        }
    }
}

TEST_CASE("identity of indiscernibles after canonicalization") {
    // Duplicate atoms merge; distance to the merged form is exactly zero.
    const auto g = make_measure_1d({1.0, 1.0 + 1e-15, 3.0}, {0.25, 0.25, 0.5});
    const auto gc = g.canonicalized();
    CHECK(gc.k() == 2);
    CHECK(wasserstein_value(g, gc, 1.0) <= 1e-9);
    // Nonzero distance implies not the same measure.
    const auto h = make_measure_1d({1.0, 3.0}, {0.4, 0.6});
    CHECK(wasserstein_value(gc, h, 1.0) > 1e-3);
}

TEST_CASE("W_r is monotone in r") {
    Rng rng(19);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = random_measure(rng, 2 + rep % 4, 1 + rep % 2);
        const auto h = random_measure(rng, 2 + (rep + 2) % 4, g.dim());
        const double w1 = wasserstein_value(g, h, 1.0);
        const double w2 = wasserstein_value(g, h, 2.0);
        const double w3 = wasserstein_value(g, h, 3.0);
        CHECK(w1 <= w2 + 1e-9);
        CHECK(w2 <= w3 + 1e-9);
    }
}

TEST_CASE("D_N: direct substitutions") {
    const auto g = dirac({0.0});
    const auto h = dirac({0.5});
    CHECK(d_n_metric(g, h, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto f = make_measure_1d({-1.0, 2.0}, {0.3, 0.7});
    CHECK(d_n_metric(f, f, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("D_N equals S_2 enumeration on random pairs") {
    Rng rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = random_measure(rng, 2, 2);
        const auto h = random_measure(rng, 2, 2);
        const double dn = d_n_metric(g, h, 3.0);
        // Manual enumeration of both permutations.
        auto cost = [&](int i, int j) {
            return std::sqrt(3.0) * euclidean(g.atoms[i], h.atoms[j]) +
                   std::abs(g.weights[i] - h.weights[j]);
        };
        const double direct = std::min(cost(0, 0) + cost(1, 1), cost(0, 1) + cost(1, 0));
        CHECK(dn == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("D_N rejects differing atom counts") {
    const auto g = make_measure_1d({0.0, 1.0}, {0.5, 0.5});
    const auto h = dirac({0.0});
    CHECK_THROWS_AS((void)d_n_metric(g, h, 1.0), InvalidArgument);
}

TEST_CASE("D_1 equals k * W_1 of lifted equal-weight measures") {
    Rng rng(29);
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + rep % 4;
        const auto g = random_measure(rng, k, 2);
        const auto h = random_measure(rng, k, 2);
        // Lift each atom to (theta, p) with weight 1/k; the ground metric on
        // the lifted space is the D_1 cost.
        std::vector<Vec> ga, ha;
        for (int i = 0; i < k; ++i) {
            Vec a = g.atoms[i];
            a.push_back(g.weights[i]);
            ga.push_back(a);
            Vec b = h.atoms[i];
            b.push_back(h.weights[i]);
            ha.push_back(b);
        }
        const Vec w(k, 1.0 / k);
        auto fix = [&](Vec v) {
            double s = 0.0;
            for (int i = 0; i + 1 < k; ++i) s += v[i];
            v[k - 1] = 1.0 - s;
            return v;
        };
        const auto gl = make_measure(ga, fix(w));
        const auto hl = make_measure(ha, fix(w));
        const GroundMetric m1 = [](const Vec& x, const Vec& y) {
            const size_t q = x.size() - 1;
            double s = 0.0;
            for (size_t d = 0; d < q; ++d) s += sqr(x[d] - y[d]);
            return std::sqrt(s) + std::abs(x[q] - y[q]);
        };
        const double lifted = wasserstein_value(gl, hl, 1.0, m1);
        CHECK(k * lifted == doctest::Approx(d_n_metric(g, h, 1.0)).epsilon(1e-9));
    }
}

TEST_CASE("larger-k D_N assignment path agrees with enumeration at k=8") {
    Rng rng(31);
    const auto g = random_measure(rng, 8, 1);
    const auto h = random_measure(rng, 8, 1);
    const double viaperm = d_n_metric(g, h, 2.0);
    // Force the LP path by lifting through wasserstein on the D_N ground
    // metric directly.
    std::vector<double> cost(64);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            cost[i * 8 + j] = std::sqrt(2.0) * euclidean(g.atoms[i], h.atoms[j]) +
                              std::abs(g.weights[i] - h.weights[j]);
    const Vec w(8, 0.125);
    const double vialp = solve_transport(cost, w, w).total_cost * 8;
    CHECK(viaperm == doctest::Approx(vialp).epsilon(1e-9));
}

TEST_CASE("nested wasserstein: trivial and single-outer-atom cases") {
    Rng rng(37);
    const auto g = random_measure(rng, 3, 1);
    const auto h = random_measure(rng, 2, 1);
    const MeasureOfMeasures d{{g, h}, {0.5, 0.5}};
    CHECK(nested_wasserstein(d, d, 2.0) <= 1e-9);
    const MeasureOfMeasures dg{{g}, {1.0}};
    const MeasureOfMeasures dh{{h}, {1.0}};
    CHECK(nested_wasserstein(dg, dh, 2.0) ==
          doctest::Approx(wasserstein_value(g, h, 2.0)).epsilon(1e-9));
}

TEST_CASE("nested wasserstein dominates wasserstein of mean measures") {
    Rng rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        const int q = 1 + rep % 2;
        MeasureOfMeasures d{{random_measure(rng, 1 + rep % 3, q),
                             random_measure(rng, 1 + (rep + 1) % 3, q)},
                            {0.5, 0.5}};
        MeasureOfMeasures e{{random_measure(rng, 1 + (rep + 2) % 3, q),
                             random_measure(rng, 1 + (rep + 1) % 2, q)},
                            {0.3, 0.7}};
        const double outer = nested_wasserstein(d, e, 1.0);
        const double inner = wasserstein_value(mean_measure(d), mean_measure(e), 1.0);
        CHECK(inner <= outer + 1e-9);
    }
}

TEST_CASE("mean measure flattens hierarchies") {
    const auto g = dirac({0.0});
    const auto h = dirac({1.0});
    const MeasureOfMeasures d{{g, h}, {0.5, 0.5}};
    const auto mean = mean_measure(d);
    CHECK(mean.k() == 2);
    CHECK(mean.weights[0] == doctest::Approx(0.5));
    const MeasureOfMeasures single{{g}, {1.0}};
    const auto m2 = mean_measure(single);
    CHECK(m2.k() == 1);
    CHECK(m2.atoms[0][0] == doctest::Approx(0.0));

    Rng rng(43);
    for (int rep = 0; rep < 10; ++rep) {
        MeasureOfMeasures dd{{random_measure(rng, 3, 2), random_measure(rng, 2, 2)},
                             {0.4, 0.6}};
        const auto m = mean_measure(dd);
        double total = 0.0;
        for (double w : m.weights) total += w;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("composite transport basics") {
    const auto g = make_measure_1d({0.0, 2.0}, {0.5, 0.5});
    const auto h = make_measure_1d({1.0, 3.0}, {0.4, 0.6});
    CHECK(composite_transport(g, h, [](const Vec&, const Vec&) { return 0.0; }) ==
          doctest::Approx(0.0));
    const auto gd = dirac({0.0});
    const auto hd = dirac({1.5});
    CHECK(composite_transport(gd, hd, [](const Vec& a, const Vec& b) {
              return sqr(a[0] - b[0]);
          }) == doctest::Approx(2.25).epsilon(1e-12));
    CHECK_THROWS_AS((void)composite_transport(
                        g, h, [](const Vec&, const Vec&) { return -1.0; }),
                    InvalidArgument);
}

TEST_CASE("stress: many random LP instances stay feasible and optimal") {
    // Optimality certificate: reduced costs of the returned plan are
    // nonnegative for some potentials; here we settle for the weaker but
    // oracle-backed check against brute force at equal weights plus marginal
    // validation at general weights (done above).  This case hammers sizes.
    Rng rng(61);
    for (int rep = 0; rep < 10; ++rep) {
        const int k = 20 + 10 * rep;
        const auto g = random_measure(rng, k, 2);
        const auto h = random_measure(rng, k + 5, 2);
        const auto res = wasserstein(g, h, 1.0);
        res.plan.validate(1e-9);
        CHECK(res.value >= 0.0);
    }
}
