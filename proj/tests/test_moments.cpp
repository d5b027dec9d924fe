#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixot/moments.hpp"
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
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += w[i];
    w[k - 1] = 1.0 - s;
    return make_measure(std::move(atoms), std::move(w));
}

}  // namespace

TEST_CASE("moment vector: symmetry and dirac cases") {
    const auto g = make_measure_1d({-1.0, 1.0}, {0.5, 0.5});
    const auto mv = moment_vector(g, {0.0}, 3);
    // Indices are {0,1,2,3} in order for q=1.
    REQUIRE(mv.values.size() == 4);
    CHECK(mv.values[0] == doctest::Approx(1.0));
    CHECK(mv.values[1] == doctest::Approx(0.0));
    CHECK(mv.values[2] == doctest::Approx(1.0));
    CHECK(mv.values[3] == doctest::Approx(0.0));

    const auto d = dirac({2.0});
    const auto mvd = moment_vector(d, {0.5}, 3);
    CHECK(mvd.values[1] == doctest::Approx(1.5));
    CHECK(mvd.values[2] == doctest::Approx(2.25));
    CHECK(mvd.values[3] == doctest::Approx(3.375));
}

TEST_CASE("bivariate moment vector enumerates mixed products") {
    // Two atoms in the plane; check a mixed moment by hand.
    const auto g = make_measure({{1.0, 2.0}, {-1.0, 0.5}}, {0.25, 0.75});
    const auto mv = moment_vector(g, {0.0, 0.0}, 2);
    // Find index (1,1).
    bool found = false;
    for (size_t t = 0; t < mv.indices.size(); ++t) {
        if (mv.indices[t] == std::vector<int>{1, 1}) {
            found = true;
            CHECK(mv.values[t] ==
                  doctest::Approx(0.25 * 1.0 * 2.0 + 0.75 * (-1.0) * 0.5));
        }
    }
    CHECK(found);
}

TEST_CASE("moment vector matches Monte Carlo sampling oracle") {
    Rng rng(47);
    const auto g = make_measure_1d({-0.7, 0.4, 1.9}, {0.2, 0.5, 0.3});
    const int samples = 1000000;
    Vec mc(4, 0.0);
    for (int s = 0; s < samples; ++s) {
        const double u = rng.uniform();
        double acc = 0.0;
        double theta = g.atoms.back()[0];
        for (int i = 0; i < g.k(); ++i) {
            acc += g.weights[i];
            if (u < acc) {
                theta = g.atoms[i][0];
                break;
            }
        }
        double p = 1.0;
        for (int j = 1; j <= 3; ++j) {
            p *= theta;
            mc[j] += p;
        }
    }
    const auto mv = moment_vector(g, {0.0}, 3);
    for (int j = 1; j <= 3; ++j) {
        const double mean = mc[j] / samples;
        // 3 standard errors of the Monte Carlo mean; moments are bounded by
        // max|theta|^j so a crude variance bound suffices.
        const double bound = 3.0 * std::pow(1.9, j) / std::sqrt(double(samples));
        CHECK(std::abs(mean - mv.values[j]) <= bound);
    }
}

TEST_CASE("moment distance: trivial and enumerated cases") {
    const auto g = make_measure_1d({0.3, -0.9}, {0.6, 0.4});
    CHECK(moment_distance(g, g, {0.0}, 2) == doctest::Approx(0.0));
    CHECK(moment_distance(dirac({0.0}), dirac({1.0}), {0.0}, 1) ==
          doctest::Approx(1.0));

    Rng rng(53);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = random_measure(rng, 3, 1);
        const auto b = random_measure(rng, 3, 1);
        const auto ma = moment_vector(a, {0.0}, 3);
        const auto mb = moment_vector(b, {0.0}, 3);
        double direct = 0.0;
        for (size_t t = 0; t < ma.values.size(); ++t)
            direct = std::max(direct, std::abs(ma.values[t] - mb.values[t]));
        CHECK(moment_distance(a, b, {0.0}, 2) == doctest::Approx(direct));
    }
}

TEST_CASE("moment distance separates distinct small mixtures") {
    // Randomized search never finds two distinct <=k-atom measures with all
    // moments up to order 2k-1 equal.
    Rng rng(59);
    for (int rep = 0; rep < 300; ++rep) {
        const int k = 2 + rep % 2;
        const auto a = random_measure(rng, k, 1);
        const auto b = random_measure(rng, k, 1);
        if (wasserstein_value(a, b, 1.0) > 1e-4)
            CHECK(moment_distance(a, b, {0.0}, k) > 1e-12);
    }
}

TEST_CASE("multi-index enumeration bounds") {
    CHECK(multi_indices(1, 3).size() == 4);
    CHECK(multi_indices(2, 2).size() == 6);
    CHECK_THROWS_AS((void)multi_indices(6, 30), InvalidArgument);
}
