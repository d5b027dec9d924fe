// mixot — command-line front end for the mixing-measure toolkit: transport
// distances between mixing measures, single estimator runs, identifiability
// probes, and the rate-benchmark harness.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure,
// 3 slope assertion failure (rate-bench --assert).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixot/bench.hpp"
#include "mixot/config_json.hpp"
#include "mixot/identifiability.hpp"
#include "mixot/kernels.hpp"
#include "mixot/phi.hpp"
#include "mixot/rng.hpp"
#include "mixot/transport.hpp"

namespace {

using namespace mixot;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_out(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot open output file '" + path + "'");
    out << text;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void announce_seed(std::uint64_t seed) { std::cerr << "effective seed: " << seed << "\n"; }

// ------------------------------------------------------------------ distance

// Config shape: {"kernel": {...}, "g": {...}, "h": {...}, "mmd_gamma": r}.
int cmd_distance(const std::string& config_path, const std::string& output) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(config_path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
    }
    KernelModel kernel;
    MixingMeasure g, h;
    double gamma = 1.0;
    try {
        reject_unknown_fields(j, {"kernel", "g", "h", "mmd_gamma"}, "distance config");
        kernel = kernel_from_json(j.at("kernel"));
        g = measure_from_json(j.at("g"));
        h = measure_from_json(j.at("h"));
        gamma = j.value("mmd_gamma", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    kernel.validate();
    g.validate();
    h.validate();
    if (g.dim() != kernel.param_dim() || h.dim() != kernel.param_dim())
        throw InvalidArgument("distance: measure atoms do not match the kernel parameter space");
    if (!(gamma > 0.0)) throw InvalidArgument("distance: mmd_gamma must be positive");

    std::ostringstream out;
    out << "w1 = " << fmt(wasserstein_value(g, h, 1.0)) << "\n";
    out << "w2 = " << fmt(wasserstein_value(g, h, 2.0)) << "\n";
    out << "ks = " << fmt(phi_distance(ks_phi(), g, h, kernel)) << "\n";
    if (kernel.family == Family::GaussianLocation) {
        out << "mmd = " << fmt(std::sqrt(std::max(0.0, mmd_squared(kernel, g, h, gamma))))
            << "\n";
    } else {
        std::cerr << "mmd: closed form needs a gaussian-location kernel; skipped\n";
    }
    write_out(out.str(), output);
    return 0;
}

// ------------------------------------------------------------------ estimate

// One replicate (index 0) of the config's first ladder rung, exactly as the
// benchmark harness would run it, printed with the fitted measure itself.
int cmd_estimate(const std::string& config_path, const std::string& scenario, bool seed_given,
                 std::uint64_t seed, const std::string& output) {
    ExperimentConfig cfg =
        scenario.empty() ? experiment_from_json(slurp(config_path)) : find_scenario(scenario).config;
    if (seed_given) cfg.master_seed = seed;
    announce_seed(cfg.master_seed);

    const ReplicateOutcome rep = run_replicate(cfg, 0, 0);
    nlohmann::json out;
    out["scenario"] = cfg.scenario;
    out["estimator"] = cfg.estimator;
    out["rung"] = {{"n", rep.rung.n}, {"m", rep.rung.m}, {"N", rep.rung.N}};
    out["replicate"] = 0;
    out["seed"] = rep.seed;
    out["objective"] = rep.objective;
    out["estimate"] = measure_to_json(rep.estimate);
    out["generating"] = measure_to_json(rep.generating);
    nlohmann::json metrics;
    for (const auto& [name, value] : rep.scores) metrics[name] = value;
    out["metrics"] = metrics;
    write_out(out.dump(2) + "\n", output);
    return 0;
}

// -------------------------------------------------------------------- probes

Vec residual_grid(const KernelModel& k, const Vec& theta, int n = 401) {
    const auto iv = support_interval(k, theta);
    Vec xs(n);
    for (int i = 0; i < n; ++i) xs[i] = iv.first + (iv.second - iv.first) * i / (n - 1);
    return xs;
}

void pde_sweep(const KernelModel& kernel, const std::vector<std::string>& identities,
               const std::vector<std::pair<double, double>>& ranges, double threshold,
               std::uint64_t seed, std::ostream& out) {
    const int points = 50;
    for (const auto& identity : identities) {
        double worst = 0.0;
        Rng sweep(derive_seed(seed, {hash_string(identity)}));
        for (int i = 0; i < points; ++i) {
            Vec theta(ranges.size());
            for (size_t d = 0; d < ranges.size(); ++d)
                theta[d] = sweep.uniform(ranges[d].first, ranges[d].second);
            worst = std::max(worst, pde_residual(kernel, identity, theta,
                                                 residual_grid(kernel, theta)));
        }
        out << "identity: " << identity << "\n";
        out << "parameter draws: " << points << "\n";
        out << "max residual = " << fmt(worst) << "\n";
        out << "threshold = " << fmt(threshold) << "\n";
        out << "verdict: " << (worst < threshold ? "pass" : "fail") << "\n";
    }
}

void probe_heat_pde(std::uint64_t seed, std::ostream& out) {
    pde_sweep(gaussian_location_scale(Box{{-8.0, 0.05}, {8.0, 9.0}}), {"heat"},
              {{-6.0, 6.0}, {0.3, 6.0}}, 1e-8, seed, out);
}

void probe_gamma_pde(std::uint64_t seed, std::ostream& out) {
    pde_sweep(gamma_kernel(Box{{0.3, 0.3}, {12.0, 10.0}}), {"gamma-shift"},
              {{0.5, 11.0}, {0.5, 9.0}}, 1e-4, seed, out);
}

void probe_skew_normal_pde(std::uint64_t seed, std::ostream& out) {
    pde_sweep(skew_normal_kernel(Box{{-6.0, 0.05, -5.0}, {6.0, 8.0, 5.0}}),
              {"skew-normal-1", "skew-normal-2"}, {{-5.0, 5.0}, {0.3, 6.0}, {-4.0, 4.0}}, 1e-4,
              seed, out);
}

void print_gram(const GramReport& rep, const std::string& label, std::ostream& out) {
    out << label << ": min eigenvalue = " << fmt(rep.min_eigenvalue)
        << (rep.independent ? "  -> independent" : "  -> dependent") << "\n";
}

void probe_gram_gauss(std::uint64_t, std::ostream& out) {
    const auto k = gaussian_location(Box{{-8.0}, {8.0}});
    out << "kernel: gaussian-location, atoms {0, 1.5}\n";
    print_gram(strong_identifiability_gram(k, 1, {{0.0}, {1.5}}), "order 1", out);
    print_gram(strong_identifiability_gram(k, 2, {{0.0}, {1.5}}), "order 2", out);
    out << "reading: density and parameter derivatives stay linearly independent,\n"
           "so the location family is strongly identifiable through order 2\n";
}

void probe_gram_locscale(std::uint64_t, std::ostream& out) {
    const auto k = gaussian_location_scale(Box{{-8.0, 0.05}, {8.0, 9.0}});
    out << "kernel: gaussian location-scale, atom {0, 1}\n";
    print_gram(strong_identifiability_gram(k, 1, {{0.0, 1.0}}), "order 1", out);
    print_gram(strong_identifiability_gram(k, 2, {{0.0, 1.0}}), "order 2", out);
    out << "reading: the second location derivative equals twice the scale\n"
           "derivative (the heat identity), so order 2 collapses\n";
}

void probe_inverse_bound(std::uint64_t seed, std::ostream& out) {
    const auto k = gaussian_location(Box{{-8.0}, {8.0}});
    const auto g0 = make_measure({{-1.0}, {1.0}}, {0.5, 0.5});
    InverseBoundSettings s;
    s.radius = 0.08;
    s.pair_budget = 24;
    s.adversarial_starts = 4;
    s.max_iter = 60;
    s.seed = seed;
    const auto rep = inverse_bound_probe(k, ks_phi(), g0, 2, s);
    out << "kernel: gaussian-location, exact-fitted two atoms, KS numerator\n";
    out << "denominator exponent = " << fmt(rep.exponent) << "\n";
    for (const auto& pt : rep.trajectory)
        out << "radius " << fmt(pt.radius) << ": min ratio = " << fmt(pt.min_ratio) << "\n";
    out << "verdict: " << verdict_name(rep.verdict) << "\n";
    out << "heuristic: a finite pair budget can only give evidence for the bound\n";
}

void probe_gamma_path(std::uint64_t, std::ostream& out) {
    const auto k = gamma_kernel(Box{{0.3, 0.3}, {12.0, 10.0}});
    const Vec ts{1e-1, 1e-2, 1e-3};

    const MixingMeasure degenerate{{{2.0, 1.5}, {3.0, 1.5}}, {0.5, 0.5}};
    const auto path = gamma_pathological_path(k, degenerate, ts);
    out << "degenerate pair: atoms (2,1.5), (3,1.5), shapes offset by exactly 1\n";
    for (size_t i = 0; i < ts.size(); ++i)
        out << "t = " << fmt(ts[i]) << ": V/W1 = " << fmt(path.ratios[i]) << "\n";
    const double decay = path.ratios.back() / path.ratios.front();
    out << "decay factor = " << fmt(decay) << (decay < 0.2 ? "  -> collapses" : "  -> stable")
        << "\n";

    const MixingMeasure control{{{2.0, 1.5}, {3.0, 1.8}}, {0.5, 0.5}};
    const auto ctrl = gamma_pathological_path(k, control, ts, {1.0, 0.3});
    double lo = ctrl.ratios[0], hi = ctrl.ratios[0];
    for (double r : ctrl.ratios) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    out << "control pair: atoms (2,1.5), (3,1.8), offset (1, 0.3)\n";
    out << "control spread = " << fmt(hi / lo) << (hi / lo < 2.0 ? "  -> stable" : "  -> varies")
        << "\n";
    out << "reading: total variation outruns W1 only along the shape-shift\n"
           "direction that first-order cancellation allows\n";
}

void singularity_pair(int gap, int last_solvable, std::uint64_t seed, std::ostream& out) {
    const int starts = 2000;
    out << "weight-gap " << gap << " moment-cancellation system, " << starts
        << " starts per order\n";
    for (int r = last_solvable; r <= last_solvable + 1; ++r) {
        const auto rep = singularity_system_probe(gap, r, starts, seed);
        if (rep.found) {
            out << "order " << r << ": witness found, residual = " << fmt(rep.residual)
                << ", min weight = " << fmt(rep.min_weight) << "\n";
        } else {
            out << "order " << r << ": no witness (best residual " << fmt(rep.residual) << ")\n";
        }
    }
    out << "heuristic: absence of a witness is evidence, not proof\n";
}

void probe_singularity_gap1(std::uint64_t seed, std::ostream& out) {
    singularity_pair(1, 3, seed, out);
}

void probe_singularity_gap2(std::uint64_t seed, std::ostream& out) {
    singularity_pair(2, 5, seed, out);
}

void probe_product_bernoulli(std::uint64_t seed, std::ostream& out) {
    const auto k = bernoulli_kernel();
    const auto g0 = make_measure({{0.35}, {0.65}}, {0.5, 0.5});
    out << "truth: bernoulli atoms {0.35, 0.65}, equal weights\n";
    for (int N : {2, 3}) {
        const auto rep = product_identifiability_probe(k, g0, N, 64, seed);
        if (rep.found) {
            out << "N = " << N << ": distinct match found, tv = " << fmt(rep.tv)
                << ", W1 separation = " << fmt(rep.separation) << "\n";
            out << "  witness atoms = {" << fmt(rep.witness.atoms[0][0]) << ", "
                << fmt(rep.witness.atoms[1][0]) << "}, weights = {"
                << fmt(rep.witness.weights[0]) << ", " << fmt(rep.witness.weights[1]) << "}\n";
        } else {
            out << "N = " << N << ": no match within budget (best tv " << fmt(rep.tv) << ")\n";
        }
    }
    out << "reading: two-atom product mixtures pin the mixing measure once the\n"
           "sequence length reaches 2k-1 = 3\n";
    out << "heuristic: absence of a witness is evidence, not proof\n";
}

void probe_n1_gamma(std::uint64_t seed, std::ostream& out) {
    const auto k = gamma_kernel(Box{{0.3, 0.3}, {12.0, 10.0}});
    const MixingMeasure g0{{{2.0, 1.5}, {3.0, 1.5}}, {0.5, 0.5}};
    InverseBoundSettings s;
    s.radius = 0.05;
    s.pair_budget = 12;
    s.adversarial_starts = 4;
    s.max_iter = 70;
    s.seed = seed;
    const auto rep = n1_probe(k, g0, 1, 2, s);
    out << "truth: gamma atoms (2,1.5), (3,1.5) — on the degenerate shape offset\n";
    for (size_t i = 0; i < rep.per_n.size(); ++i) {
        out << "N = " << (rep.n_lo + static_cast<int>(i)) << ": min V/D1 ratio = "
            << fmt(rep.per_n[i].min_ratio) << ", verdict " << verdict_name(rep.per_n[i].verdict)
            << "\n";
    }
    if (rep.n1 > 0)
        out << "first identifiable sequence length = " << rep.n1 << "\n";
    else
        out << "no identifiable sequence length in the probed range\n";
}

struct ProbeEntry {
    const char* name;
    const char* blurb;
    std::uint64_t default_seed;
    void (*run)(std::uint64_t, std::ostream&);
};

const std::vector<ProbeEntry>& probe_registry() {
    static const std::vector<ProbeEntry> table = {
        {"heat-pde", "heat identity residual for location-scale Gaussians", 101, probe_heat_pde},
        {"gamma-pde", "shape-shift identity residual for gamma kernels", 102, probe_gamma_pde},
        {"skew-normal-pde", "both skew-normal identities, finite differences", 103,
         probe_skew_normal_pde},
        {"gram-gauss", "derivative Gram matrix of the Gaussian location family", 0,
         probe_gram_gauss},
        {"gram-locscale", "Gram collapse of location-scale Gaussians at order 2", 0,
         probe_gram_locscale},
        {"inverse-bound", "KS-to-W1 ratio over shrinking neighborhoods", 5, probe_inverse_bound},
        {"gamma-path", "total-variation collapse along the degenerate gamma path", 0,
         probe_gamma_path},
        {"singularity-gap1", "overfitted Gaussian moment system, weight gap 1", 11,
         probe_singularity_gap1},
        {"singularity-gap2", "overfitted Gaussian moment system, weight gap 2", 12,
         probe_singularity_gap2},
        {"product-bernoulli", "matching product laws below sequence length 2k-1", 3,
         probe_product_bernoulli},
        {"n1-gamma", "first identifiable sequence length for a degenerate gamma pair", 17,
         probe_n1_gamma},
    };
    return table;
}

void list_probes(std::ostream& out) {
    out << "available probes:\n";
    for (const auto& p : probe_registry()) out << "  " << p.name << " — " << p.blurb << "\n";
}

int cmd_probe(const std::string& name, bool seed_given, std::uint64_t seed,
              const std::string& output) {
    for (const auto& p : probe_registry()) {
        if (name != p.name) continue;
        const std::uint64_t effective = seed_given ? seed : p.default_seed;
        announce_seed(effective);
        std::ostringstream out;
        out << "probe: " << p.name << "\n";
        p.run(effective, out);
        write_out(out.str(), output);
        return 0;
    }
    std::cerr << "unknown probe '" << name << "'\n";
    list_probes(std::cerr);
    return 1;
}

// ---------------------------------------------------------------- rate-bench

int cmd_rate_bench(const std::string& config_path, const std::string& scenario, bool seed_given,
                   std::uint64_t seed, double scale, bool do_assert, const std::string& output) {
    ExperimentConfig cfg =
        scenario.empty() ? experiment_from_json(slurp(config_path)) : find_scenario(scenario).config;
    // Slope windows live in the catalog; --assert matches them by scenario
    // name, so a hand-edited --config can still be held to the stock windows.
    const Scenario* entry = nullptr;
    if (do_assert) {
        for (const auto& s : scenario_catalog())
            if (s.config.scenario == cfg.scenario) entry = &s;
        if (entry == nullptr || entry->slope_windows.empty())
            throw InvalidArgument("rate-bench: --assert needs slope windows; no catalog scenario named '" +
                                  cfg.scenario + "' carries any");
    }
    if (seed_given) cfg.master_seed = seed;
    announce_seed(cfg.master_seed);
    cfg = scaled_config(cfg, scale);

    const ExperimentResult res = run_experiment(cfg);
    write_out(result_csv(res), output);
    // The summary goes wherever the CSV is not.
    if (output.empty())
        std::cerr << summary_json(res);
    else
        std::cout << summary_json(res);

    if (res.excess_failures) {
        std::cerr << "rate-bench: a rung lost more than 5% of its replicates\n";
        return 2;
    }
    if (!do_assert) return 0;

    if (res.fits.empty()) {
        if (scale < 1.0) {
            std::cerr << "assert: scale " << scale
                      << " leaves too few rungs or replicates for a fit; nothing to check\n";
            return 0;
        }
        std::cerr << "assert: no usable slope fits\n";
        return 3;
    }
    int violations = 0;
    for (const auto& [metric, window] : entry->slope_windows) {
        const auto it = res.fits.find(metric);
        if (it == res.fits.end()) {
            std::cerr << "assert: no fit for metric " << metric << "\n";
            ++violations;
            continue;
        }
        const double slope = it->second.slope;
        if (slope < window.first || slope > window.second) {
            std::cerr << "assert: " << metric << " slope " << fmt(slope) << " outside ["
                      << fmt(window.first) << ", " << fmt(window.second) << "]\n";
            ++violations;
        }
    }
    if (violations > 0) return 3;
    std::cerr << "assert: all slope windows satisfied\n";
    return 0;
}

// ------------------------------------------------------------------- catalog

int cmd_catalog(const std::string& output) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : scenario_catalog()) {
        nlohmann::json e;
        e["name"] = s.config.scenario;
        e["claim"] = s.claim;
        e["estimator"] = s.config.estimator;
        e["kernel"] = family_name(s.config.kernel.family);
        std::vector<std::string> metrics;
        for (const auto& m : s.config.metrics) metrics.push_back(metric_name(m));
        e["metrics"] = metrics;
        std::vector<long> sizes;
        for (const auto& rung : s.config.ladder) sizes.push_back(rung.total());
        e["sizes"] = sizes;
        e["replicates"] = s.config.replicates;
        if (!s.slope_windows.empty()) {
            nlohmann::json w;
            for (const auto& [metric, window] : s.slope_windows)
                w[metric] = {window.first, window.second};
            e["slope_windows"] = w;
        }
        arr.push_back(e);
    }
    write_out(arr.dump(2) + "\n", output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "mixot — latent mixing measures of finite mixtures: transport distances,\n"
        "minimum-distance estimators, identifiability probes, rate benchmarks"};
    app.require_subcommand(1);

    std::string config_path, output_path, scenario_name, probe_name;
    std::uint64_t seed = 0;
    double scale = 1.0;
    int threads = -1;
    bool do_assert = false;

    auto add_common = [&](CLI::App* sub, bool with_output) {
        CLI::Option* seed_opt =
            sub->add_option("--seed", seed, "Master seed override (decides every replicate)");
        sub->add_option("--threads", threads, "Worker threads (default: MIXOT_THREADS, then all cores)")
            ->check(CLI::NonNegativeNumber);
        if (with_output)
            sub->add_option("--output", output_path, "Write the result here instead of stdout");
        return seed_opt;
    };

    auto* distance =
        app.add_subcommand("distance", "W1/W2/KS/MMD between two mixing measures");
    distance->add_option("--config", config_path, "JSON with kernel, g, h, optional mmd_gamma")
        ->required();
    add_common(distance, true);

    auto* estimate =
        app.add_subcommand("estimate", "Run one replicate of a config and print the fit");
    estimate->add_option("--config", config_path, "Experiment config JSON");
    estimate->add_option("--scenario", scenario_name, "Catalog scenario name");
    CLI::Option* estimate_seed = add_common(estimate, true);

    auto* probe = app.add_subcommand("probe", "Run a named identifiability probe");
    probe->add_option("--probe", probe_name, "Probe name (see `probe --probe list`)")->required();
    CLI::Option* probe_seed = add_common(probe, true);

    auto* rate_bench =
        app.add_subcommand("rate-bench", "Run a rate experiment, emit CSV and a slope summary");
    rate_bench->add_option("--config", config_path, "Experiment config JSON");
    rate_bench->add_option("--scenario", scenario_name, "Catalog scenario name");
    rate_bench->add_option("--scale", scale, "Shrink replicates and ladder for smoke runs")
        ->check(CLI::PositiveNumber);
    rate_bench->add_flag("--assert", do_assert, "Exit 3 unless fitted slopes sit in the catalog windows");
    CLI::Option* bench_seed = add_common(rate_bench, true);

    auto* catalog = app.add_subcommand("catalog", "List the built-in scenarios as JSON");
    add_common(catalog, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (threads >= 0) {
        const std::string value = std::to_string(threads);
        setenv("MIXOT_THREADS", value.c_str(), 1);
    }

    try {
        if (app.got_subcommand(distance)) {
            announce_seed(seed);  // distances are deterministic; echoed for uniformity
            return cmd_distance(config_path, output_path);
        }
        if (app.got_subcommand(estimate)) {
            if (config_path.empty() == scenario_name.empty())
                throw InvalidArgument("estimate: pass exactly one of --config and --scenario");
            return cmd_estimate(config_path, scenario_name, estimate_seed->count() > 0, seed,
                                output_path);
        }
        if (app.got_subcommand(probe)) {
            if (probe_name == "list") {
                list_probes(std::cout);
                return 0;
            }
            return cmd_probe(probe_name, probe_seed->count() > 0, seed, output_path);
        }
        if (app.got_subcommand(rate_bench)) {
            if (config_path.empty() == scenario_name.empty())
                throw InvalidArgument("rate-bench: pass exactly one of --config and --scenario");
            return cmd_rate_bench(config_path, scenario_name, bench_seed->count() > 0, seed,
                                  scale, do_assert, output_path);
        }
        if (app.got_subcommand(catalog)) {
            announce_seed(seed);
            return cmd_catalog(output_path);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
