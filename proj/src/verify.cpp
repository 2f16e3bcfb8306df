#include "dde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "dde/archive.hpp"
#include "dde/bandit.hpp"
#include "dde/cmaes.hpp"
#include "dde/csv.hpp"
#include "dde/engine.hpp"
#include "dde/simd/kernels.hpp"
#include "dde/vae.hpp"
#include "dde/variation.hpp"

namespace dde {

bool VerifyReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * rng.uniform();
    return v;
}

VerifyCheck check_gradient(Rng rng, const VerifyOptions& opts) {
    double worst = 0.0;
    for (int c = 0; c < 10; ++c) {
        const VaeShape shape{2 + rng.index(7), 1 + rng.index(4), 2 + rng.index(7)};
        const VaeModel m(shape, rng.engine()());
        const auto x = random_vector(rng, shape.input_dim, 0.0, 1.0);
        std::vector<double> eps(shape.latent_dim);
        for (double& e : eps) e = rng.normal();
        worst = std::max(worst, gradient_check(m, x, eps, 1e-6, 1.0, opts.corrupt_gradient));
    }
    return {"vae gradient check", worst < 1e-4, "max rel err " + csv::format(worst)};
}

VerifyCheck check_kl(Rng rng) {
    const std::vector<double> zeros(6, 0.0);
    bool ok = kl_standard_normal(zeros, zeros) == 0.0;
    double min_kl = INFINITY;
    for (int i = 0; i < 200; ++i) {
        const auto mu = random_vector(rng, 6, -2.0, 2.0);
        const auto lv = random_vector(rng, 6, -3.0, 3.0);
        const double kl = kl_standard_normal(mu, lv);
        min_kl = std::min(min_kl, kl);
        ok = ok && kl > 0.0;
    }
    return {"kl non-negative, zero at N(0, I)", ok, "min kl " + csv::format(min_kl)};
}

VerifyCheck check_line_reduction(Rng rng) {
    VariationConfig cfg;
    cfg.sigma_line_2 = 0.0;
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
        const auto x = random_vector(rng, 20, 0.0, 1.0);
        const auto y = random_vector(rng, 20, 0.0, 1.0);
        Rng a(1000 + i), b(1000 + i);
        ok = ok && line_mutation(x, y, cfg, a) == isometric_mutation(x, cfg.sigma_line_1, b);
    }
    return {"line mutation with sigma_2 = 0 equals isometric", ok, ""};
}

VerifyCheck check_crossover(Rng rng) {
    const VaeModel m(VaeShape{12, 3, 16}, rng.engine()());
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
        const auto x = random_vector(rng, 12, 0.0, 1.0);
        const Genome r = m.reconstruct(x);
        const Genome c = reconstructive_crossover(x, m);
        for (std::size_t j = 0; j < x.size(); ++j) ok = ok && c[j] == (x[j] + r[j]) / 2.0;
    }
    const VaeModel z = VaeModel::zeros(VaeShape{4, 2, 3});
    const Genome c = reconstructive_crossover(std::vector<double>{0.0, 0.2, 0.6, 1.0}, z);
    ok = ok && c == Genome{0.25, 0.35, 0.55, 0.75};
    return {"reconstructive crossover midpoint", ok, ""};
}

VerifyCheck check_bandit(Rng rng) {
    const auto actions = default_bandit_actions();
    BanditState b(actions, 1000);
    double worst = 0.0;
    bool counts_ok = true;
    for (int i = 0; i < 5000; ++i) {
        const std::size_t a = rng.index(actions.size());
        const std::size_t batch = 1 + rng.index(100);
        b.update(a, rng.index(batch + 1), batch);
        std::vector<std::size_t> counts(actions.size(), 0);
        std::vector<double> sums(actions.size(), 0.0);
        for (const auto& r : b.window()) {
            ++counts[r.action];
            sums[r.action] += r.reward;
        }
        for (std::size_t k = 0; k < actions.size(); ++k) {
            counts_ok = counts_ok && counts[k] == b.count(k);
            worst = std::max(worst, std::abs(sums[k] - b.reward_sum(k)));
        }
    }
    return {"bandit cached stats match window", counts_ok && worst <= 1e-9 && b.window().size() == 1000,
            "max sum drift " + csv::format(worst)};
}

VerifyCheck check_untried_first() {
    BanditState b(default_bandit_actions(), 1000);
    bool ok = true;
    for (std::size_t i = 0; i < b.actions().size(); ++i) {
        const std::size_t a = b.select();
        ok = ok && a == i;
        b.update(a, i % 2 ? 100 : 0, 100);
    }
    return {"untried actions selected first, in order", ok, ""};
}

VerifyCheck check_archive_monotone(std::uint64_t seed) {
    ExperimentConfig cfg = ExperimentConfig::for_arm(20);
    cfg.archive.bins = 100;
    cfg.run.batch = 50;
    const ArmConfig arm = cfg.arm();
    RunState state(Archive(std::make_shared<const CentroidSet>(generate_centroids(100, 0))));
    Rng rng(seed);
    std::vector<Genome> init(50, Genome(20));
    for (auto& g : init)
        for (double& v : g) v = rng.uniform();
    evaluate_and_offer(state, std::move(init), [&](std::span<const double> g) { return evaluate(g, arm); }, 1);

    bool ok = true;
    std::size_t prev_filled = state.archive.filled();
    while (state.evaluations_used < 500) {
        std::vector<double> before(100, -INFINITY);
        for (std::size_t c = 0; c < 100; ++c)
            if (state.archive.cell(c)) before[c] = state.archive.cell(c)->eval.fitness;
        map_elites_generation(state, OperatorRatios{0.0, 0.5, 0.5}, cfg.operators, 50, arm, rng, 1);
        for (std::size_t c = 0; c < 100; ++c) {
            const auto& cell = state.archive.cell(c);
            if (before[c] > -INFINITY) ok = ok && cell && cell->eval.fitness >= before[c];
        }
        ok = ok && state.archive.filled() >= prev_filled;
        prev_filled = state.archive.filled();
    }
    return {"archive fitness monotone over a 500-eval run", ok,
            std::to_string(state.archive.filled()) + " cells filled"};
}

VerifyCheck check_nearest(Rng rng) {
    const CentroidSet cs = generate_centroids(1950, 0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const Behavior b{rng.uniform() * 2.2 - 1.1, rng.uniform() * 2.2 - 1.1};
        if (cs.nearest(b) != cs.nearest_linear(b)) ++mismatches;
    }
    return {"nearest centroid equals linear scan", mismatches == 0, std::to_string(mismatches) + " mismatches"};
}

VerifyCheck check_simd(Rng rng) {
    const simd::KernelTable* fast = simd::avx2_kernels();
    if (!fast) return {"simd kernels match scalar reference", true, "no simd backend"};
    const simd::KernelTable& ref = simd::scalar_kernels();
    double worst = 0.0;
    auto rel = [&](double a, double b) { worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b))); };
    const std::size_t rows = 7, in = 13, out = 11;
    const auto x = random_vector(rng, rows * in, -1.0, 1.0);
    const auto w = random_vector(rng, in * out, -1.0, 1.0);
    const auto d = random_vector(rng, rows * out, -1.0, 1.0);
    rel(fast->dot(x.data(), w.data(), 37), ref.dot(x.data(), w.data(), 37));
    std::vector<double> y1(rows * out, 0.5), y2 = y1;
    fast->gemm_nn(rows, in, out, x.data(), w.data(), y1.data());
    ref.gemm_nn(rows, in, out, x.data(), w.data(), y2.data());
    for (std::size_t i = 0; i < y1.size(); ++i) rel(y1[i], y2[i]);
    std::vector<double> g1(in * out, 0.0), g2 = g1;
    fast->gemm_tn(rows, in, out, x.data(), d.data(), g1.data());
    ref.gemm_tn(rows, in, out, x.data(), d.data(), g2.data());
    for (std::size_t i = 0; i < g1.size(); ++i) rel(g1[i], g2[i]);
    std::vector<double> dx1(rows * in, 0.0), dx2 = dx1;
    fast->gemm_nt(rows, in, out, d.data(), w.data(), dx1.data());
    ref.gemm_nt(rows, in, out, d.data(), w.data(), dx2.data());
    for (std::size_t i = 0; i < dx1.size(); ++i) rel(dx1[i], dx2[i]);
    return {"simd kernels match scalar reference", worst <= 1e-12, "max rel diff " + csv::format(worst)};
}

VerifyCheck check_cma(std::uint64_t seed) {
    const auto r = cma_minimize(
        [](std::span<const double> p) {
            double s = 0.0;
            for (double v : p) s += v * v;
            return s;
        },
        5, 5000, seed, CmaOptions{std::vector<double>(5, 1.0), 0.5, 0, {}});
    return {"cma-es 5-d sphere below 1e-8", r.best_value < 1e-8, "best " + csv::format(r.best_value)};
}

VerifyCheck check_determinism(std::uint64_t seed) {
    ExperimentConfig cfg = ExperimentConfig::for_arm(20);
    cfg.archive.bins = 100;
    cfg.run.batch = 50;
    cfg.run.budget = 500;
    cfg.run.seed = seed;
    cfg.run.threads = 1;
    cfg.vae.hidden_dim = 16;
    cfg.vae.epochs = 1;
    const RunResult a = run_variant(cfg, Variant::DdeElites);
    const RunResult b = run_variant(cfg, Variant::DdeElites);
    bool ok = a.vae && b.vae && *a.vae == *b.vae && a.history.size() == b.history.size();
    for (std::size_t i = 0; ok && i < a.history.size(); ++i)
        ok = a.history[i].coverage == b.history[i].coverage && a.history[i].mean_fitness == b.history[i].mean_fitness &&
             a.history[i].action == b.history[i].action;
    for (std::size_t c = 0; ok && c < a.archive.size(); ++c) {
        const auto &x = a.archive.cell(c), &y = b.archive.cell(c);
        ok = x.has_value() == y.has_value() && (!x || (x->genome == y->genome && x->eval.fitness == y->eval.fitness));
    }
    return {"identical runs from the same seed", ok, ""};
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& opts) {
    const Rng master(opts.seed);
    VerifyReport r;
    r.checks.push_back(check_gradient(master.derive("gradient"), opts));
    r.checks.push_back(check_kl(master.derive("kl")));
    r.checks.push_back(check_line_reduction(master.derive("line")));
    r.checks.push_back(check_crossover(master.derive("crossover")));
    r.checks.push_back(check_bandit(master.derive("bandit")));
    r.checks.push_back(check_untried_first());
    r.checks.push_back(check_archive_monotone(master.derive("archive").seed()));
    r.checks.push_back(check_nearest(master.derive("nearest")));
    r.checks.push_back(check_simd(master.derive("simd")));
    r.checks.push_back(check_cma(master.derive("cma").seed()));
    r.checks.push_back(check_determinism(opts.seed));
    return r;
}

std::string format_report(const VerifyReport& report) {
    std::string out;
    for (const auto& c : report.checks) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4s  %-50s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                      c.detail.c_str());
        out += line;
    }
    out += report.all_passed() ? "all checks passed\n" : "some checks failed\n";
    return out;
}

}  // namespace dde
