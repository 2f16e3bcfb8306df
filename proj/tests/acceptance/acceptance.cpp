// Acceptance criteria. Prints one PASS/FAIL line per criterion plus indented
// detail lines. `--only N` (repeatable) restricts the run to criterion N.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dde/archive.hpp"
#include "dde/bandit.hpp"
#include "dde/cmaes.hpp"
#include "dde/config.hpp"
#include "dde/engine.hpp"
#include "dde/target_matching.hpp"
#include "dde/vae.hpp"
#include "dde/variation.hpp"

using namespace dde;
namespace fs = std::filesystem;

namespace {

// Pinned settings and tolerances.
constexpr std::size_t kIlluminateBudget = 100000;
constexpr std::size_t kRecreateBudget = 10000;
constexpr std::size_t kTargetBudget = 10000;
constexpr double kRecreateCoverage = 0.90;
constexpr double kCoverageRatio = 0.95;
const std::vector<std::uint64_t> kSeeds5{1, 2, 3, 4, 5};
const std::vector<std::uint64_t> kSeeds3{1, 2, 3};

constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kBanditTol = 1e-9;
constexpr double kCrossoverTol = 1e-12;
constexpr double kSphereTarget = 1e-8;
constexpr std::size_t kSphereBudget = 5000;
constexpr double kPropertySeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int prec = 4) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    return b;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); std::fflush(stdout); }

void verdict(int id, bool pass, const std::string& what) {
    std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
}

ExperimentConfig arm_config(std::size_t joints, std::uint64_t seed, std::size_t budget) {
    ExperimentConfig cfg = ExperimentConfig::for_arm(joints);
    cfg.run.seed = seed;
    cfg.run.budget = budget;
    cfg.run.threads = 1;
    return cfg;
}

fs::path scratch() {
    const fs::path p = fs::temp_directory_path() / "dde_acceptance";
    fs::create_directories(p);
    return p;
}

// Arm20 DDE-Elites runs shared by criteria 1-3; the decoder goes through a file.
struct Arm20Run {
    double coverage = 0, mean_fitness = 0, seconds = 0;
    fs::path decoder_file;
};

std::map<std::uint64_t, Arm20Run>& arm20_dde_cache() {
    static std::map<std::uint64_t, Arm20Run> cache;
    return cache;
}

const Arm20Run& arm20_dde(std::uint64_t seed) {
    auto& cache = arm20_dde_cache();
    if (auto it = cache.find(seed); it != cache.end()) return it->second;
    const auto t0 = Clock::now();
    const RunResult r = run_variant(arm_config(20, seed, kIlluminateBudget), Variant::DdeElites);
    Arm20Run out;
    out.seconds = seconds_since(t0);
    out.coverage = r.history.back().coverage;
    out.mean_fitness = r.history.back().mean_fitness;
    out.decoder_file = scratch() / ("arm20_seed" + std::to_string(seed) + ".decoder");
    save_decoder(out.decoder_file, r.vae->decoder());
    detail("arm20 dde-elites seed " + std::to_string(seed) + ": coverage " + fmt(out.coverage) + ", mean fitness " +
           fmt(out.mean_fitness) + " (" + fmt(out.seconds, 3) + " s)");
    return cache.emplace(seed, out).first->second;
}

// ---------------------------------------------------------------------------

bool criterion1() {
    std::vector<double> coverage;
    for (auto seed : kSeeds5) {
        const Arm20Run& run = arm20_dde(seed);
        const Decoder decoder = load_decoder(run.decoder_file);
        const auto t0 = Clock::now();
        const RunResult r = run_dde_search(decoder, arm_config(20, seed, kIlluminateBudget), kRecreateBudget);
        coverage.push_back(r.history.back().coverage);
        detail("recreate seed " + std::to_string(seed) + ": coverage " + fmt(coverage.back()) + " after " +
               std::to_string(r.history.back().evaluations) + " evaluations (" + fmt(seconds_since(t0), 3) + " s)");
    }
    const double m = median(coverage);
    const bool pass = m >= kRecreateCoverage;
    verdict(1, pass, "archive recreation, median coverage " + fmt(m) + " >= " + fmt(kRecreateCoverage) + " over " +
                         std::to_string(kSeeds5.size()) + " seeds " + list(coverage));
    return pass;
}

bool criterion2() {
    std::vector<double> me_fit, line_fit, line_cov, dde_cov;
    for (auto seed : kSeeds5) {
        const auto t0 = Clock::now();
        const RunResult me = run_variant(arm_config(20, seed, kIlluminateBudget), Variant::MapElites);
        const RunResult line = run_variant(arm_config(20, seed, kIlluminateBudget), Variant::MeLine);
        me_fit.push_back(me.history.back().mean_fitness);
        line_fit.push_back(line.history.back().mean_fitness);
        line_cov.push_back(line.history.back().coverage);
        detail("arm20 seed " + std::to_string(seed) + ": map-elites fitness " + fmt(me_fit.back()) + ", me-line fitness " +
               fmt(line_fit.back()) + " coverage " + fmt(line_cov.back()) + " (" + fmt(seconds_since(t0), 3) + " s)");
        dde_cov.push_back(arm20_dde(seed).coverage);
    }
    const bool a = median(line_fit) > median(me_fit);
    const bool b = median(dde_cov) >= kCoverageRatio * median(line_cov);
    detail(std::string(a ? "ok " : "bad") + "  arm20 median mean fitness: me-line " + fmt(median(line_fit)) +
           " > map-elites " + fmt(median(me_fit)));
    detail(std::string(b ? "ok " : "bad") + "  arm20 median coverage: dde-elites " + fmt(median(dde_cov)) + " >= " +
           fmt(kCoverageRatio) + " x me-line " + fmt(median(line_cov)));

    std::vector<double> dde200, line200;
    for (auto seed : kSeeds5) {
        auto t0 = Clock::now();
        line200.push_back(run_variant(arm_config(200, seed, kIlluminateBudget), Variant::MeLine).history.back().coverage);
        const double line_s = seconds_since(t0);
        t0 = Clock::now();
        dde200.push_back(run_variant(arm_config(200, seed, kIlluminateBudget), Variant::DdeElites).history.back().coverage);
        detail("arm200 seed " + std::to_string(seed) + ": me-line coverage " + fmt(line200.back()) + " (" +
               fmt(line_s, 3) + " s), dde-elites coverage " + fmt(dde200.back()) + " (" + fmt(seconds_since(t0), 3) +
               " s)");
    }
    const bool c = median(dde200) > median(line200);
    detail(std::string(c ? "ok " : "bad") + "  arm200 median coverage: dde-elites " + fmt(median(dde200)) +
           " > me-line " + fmt(median(line200)));
    const bool pass = a && b && c;
    verdict(2, pass, "variant ordering (arm20 fitness, arm20 coverage ratio, arm200 coverage)");
    return pass;
}

bool criterion3() {
    bool pass = true;
    TargetTask task;
    task.budget_per_target = kTargetBudget;
    const ArmConfig arm = ArmConfig::uniform(20);
    for (auto seed : kSeeds3) {
        const Decoder decoder = load_decoder(arm20_dde(seed).decoder_file);
        const auto t0 = Clock::now();
        const TargetSummary direct = summarize(run_target_matching(task, arm, nullptr, seed, 1));
        const TargetSummary dde = summarize(run_target_matching(task, arm, &decoder, seed, 1));
        const bool ok = dde.median_distance < direct.median_distance &&
                        dde.median_joint_variance < direct.median_joint_variance;
        pass = pass && ok;
        detail(std::string(ok ? "ok " : "bad") + "  seed " + std::to_string(seed) + ": median distance dde " +
               fmt(dde.median_distance) + " vs direct " + fmt(direct.median_distance) + "; median joint variance dde " +
               fmt(dde.median_joint_variance) + " vs direct " + fmt(direct.median_joint_variance) + " (" +
               fmt(seconds_since(t0), 3) + " s)");
    }
    verdict(3, pass, "target matching, dde median distance and joint variance below direct on every seed");
    return pass;
}

// ---------------------------------------------------------------------------
// Criterion 4: property suite with oracles local to this file.

double oracle_gradient_error(const VaeModel& m, const std::vector<double>& x, const std::vector<double>& eps) {
    std::vector<double> analytic(m.param_count());
    m.gradient(x, eps, analytic);
    VaeModel probe = m;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.param_count(); ++i) {
        const double saved = probe.params()[i];
        double f[4][2];
        const double offsets[4] = {kGradStep, -kGradStep, 2 * kGradStep, -2 * kGradStep};
        for (int k = 0; k < 4; ++k) {
            probe.params()[i] = saved + offsets[k];
            const auto l = probe.forward(x, eps).loss;
            f[k][0] = l.recon;
            f[k][1] = l.kl;
        }
        probe.params()[i] = saved;
        double numeric = 0.0;
        for (int t = 0; t < 2; ++t) numeric += (8 * (f[0][t] - f[1][t]) - (f[2][t] - f[3][t])) / (12 * kGradStep);
        const double err = std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

struct Check {
    std::string name;
    std::function<std::pair<bool, std::string>()> run;
};

std::vector<Check> property_checks() {
    std::vector<Check> c;
    c.push_back({"vae gradient check on 10 random configurations", [] {
                     Rng r(101);
                     double worst = 0;
                     for (int i = 0; i < 10; ++i) {
                         const VaeShape s{2 + r.index(9), 1 + r.index(4), 2 + r.index(12)};
                         const VaeModel m(s, r.engine()());
                         std::vector<double> x(s.input_dim), eps(s.latent_dim);
                         for (double& v : x) v = r.uniform();
                         for (double& v : eps) v = r.normal();
                         worst = std::max(worst, oracle_gradient_error(m, x, eps));
                     }
                     return std::pair{worst < kGradTol, "max relative error " + fmt(worst)};
                 }});
    c.push_back({"kl non-negative, zero iff standard normal", [] {
                     Rng r(102);
                     bool ok = kl_standard_normal(std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)) == 0.0;
                     for (int i = 0; i < 10000; ++i) {
                         std::vector<double> mu(4), lv(4);
                         for (double& v : mu) v = (r.uniform() - 0.5) * 6;
                         for (double& v : lv) v = (r.uniform() - 0.5) * 6;
                         if (i % 3 == 0) mu.assign(4, 0.0);
                         if (i % 3 == 1) lv.assign(4, 0.0);
                         ok = ok && kl_standard_normal(mu, lv) > 0.0;
                     }
                     return std::pair{ok, std::string("10000 perturbed inputs")};
                 }});
    c.push_back({"line mutation with sigma_2 = 0 equals isometric draw for draw", [] {
                     Rng r(103);
                     VariationConfig cfg;
                     cfg.sigma_line_2 = 0.0;
                     bool ok = true;
                     for (int i = 0; i < 1000; ++i) {
                         Genome x(20), y(20);
                         for (double& v : x) v = r.uniform();
                         for (double& v : y) v = r.uniform();
                         Rng a(5000 + i), b(5000 + i);
                         ok = ok && line_mutation(x, y, cfg, a) == isometric_mutation(x, cfg.sigma_line_1, b);
                     }
                     return std::pair{ok, std::string("1000 pairs")};
                 }});
    c.push_back({"reconstructive crossover midpoint identity", [] {
                     Rng r(104);
                     const VaeModel m({20, 10, 32}, 7);
                     double worst = 0;
                     for (int i = 0; i < 1000; ++i) {
                         Genome x(20);
                         for (double& v : x) v = r.uniform();
                         const Genome child = reconstructive_crossover(x, m), rec = m.reconstruct(x);
                         double dx = 0, dr = 0;
                         for (std::size_t j = 0; j < 20; ++j) {
                             worst = std::max(worst, std::abs(child[j] - 0.5 * (x[j] + rec[j])));
                             dx += (child[j] - x[j]) * (child[j] - x[j]);
                             dr += (child[j] - rec[j]) * (child[j] - rec[j]);
                         }
                         worst = std::max(worst, std::abs(std::sqrt(dx) - std::sqrt(dr)));
                     }
                     return std::pair{worst <= kCrossoverTol, "max deviation " + fmt(worst)};
                 }});
    c.push_back({"archive per-cell fitness under 10^4 random offers vs brute force", [] {
                     const auto cs = std::make_shared<const CentroidSet>(generate_centroids(1950, 0));
                     Archive a(cs);
                     std::vector<double> best(cs->size(), -INFINITY);
                     Rng r(105);
                     bool ok = true;
                     for (int i = 0; i < 10000; ++i) {
                         const Behavior b{r.uniform() * 2 - 1, r.uniform() * 2 - 1};
                         const double f = -r.uniform();
                         std::size_t cell = 0;
                         double bd = INFINITY;
                         for (std::size_t k = 0; k < cs->size(); ++k) {
                             const double d = std::hypot((*cs)[k].x - b.x, (*cs)[k].y - b.y);
                             if (d < bd) bd = d, cell = k;
                         }
                         const double before = a.cell(cell) ? a.cell(cell)->eval.fitness : -INFINITY;
                         a.offer({f}, {f, b});
                         best[cell] = std::max(best[cell], f);
                         ok = ok && a.cell(cell) && a.cell(cell)->eval.fitness >= before &&
                              a.cell(cell)->eval.fitness == best[cell];
                     }
                     for (std::size_t k = 0; k < cs->size(); ++k)
                         ok = ok && (a.cell(k) ? a.cell(k)->eval.fitness == best[k] : best[k] == -INFINITY);
                     return std::pair{ok, std::to_string(a.filled()) + " cells filled"};
                 }});
    c.push_back({"bandit cached stats equal window recomputation over 5000 updates", [] {
                     const auto actions = default_bandit_actions();
                     BanditState b(actions, 1000);
                     Rng r(106);
                     double worst = 0;
                     bool counts = true;
                     for (int i = 0; i < 5000; ++i) {
                         const std::size_t batch = 1 + r.index(100);
                         b.update(r.index(actions.size()), r.index(batch + 1), batch);
                         std::vector<std::size_t> n(actions.size(), 0);
                         std::vector<double> s(actions.size(), 0.0);
                         for (const auto& rec : b.window()) ++n[rec.action], s[rec.action] += rec.reward;
                         for (std::size_t k = 0; k < actions.size(); ++k) {
                             counts = counts && n[k] == b.count(k);
                             worst = std::max(worst, std::abs(s[k] - b.reward_sum(k)));
                         }
                     }
                     return std::pair{counts && worst <= kBanditTol, "max sum drift " + fmt(worst)};
                 }});
    c.push_back({"untried-first enumeration", [] {
                     BanditState b(default_bandit_actions(), 1000);
                     std::set<std::size_t> seen;
                     bool ordered = true;
                     for (std::size_t i = 0; i < 9; ++i) {
                         const std::size_t a = b.select();
                         ordered = ordered && a == i;
                         seen.insert(a);
                         b.update(a, 100 - 10 * i, 100);
                     }
                     return std::pair{ordered && seen.size() == 9, std::string("9 actions")};
                 }});
    c.push_back({"cma-es 5-d sphere below 1e-8 within 5000 evaluations", [] {
                     const auto r = cma_minimize(
                         [](std::span<const double> p) {
                             double s = 0;
                             for (double v : p) s += v * v;
                             return s;
                         },
                         5, kSphereBudget, 107, CmaOptions{std::vector<double>(5, 1.0), 0.5, 0, {}});
                     return std::pair{r.best_value < kSphereTarget, "best " + fmt(r.best_value) + " after " +
                                                                        std::to_string(r.evaluations) + " evaluations"};
                 }});
    c.push_back({"nearest centroid equals linear scan on 1000 queries", [] {
                     const CentroidSet cs = generate_centroids(1950, 3);
                     Rng r(108);
                     std::size_t bad = 0;
                     for (int i = 0; i < 1000; ++i) {
                         const Behavior b{r.uniform() * 2 - 1, r.uniform() * 2 - 1};
                         std::size_t want = 0;
                         double bd = INFINITY;
                         for (std::size_t k = 0; k < cs.size(); ++k) {
                             const double d = std::hypot(cs[k].x - b.x, cs[k].y - b.y);
                             if (d < bd) bd = d, want = k;
                         }
                         bad += cs.nearest(b) != want;
                     }
                     return std::pair{bad == 0, std::to_string(bad) + " mismatches"};
                 }});
    c.push_back({"bit-exact run reproducibility from (config, seed)", [] {
                     auto artifacts = [](const fs::path& dir) {
                         ExperimentConfig cfg = arm_config(20, 11, 2000);
                         const RunResult r = run_variant(cfg, Variant::DdeElites);
                         fs::create_directories(dir);
                         write_history_csv(dir / "history.csv", r.history);
                         write_archive_csv(dir / "archive.csv", r.archive);
                         save_decoder(dir / "decoder.bin", r.vae->decoder());
                         std::string all;
                         for (const char* f : {"history.csv", "archive.csv", "decoder.bin"}) {
                             std::ifstream in(dir / f, std::ios::binary);
                             std::stringstream ss;
                             ss << in.rdbuf();
                             all += ss.str();
                         }
                         return all;
                     };
                     const std::string a = artifacts(scratch() / "repro_a"), b = artifacts(scratch() / "repro_b");
                     return std::pair{a == b && !a.empty(), std::to_string(a.size()) + " artifact bytes compared"};
                 }});
    return c;
}

bool criterion4() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::size_t passed = 0;
    const auto checks = property_checks();
    for (const auto& c : checks) {
        const auto [ok, info] = c.run();
        pass = pass && ok;
        passed += ok;
        detail(std::string(ok ? "ok " : "bad") + "  " + c.name + ": " + info);
    }
    const double secs = seconds_since(t0);
    const bool fast = secs < kPropertySeconds;
    detail(std::string(fast ? "ok " : "bad") + "  runtime " + fmt(secs, 3) + " s < " + fmt(kPropertySeconds) + " s");
    pass = pass && fast;
    verdict(4, pass, "property suite, " + std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks");
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--only N]...\n");
            return 2;
        }
    }
    const std::vector<std::pair<int, bool (*)()>> criteria{
        {4, criterion4}, {1, criterion1}, {2, criterion2}, {3, criterion3}};
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = Clock::now();
        try {
            failures += !fn();
        } catch (const std::exception& e) {
            verdict(id, false, std::string("exception: ") + e.what());
            ++failures;
        }
        detail("criterion " + std::to_string(id) + " took " + fmt(seconds_since(t0), 4) + " s");
    }
    std::printf("%d criteria failed\n", failures);
    return failures ? 1 : 0;
}
