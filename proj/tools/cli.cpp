#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>

#include "dde/archive.hpp"
#include "dde/config.hpp"
#include "dde/csv.hpp"
#include "dde/engine.hpp"
#include "dde/errors.hpp"
#include "dde/simd/kernels.hpp"
#include "dde/target_matching.hpp"
#include "dde/verify.hpp"

namespace fs = std::filesystem;

namespace dde::cli {
namespace {

struct Overrides {
    std::string config;
    std::optional<std::size_t> arm, budget, replicates;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "key = value configuration file");
    app->add_option("--arm", o.arm, "number of arm joints (20, 200, 1000 or custom)");
    app->add_option("--budget", o.budget, "evaluation budget");
    app->add_option("--seed", o.seed, "base random seed");
    app->add_option("--replicates", o.replicates, "number of runs with seeds seed, seed+1, ...");
    app->add_option("--threads", o.threads, "worker threads, 0 for all cores");
    app->add_option("--out", o.out, "output directory");
}

ExperimentConfig build_config(const Overrides& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig::for_arm(o.arm.value_or(20)) : load_config(o.config);
    if (o.arm) {
        cfg.domain.n_joints = *o.arm;
        cfg.vae.latent_dim = latent_dim_for_arm(*o.arm);
    }
    if (o.budget) cfg.run.budget = *o.budget;
    if (o.seed) cfg.run.seed = *o.seed;
    if (o.replicates) cfg.run.replicates = *o.replicates;
    if (o.threads) cfg.run.threads = *o.threads;
    if (o.out) cfg.run.out = *o.out;
    return cfg;
}

fs::path make_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory '" + p.string() + "'");
    return p;
}

fs::path replicate_dir(const ExperimentConfig& cfg, std::size_t rep) {
    const fs::path root(cfg.run.out);
    return make_dir(cfg.run.replicates > 1 ? root / ("rep_" + std::to_string(rep)) : root);
}

void print_summary(std::ostream& out, const fs::path& dir, std::uint64_t seed, const RunResult& r) {
    const auto& last = r.history.back();
    out << dir.string() << "  seed " << seed << "  evaluations " << last.evaluations << "  coverage "
        << csv::format(last.coverage) << "  mean_fitness " << csv::format(last.mean_fitness) << "\n";
}

void write_run(const fs::path& dir, const RunResult& r) {
    write_history_csv(dir / "history.csv", r.history);
    write_archive_csv(dir / "archive.csv", r.archive);
    write_centroids_csv(dir / "centroids.csv", r.archive.centroids());
}

int illuminate(const Overrides& o, const std::string& variant_name, std::ostream& out) {
    const Variant variant = parse_variant(variant_name);
    const ExperimentConfig base = build_config(o);
    base.validate();
    for (std::size_t rep = 0; rep < base.run.replicates; ++rep) {
        ExperimentConfig cfg = base;
        cfg.run.seed = base.run.seed + rep;
        const fs::path dir = replicate_dir(base, rep);
        save_config(dir / "config.txt", cfg);
        const RunResult r = run_variant(cfg, variant);
        write_run(dir, r);
        if (r.vae) save_decoder(dir / "decoder.bin", r.vae->decoder());
        if (variant == Variant::DdeElites) write_bandit_trace_csv(dir / "bandit.csv", r.history);
        print_summary(out, dir, cfg.run.seed, r);
    }
    return kOk;
}

int recreate(const Overrides& o, const std::string& decoder_path, std::ostream& out) {
    Overrides without_budget = o;
    without_budget.budget.reset();
    const ExperimentConfig base = build_config(without_budget);
    base.validate();
    const std::size_t budget = o.budget.value_or(base.recreate_budget());
    const Decoder decoder = load_decoder(decoder_path);
    for (std::size_t rep = 0; rep < base.run.replicates; ++rep) {
        ExperimentConfig cfg = base;
        cfg.run.seed = base.run.seed + rep;
        const fs::path dir = replicate_dir(base, rep);
        const RunResult r = run_dde_search(decoder, cfg, budget);
        save_config(dir / "config.txt", cfg);
        write_run(dir, r);
        print_summary(out, dir, cfg.run.seed, r);
    }
    return kOk;
}

int targets(const Overrides& o, const std::string& mode_name, const std::string& decoder_path, std::ostream& out) {
    const Encoding mode = parse_encoding(mode_name);
    Overrides without_budget = o;
    without_budget.budget.reset();
    ExperimentConfig base = build_config(without_budget);
    if (o.budget) base.targets.budget_per_target = *o.budget;
    base.validate();
    if (mode == Encoding::Dde && decoder_path.empty()) throw ConfigError("targets --mode dde requires --decoder");
    std::optional<Decoder> decoder;
    if (mode == Encoding::Dde) decoder = load_decoder(decoder_path);

    TargetTask task;
    task.budget_per_target = base.targets.budget_per_target;
    task.step_size = base.targets.step_size;
    for (std::size_t rep = 0; rep < base.run.replicates; ++rep) {
        const std::uint64_t seed = base.run.seed + rep;
        const fs::path dir = replicate_dir(base, rep);
        const auto results =
            run_target_matching(task, base.arm(), decoder ? &*decoder : nullptr, seed, base.run.threads);
        const std::string m(to_string(mode));
        write_target_trace_csv(dir / ("targets_" + m + "_trace.csv"), mode, results);
        write_target_results_csv(dir / ("targets_" + m + "_results.csv"), mode, results);
        write_target_summary_csv(dir / ("targets_" + m + "_summary.csv"), mode, results);
        const TargetSummary s = summarize(results);
        out << dir.string() << "  seed " << seed << "  mode " << m << "  median_distance "
            << csv::format(s.median_distance) << "  median_joint_variance " << csv::format(s.median_joint_variance)
            << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quality-diversity search with data-driven encodings on the planar arm"};
    app.require_subcommand(1);
    std::string simd_backend;
    app.add_option("--simd", simd_backend, "kernel backend: scalar or avx2");

    Overrides ill_o, rec_o, tgt_o;
    std::string variant = "dde-elites", decoder_rec, decoder_tgt, mode = "direct";
    std::uint64_t verify_seed = 1;

    auto* ill = app.add_subcommand("illuminate", "run a MAP-Elites variant and write its artifacts");
    add_common(ill, ill_o);
    ill->add_option("--variant", variant, "map-elites, me-line, dde-xover or dde-elites");

    auto* rec = app.add_subcommand("recreate", "MAP-Elites in the latent space of a saved decoder");
    add_common(rec, rec_o);
    rec->add_option("--decoder", decoder_rec, "decoder file written by illuminate")->required();

    auto* tgt = app.add_subcommand("targets", "CMA-ES target matching with the direct or decoder encoding");
    add_common(tgt, tgt_o);
    tgt->add_option("--mode", mode, "direct or dde");
    tgt->add_option("--decoder", decoder_tgt, "decoder file (dde mode)");

    auto* ver = app.add_subcommand("verify", "run the fast invariant suite");
    ver->add_option("--seed", verify_seed, "seed for the randomized checks");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (!simd_backend.empty() && !simd::select_backend(simd_backend))
            throw ConfigError("simd backend '" + simd_backend + "' is not available");
        if (ill->parsed()) return illuminate(ill_o, variant, out);
        if (rec->parsed()) return recreate(rec_o, decoder_rec, out);
        if (tgt->parsed()) return targets(tgt_o, mode, decoder_tgt, out);
        VerifyOptions vo;
        vo.seed = verify_seed;
        const VerifyReport report = run_verify(vo);
        out << format_report(report);
        return report.all_passed() ? kOk : kVerifyFailed;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << "\n";
        return kIoError;
    } catch (const DimensionError& e) {
        err << "dimension error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace dde::cli
