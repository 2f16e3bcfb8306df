#include "dde/engine.hpp"

#include <stdexcept>
#include <string>

#include "dde/csv.hpp"
#include "dde/errors.hpp"
#include "dde/parallel.hpp"

namespace dde {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::MapElites: return "map-elites";
        case Variant::MeLine: return "me-line";
        case Variant::DdeXover: return "dde-xover";
        case Variant::DdeElites: return "dde-elites";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : {Variant::MapElites, Variant::MeLine, Variant::DdeXover, Variant::DdeElites})
        if (to_string(v) == name) return v;
    throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::size_t evaluate_and_offer(RunState& state, std::vector<Genome> genomes, const Evaluator& evaluate,
                               unsigned threads) {
    std::vector<Evaluation> evals(genomes.size());
    parallel_for(genomes.size(), threads, [&](std::size_t i) { evals[i] = evaluate(genomes[i]); });
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < genomes.size(); ++i)
        if (state.archive.offer(std::move(genomes[i]), evals[i]) == OfferResult::Accepted) ++accepted;
    state.evaluations_used += genomes.size();
    return accepted;
}

std::size_t map_elites_generation(RunState& state, const ChildFactory& make_children, const Evaluator& evaluate,
                                  Rng& rng, unsigned threads) {
    if (state.archive.filled() == 0) throw EmptyArchiveError();
    return evaluate_and_offer(state, make_children(state.archive, rng), evaluate, threads);
}

std::size_t map_elites_generation(RunState& state, const OperatorRatios& ratios, const VariationConfig& variation,
                                  std::size_t batch_size, const ArmConfig& arm, Rng& rng, unsigned threads) {
    const VaeModel* model = state.vae ? &*state.vae : nullptr;
    return map_elites_generation(
        state,
        [&](const Archive& a, Rng& r) { return make_batch(a, ratios, batch_size, model, variation, r).children; },
        [&](std::span<const double> g) { return evaluate(g, arm); }, rng, threads);
}

void record_generation(RunState& state, long action, std::size_t accepted, std::size_t evaluated) {
    const auto m = state.archive.metrics();
    HistoryRow row;
    row.generation = state.history.size();
    row.evaluations = state.evaluations_used;
    row.coverage = m.coverage;
    row.mean_fitness = m.mean_fitness;
    row.action = action;
    row.reward = evaluated ? static_cast<double>(accepted) / static_cast<double>(evaluated) : 0.0;
    state.history.push_back(row);
}

namespace {

std::size_t generation_count(const ExperimentConfig& cfg, std::size_t budget) {
    if (cfg.run.batch == 0 || budget < cfg.run.batch)
        throw std::invalid_argument("evaluation budget " + std::to_string(budget) + " is smaller than one batch (" +
                                    std::to_string(cfg.run.batch) + ")");
    return budget / cfg.run.batch;
}

Archive make_archive(const ExperimentConfig& cfg) {
    return Archive(std::make_shared<const CentroidSet>(
        generate_centroids(cfg.archive.bins, cfg.archive.centroid_seed, cfg.archive.layout)));
}

}  // namespace

RunResult run_variant(const ExperimentConfig& cfg, Variant variant, const ProgressFn& progress) {
    cfg.validate();
    const std::size_t generations = generation_count(cfg, cfg.run.budget);
    const ArmConfig arm = cfg.arm();
    const unsigned threads = resolve_threads(cfg.run.threads);
    const std::size_t batch = cfg.run.batch;

    const Rng master(cfg.run.seed);
    Rng init_rng = master.derive("init");
    Rng variation_rng = master.derive("variation");
    Rng train_rng = master.derive("vae-train");

    RunState state(make_archive(cfg));
    const bool uses_vae = variant == Variant::DdeXover || variant == Variant::DdeElites;
    if (uses_vae)
        state.vae.emplace(VaeShape{arm.n_joints, cfg.vae.latent_dim, cfg.vae.hidden_dim}, master.derive("vae").seed());
    if (variant == Variant::DdeElites) state.bandit.emplace(cfg.bandit.actions, cfg.bandit.window);

    const Evaluator evaluator = [&](std::span<const double> g) { return evaluate(g, arm); };

    std::vector<Genome> initial(batch, Genome(arm.n_joints));
    for (auto& g : initial)
        for (double& v : g) v = init_rng.uniform();
    const std::size_t seeded = evaluate_and_offer(state, std::move(initial), evaluator, threads);
    record_generation(state, -1, seeded, batch);
    if (progress) progress(state.history.back());

    for (std::size_t gen = 1; gen < generations; ++gen) {
        if (uses_vae && (gen - 1) % cfg.vae.train_interval == 0)
            state.vae->train(state.archive.genomes(), cfg.vae.epochs, train_rng, cfg.vae.train);

        long action = -1;
        OperatorRatios ratios;
        switch (variant) {
            case Variant::MapElites: ratios = {0.0, 0.0, 1.0}; break;
            case Variant::MeLine: ratios = {0.0, 1.0, 0.0}; break;
            case Variant::DdeXover: ratios = {1.0, 0.0, 0.0}; break;
            case Variant::DdeElites:
                action = static_cast<long>(state.bandit->select());
                ratios = state.bandit->actions()[static_cast<std::size_t>(action)];
                break;
        }
        const std::size_t accepted =
            map_elites_generation(state, ratios, cfg.operators, batch, arm, variation_rng, threads);
        if (state.bandit) state.bandit->update(static_cast<std::size_t>(action), accepted, batch);
        record_generation(state, action, accepted, batch);
        if (progress) progress(state.history.back());
    }
    return {std::move(state.archive), std::move(state.vae), std::move(state.history)};
}

RunResult run_dde_search(const Decoder& decoder, const ExperimentConfig& cfg, std::size_t budget,
                         const ProgressFn& progress) {
    cfg.validate();
    const ArmConfig arm = cfg.arm();
    require_dims(decoder.output_dim(), arm.n_joints, "decoder output (arm joints)");
    require_dims(decoder.latent_dim(), cfg.vae.latent_dim, "decoder latent length (vae.latent_dim)");
    const std::size_t generations = generation_count(cfg, budget);
    const unsigned threads = resolve_threads(cfg.run.threads);
    const std::size_t batch = cfg.run.batch;
    const double sigma = cfg.operators.sigma_latent;

    const Rng master(cfg.run.seed);
    Rng init_rng = master.derive("init");
    Rng variation_rng = master.derive("variation");

    RunState state(make_archive(cfg));
    const Evaluator evaluator = [&](std::span<const double> z) { return evaluate(decoder.decode(z), arm); };

    std::vector<Genome> initial(batch, Genome(decoder.latent_dim()));
    for (auto& z : initial)
        for (double& v : z) v = init_rng.normal();
    const std::size_t seeded = evaluate_and_offer(state, std::move(initial), evaluator, threads);
    record_generation(state, -1, seeded, batch);
    if (progress) progress(state.history.back());

    const ChildFactory mutate = [&](const Archive& a, Rng& rng) {
        std::vector<Genome> children;
        children.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i)
            children.push_back(unbounded_isometric_mutation(a.random_elite(rng).genome, sigma, rng));
        return children;
    };
    for (std::size_t gen = 1; gen < generations; ++gen) {
        const std::size_t accepted = map_elites_generation(state, mutate, evaluator, variation_rng, threads);
        record_generation(state, -1, accepted, batch);
        if (progress) progress(state.history.back());
    }
    return {std::move(state.archive), std::nullopt, std::move(state.history)};
}

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& rows) {
    csv::Writer w(path, "generation,evaluations,coverage,mean_fitness,action,reward");
    for (const auto& r : rows)
        w.row({std::to_string(r.generation), std::to_string(r.evaluations), csv::format(r.coverage),
               csv::format(r.mean_fitness), std::to_string(r.action), csv::format(r.reward)});
    w.close();
}

void write_bandit_trace_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& rows) {
    csv::Writer w(path, "generation,action,reward");
    for (const auto& r : rows) w.row({std::to_string(r.generation), std::to_string(r.action), csv::format(r.reward)});
    w.close();
}

}  // namespace dde
