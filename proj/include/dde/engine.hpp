#pragma once

// MAP-Elites generations, the DDE-Elites loop and MAP-Elites over a frozen
// decoder.
//
// Accounting: the initial population (batch_size random genomes) is
// generation 0 and counts against the budget like every later generation, so a
// run of budget B with batch b has exactly B / b history rows.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dde/archive.hpp"
#include "dde/bandit.hpp"
#include "dde/config.hpp"
#include "dde/rng.hpp"
#include "dde/vae.hpp"
#include "dde/variation.hpp"

namespace dde {

enum class Variant { MapElites, MeLine, DdeXover, DdeElites };

std::string_view to_string(Variant v);
// "map-elites", "me-line", "dde-xover", "dde-elites"; throws ConfigError.
Variant parse_variant(std::string_view name);

struct HistoryRow {
    std::size_t generation = 0;
    std::size_t evaluations = 0;  // cumulative
    double coverage = 0.0;
    double mean_fitness = 0.0;
    long action = -1;  // bandit action index, -1 when no bandit chose
    double reward = 0.0;  // accepted / evaluated this generation
};

struct RunState {
    explicit RunState(Archive a) : archive(std::move(a)) {}

    Archive archive;
    std::optional<VaeModel> vae;
    std::optional<BanditState> bandit;
    std::size_t evaluations_used = 0;
    std::vector<HistoryRow> history;
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;
using ChildFactory = std::function<std::vector<Genome>(const Archive&, Rng&)>;
using ProgressFn = std::function<void(const HistoryRow&)>;

// Evaluates all genomes (in parallel when threads > 1), then offers them to
// the archive in index order. Returns the number accepted.
std::size_t evaluate_and_offer(RunState& state, std::vector<Genome> genomes, const Evaluator& evaluate,
                               unsigned threads);

// One generation: build a batch, evaluate and offer it. Returns the number of
// accepted children.
std::size_t map_elites_generation(RunState& state, const ChildFactory& make_children, const Evaluator& evaluate,
                                  Rng& rng, unsigned threads = 1);
std::size_t map_elites_generation(RunState& state, const OperatorRatios& ratios, const VariationConfig& variation,
                                  std::size_t batch_size, const ArmConfig& arm, Rng& rng, unsigned threads = 1);

// Appends the metrics row for a completed generation.
void record_generation(RunState& state, long action, std::size_t accepted, std::size_t evaluated);

struct RunResult {
    Archive archive;
    std::optional<VaeModel> vae;
    std::vector<HistoryRow> history;
};

RunResult run_variant(const ExperimentConfig& cfg, Variant variant, const ProgressFn& progress = {});
inline RunResult run_dde_elites(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
    return run_variant(cfg, Variant::DdeElites, progress);
}

// MAP-Elites with latent genomes decoded by a frozen decoder: unbounded
// isometric mutation of strength operators.sigma_latent, latent seeds drawn
// from N(0, I). The archive stores the latent genomes.
RunResult run_dde_search(const Decoder& decoder, const ExperimentConfig& cfg, std::size_t budget,
                         const ProgressFn& progress = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& rows);
// generation,action,reward
void write_bandit_trace_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& rows);

}  // namespace dde
