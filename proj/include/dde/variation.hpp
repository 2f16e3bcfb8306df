#pragma once

// Child-generating operators: isometric mutation, line mutation and
// reconstructive crossover, plus ratio-driven batch creation.

#include <span>
#include <vector>

#include "dde/archive.hpp"
#include "dde/arm.hpp"
#include "dde/rng.hpp"
#include "dde/vae.hpp"

namespace dde {

// Probabilities of [reconstructive crossover, line mutation, isometric mutation].
struct OperatorRatios {
    double xover = 0.0;
    double line = 0.0;
    double iso = 1.0;

    // Throws std::invalid_argument unless each is in [0,1] and they sum to 1.
    void validate() const;
    friend bool operator==(const OperatorRatios&, const OperatorRatios&) = default;
};

struct VariationConfig {
    double sigma_iso = 0.003;
    double sigma_line_1 = 0.003;  // isometric part of line mutation
    double sigma_line_2 = 0.1;    // directional part
    double sigma_latent = 0.15;   // isometric mutation in latent space

    void validate() const;
    friend bool operator==(const VariationConfig&, const VariationConfig&) = default;
};

enum class Operator { Crossover, Line, Isometric };

// clamp(x + sigma * N(0, I), 0, 1)
Genome isometric_mutation(std::span<const double> x, double sigma, Rng& rng);
// x + sigma * N(0, I) with no bounds (latent genomes)
Genome unbounded_isometric_mutation(std::span<const double> x, double sigma, Rng& rng);
// clamp(x + s1 * N(0, I) + s2 * (x - y) * N(0, 1), 0, 1); the n per-gene draws
// come first, then the one shared scalar draw.
Genome line_mutation(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg, Rng& rng);
// (x + decode(encode(x).mu)) / 2
Genome reconstructive_crossover(std::span<const double> x, const VaeModel& m);

struct Batch {
    std::vector<Genome> children;
    std::vector<Operator> operators;  // parallel to children
};

// Each child picks its operator independently with the given probabilities;
// parents are uniform over occupied cells. Throws ConfigError if crossover has
// non-zero probability but no model is given, EmptyArchiveError when empty.
Batch make_batch(const Archive& archive, const OperatorRatios& ratios, std::size_t batch_size, const VaeModel* model,
                 const VariationConfig& cfg, Rng& rng);

}  // namespace dde
