#include "dde/variation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dde/errors.hpp"

namespace dde {

void OperatorRatios::validate() const {
    for (double p : {xover, line, iso})
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("operator ratios must lie in [0, 1]");
    if (std::abs(xover + line + iso - 1.0) > 1e-12) throw std::invalid_argument("operator ratios must sum to 1");
}

void VariationConfig::validate() const {
    for (double s : {sigma_iso, sigma_line_1, sigma_line_2, sigma_latent})
        if (!(s > 0.0)) throw std::invalid_argument("mutation strengths must be positive");
}

Genome isometric_mutation(std::span<const double> x, double sigma, Rng& rng) {
    Genome child(x.begin(), x.end());
    for (double& v : child) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
    return child;
}

Genome unbounded_isometric_mutation(std::span<const double> x, double sigma, Rng& rng) {
    Genome child(x.begin(), x.end());
    for (double& v : child) v += sigma * rng.normal();
    return child;
}

Genome line_mutation(std::span<const double> x, std::span<const double> y, const VariationConfig& cfg, Rng& rng) {
    require_dims(y.size(), x.size(), "line mutation partner");
    Genome child(x.begin(), x.end());
    for (double& v : child) v += cfg.sigma_line_1 * rng.normal();
    const double shared = rng.normal();
    for (std::size_t i = 0; i < child.size(); ++i)
        child[i] = std::clamp(child[i] + cfg.sigma_line_2 * (x[i] - y[i]) * shared, 0.0, 1.0);
    return child;
}

Genome reconstructive_crossover(std::span<const double> x, const VaeModel& m) {
    require_dims(x.size(), m.input_dim(), "crossover parent");
    Genome child = m.reconstruct(x);
    for (std::size_t i = 0; i < child.size(); ++i) child[i] = (x[i] + child[i]) / 2.0;
    return child;
}

Batch make_batch(const Archive& archive, const OperatorRatios& ratios, std::size_t batch_size, const VaeModel* model,
                 const VariationConfig& cfg, Rng& rng) {
    if (ratios.xover > 0.0 && !model) throw ConfigError("reconstructive crossover requested without a VAE model");
    if (archive.filled() == 0) throw EmptyArchiveError();
    Batch b;
    b.children.reserve(batch_size);
    b.operators.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const double u = rng.uniform();
        const Operator op = u < ratios.xover               ? Operator::Crossover
                            : u < ratios.xover + ratios.line ? Operator::Line
                                                             : Operator::Isometric;
        const Genome& parent = archive.random_elite(rng).genome;
        switch (op) {
            case Operator::Crossover:
                b.children.push_back(reconstructive_crossover(parent, *model));
                break;
            case Operator::Line: {
                const Genome& other = archive.random_elite(rng).genome;
                b.children.push_back(line_mutation(parent, other, cfg, rng));
                break;
            }
            case Operator::Isometric:
                b.children.push_back(isometric_mutation(parent, cfg.sigma_iso, rng));
                break;
        }
        b.operators.push_back(op);
    }
    return b;
}

}  // namespace dde
