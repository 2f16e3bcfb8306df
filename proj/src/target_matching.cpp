#include "dde/target_matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dde/cmaes.hpp"
#include "dde/csv.hpp"
#include "dde/errors.hpp"
#include "dde/parallel.hpp"
#include "dde/rng.hpp"

namespace dde {

std::string_view to_string(Encoding e) { return e == Encoding::Direct ? "direct" : "dde"; }

Encoding parse_encoding(std::string_view name) {
    if (name == "direct") return Encoding::Direct;
    if (name == "dde") return Encoding::Dde;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected direct or dde)");
}

std::vector<Behavior> default_targets() {
    std::vector<Behavior> out;
    const double step = 2.0 * std::numbers::pi / 9.0;
    for (int i = 0; i < 9; ++i) out.push_back({0.5 * std::cos(step * i), 0.5 * std::sin(step * i)});
    for (int i = 0; i < 9; ++i) {
        const double a = step * i + step / 2.0;
        out.push_back({0.9 * std::cos(a), 0.9 * std::sin(a)});
    }
    return out;
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

namespace {

Genome to_genome(std::span<const double> point, const Decoder* decoder) {
    if (decoder) return decoder->decode(point);
    Genome g(point.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = logistic(point[i]);
    return g;
}

}  // namespace

std::vector<TargetResult> run_target_matching(const TargetTask& task, const ArmConfig& arm, const Decoder* decoder,
                                              std::uint64_t seed, unsigned threads) {
    arm.validate();
    if (decoder) require_dims(decoder->output_dim(), arm.n_joints, "decoder output_dim");
    for (const auto& t : task.targets)
        if (!(std::hypot(t.x, t.y) <= 1.0)) throw std::invalid_argument("target outside the unit disk");
    const std::size_t dim = decoder ? decoder->latent_dim() : arm.n_joints;

    std::vector<TargetResult> results(task.targets.size());
    const Rng master(seed);
    parallel_for(task.targets.size(), resolve_threads(threads), [&](std::size_t i) {
        const Behavior target = task.targets[i];
        auto distance = [&](const Genome& g) {
            const Behavior b = forward_kinematics(genome_to_angles(g, arm), arm);
            return std::hypot(b.x - target.x, b.y - target.y);
        };
        TargetResult& r = results[i];
        r.target_index = i;
        r.target = target;
        CmaOptions opts;
        opts.initial_step = task.step_size;
        opts.on_generation = [&](std::size_t evals, std::span<const double> best, double value) {
            const Genome g = to_genome(best, decoder);
            r.log.push_back({evals, value, joint_variance(genome_to_angles(g, arm))});
        };
        const std::uint64_t run_seed = master.derive("target-" + std::to_string(i)).seed();
        const CmaResult cma = cma_minimize([&](std::span<const double> p) { return distance(to_genome(p, decoder)); },
                                           dim, task.budget_per_target, run_seed, opts);
        r.genome = to_genome(cma.best_point, decoder);
        r.distance = cma.best_value;
        r.joint_variance = joint_variance(genome_to_angles(r.genome, arm));
    });
    return results;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TargetSummary summarize(const std::vector<TargetResult>& results) {
    std::vector<double> d, v;
    for (const auto& r : results) {
        d.push_back(r.distance);
        v.push_back(r.joint_variance);
    }
    return {median(d), median(v)};
}

void write_target_trace_csv(const std::filesystem::path& path, Encoding mode, const std::vector<TargetResult>& results) {
    csv::Writer w(path, "target_index,mode,evaluations,distance,joint_variance");
    const std::string m(to_string(mode));
    for (const auto& r : results)
        for (const auto& row : r.log)
            w.row({std::to_string(r.target_index), m, std::to_string(row.evaluations), csv::format(row.distance),
                   csv::format(row.joint_variance)});
    w.close();
}

void write_target_results_csv(const std::filesystem::path& path, Encoding mode,
                              const std::vector<TargetResult>& results) {
    csv::Writer w(path, "target_index,mode,target_x,target_y,evaluations,distance,joint_variance");
    const std::string m(to_string(mode));
    for (const auto& r : results)
        w.row({std::to_string(r.target_index), m, csv::format(r.target.x), csv::format(r.target.y),
               std::to_string(r.log.empty() ? 0 : r.log.back().evaluations), csv::format(r.distance),
               csv::format(r.joint_variance)});
    w.close();
}

void write_target_summary_csv(const std::filesystem::path& path, Encoding mode,
                              const std::vector<TargetResult>& results) {
    const TargetSummary s = summarize(results);
    csv::Writer w(path, "mode,targets,median_distance,median_joint_variance");
    w.row({std::string(to_string(mode)), std::to_string(results.size()), csv::format(s.median_distance),
           csv::format(s.median_joint_variance)});
    w.close();
}

}  // namespace dde
