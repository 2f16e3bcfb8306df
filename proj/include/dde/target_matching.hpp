#pragma once

// Reaching fixed end-effector targets with CMA-ES, searching either the raw
// genome (logistic-squashed) or the latent space of a frozen decoder.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "dde/arm.hpp"
#include "dde/vae.hpp"

namespace dde {

enum class Encoding { Direct, Dde };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view name);

// 9 targets at radius 0.5 (angles 2*pi*i/9) then 9 at radius 0.9 (offset pi/9).
std::vector<Behavior> default_targets();

struct TargetTask {
    std::vector<Behavior> targets = default_targets();
    std::size_t budget_per_target = 10000;
    double step_size = 0.5;
};

struct TargetLogRow {
    std::size_t evaluations;
    double distance;        // best so far
    double joint_variance;  // of the best-so-far solution
};

struct TargetResult {
    std::size_t target_index = 0;
    Behavior target;
    double distance = 0.0;
    Genome genome;
    double joint_variance = 0.0;
    std::vector<TargetLogRow> log;
};

double logistic(double v);

// decoder == nullptr selects direct mode. Throws DimensionError when the
// decoder output does not match the arm, std::invalid_argument for targets
// outside the unit disk.
std::vector<TargetResult> run_target_matching(const TargetTask& task, const ArmConfig& arm, const Decoder* decoder,
                                              std::uint64_t seed, unsigned threads = 1);

struct TargetSummary {
    double median_distance = 0.0;
    double median_joint_variance = 0.0;
};

double median(std::vector<double> values);
TargetSummary summarize(const std::vector<TargetResult>& results);

// `target_index,mode,evaluations,distance,joint_variance`, one row per log step.
void write_target_trace_csv(const std::filesystem::path& path, Encoding mode, const std::vector<TargetResult>& results);
// `target_index,mode,target_x,target_y,evaluations,distance,joint_variance`, one row per target.
void write_target_results_csv(const std::filesystem::path& path, Encoding mode,
                              const std::vector<TargetResult>& results);
// `mode,targets,median_distance,median_joint_variance`
void write_target_summary_csv(const std::filesystem::path& path, Encoding mode, const std::vector<TargetResult>& results);

}  // namespace dde
