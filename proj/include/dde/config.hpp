#pragma once

// Experiment configuration and its key-value file format.
//
// One `key = value` per line, `#` starts a comment. Keys mirror the struct
// fields (`domain.n_joints`, `vae.latent_dim`, `run.budget`, ...). Unknown keys
// and malformed values are ConfigErrors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dde/archive.hpp"
#include "dde/arm.hpp"
#include "dde/variation.hpp"
#include "dde/vae.hpp"

namespace dde {

struct DomainConfig {
    std::size_t n_joints = 20;
    AngleRange angles;
    friend bool operator==(const DomainConfig& a, const DomainConfig& b) {
        return a.n_joints == b.n_joints && a.angles.lower == b.angles.lower && a.angles.upper == b.angles.upper;
    }
};

struct ArchiveConfig {
    std::size_t bins = 1950;
    std::uint64_t centroid_seed = 0;
    CentroidLayout layout = CentroidLayout::Ring;
    friend bool operator==(const ArchiveConfig&, const ArchiveConfig&) = default;
};

struct VaeConfig {
    std::size_t latent_dim = 10;
    std::size_t hidden_dim = 128;
    std::size_t epochs = 5;
    std::size_t train_interval = 1;  // generations between trainings
    TrainOptions train;
    friend bool operator==(const VaeConfig& a, const VaeConfig& b) {
        return a.latent_dim == b.latent_dim && a.hidden_dim == b.hidden_dim && a.epochs == b.epochs &&
               a.train_interval == b.train_interval && a.train.learning_rate == b.train.learning_rate &&
               a.train.beta1 == b.train.beta1 && a.train.beta2 == b.train.beta2 &&
               a.train.adam_eps == b.train.adam_eps && a.train.batch_size == b.train.batch_size &&
               a.train.kl_weight == b.train.kl_weight;
    }
};

struct BanditConfig {
    std::vector<OperatorRatios> actions;
    std::size_t window = 1000;
    friend bool operator==(const BanditConfig&, const BanditConfig&) = default;
};

struct RunConfig {
    std::size_t batch = 100;
    std::size_t budget = 100000;
    std::uint64_t seed = 1;
    std::size_t replicates = 1;
    unsigned threads = 0;  // 0: all available cores
    std::string out = "out";
    std::size_t recreate_budget = 0;  // 0: budget / 10
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct TargetsConfig {
    std::size_t budget_per_target = 10000;
    double step_size = 0.5;
    friend bool operator==(const TargetsConfig&, const TargetsConfig&) = default;
};

struct ExperimentConfig {
    DomainConfig domain;
    ArchiveConfig archive;
    VariationConfig operators;
    VaeConfig vae;
    BanditConfig bandit;
    RunConfig run;
    TargetsConfig targets;

    ExperimentConfig();
    // Defaults for an n-joint arm, latent length chosen by latent_dim_for_arm.
    static ExperimentConfig for_arm(std::size_t n_joints);

    ArmConfig arm() const { return ArmConfig::uniform(domain.n_joints, domain.angles); }
    std::size_t recreate_budget() const { return run.recreate_budget ? run.recreate_budget : run.budget / 10; }
    // Throws ConfigError describing the first broken constraint.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// 10 for the 20-joint arm, 32 for 200/1000 joints; custom sizes get
// min(10, n) below 200 joints and 32 otherwise.
std::size_t latent_dim_for_arm(std::size_t n_joints);

std::string to_text(const ExperimentConfig& cfg);
// Keys not present keep their defaults; vae.latent_dim, when absent, follows
// latent_dim_for_arm(domain.n_joints).
ExperimentConfig parse_config(const std::string& text);
// Applies `key = value` to cfg; throws ConfigError for unknown keys or values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string format_actions(const std::vector<OperatorRatios>& actions);
std::vector<OperatorRatios> parse_actions(const std::string& text);

}  // namespace dde
