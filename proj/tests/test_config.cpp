#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "dde/bandit.hpp"
#include "dde/config.hpp"
#include "dde/errors.hpp"

using namespace dde;
namespace fs = std::filesystem;

TEST_CASE("hyperparameter defaults") {
    const ExperimentConfig c = ExperimentConfig::for_arm(20);
    CHECK(c.archive.bins == 1950);
    CHECK(c.run.batch == 100);
    CHECK(c.vae.latent_dim == 10);
    CHECK(c.vae.epochs == 5);
    CHECK(c.vae.train_interval == 1);
    CHECK(c.bandit.window == 1000);
    CHECK(c.bandit.actions.size() == 9);
    CHECK(c.operators.sigma_iso == 0.003);
    CHECK(c.operators.sigma_line_2 == 0.1);
    CHECK(c.operators.sigma_latent == 0.15);
    CHECK(ExperimentConfig::for_arm(200).vae.latent_dim == 32);
    CHECK(ExperimentConfig::for_arm(1000).vae.latent_dim == 32);
    CHECK(latent_dim_for_arm(5) == 5);
    CHECK(latent_dim_for_arm(50) == 10);
    CHECK(latent_dim_for_arm(500) == 32);
    CHECK(c.recreate_budget() == c.run.budget / 10);
}

TEST_CASE("round trip through text and file") {
    ExperimentConfig c = ExperimentConfig::for_arm(200);
    c.domain.angles = {-1.5, 2.25};
    c.archive.layout = CentroidLayout::Lloyd;
    c.archive.centroid_seed = 12345678901234ULL;
    c.operators.sigma_line_1 = 0.1 / 3.0;
    c.vae.train.kl_weight = 0.3;
    c.bandit.actions = {{0.125, 0.375, 0.5}, {0, 0, 1}};
    c.run.out = "some dir/out";
    c.run.threads = 3;
    c.targets.step_size = 0.7;
    CHECK(parse_config(to_text(c)) == c);
    const fs::path p = fs::temp_directory_path() / "dde_test_cfg.txt";
    save_config(p, c);
    CHECK(load_config(p) == c);
    CHECK(parse_config(to_text(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("parsing") {
    const ExperimentConfig c = parse_config("# comment\n run.budget = 500 # trailing\n\ndomain.n_joints=200\n");
    CHECK(c.run.budget == 500);
    CHECK(c.domain.n_joints == 200);
    CHECK(c.vae.latent_dim == 32);
    CHECK(parse_config("domain.n_joints = 200\nvae.latent_dim = 7").vae.latent_dim == 7);
    CHECK_THROWS_AS(parse_config("run.budgt = 5"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.budget = -5"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.budget = 5x"), ConfigError);
    CHECK_THROWS_AS(parse_config("just words"), ConfigError);
    CHECK_THROWS_AS(parse_config("archive.layout = hex"), ConfigError);
    CHECK_THROWS_AS(parse_config("bandit.actions = 0.5:0.6:0"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), IoError);
}

TEST_CASE("validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.run.budget = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.archive.bins = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.operators.sigma_iso = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("action lists") {
    const auto a = parse_actions("0:0:1, 0.5:0.5:0");
    REQUIRE(a.size() == 2);
    CHECK(a[1] == OperatorRatios{0.5, 0.5, 0.0});
    CHECK(parse_actions(format_actions(default_bandit_actions())) == default_bandit_actions());
}
