#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "dde/arm.hpp"
#include "dde/rng.hpp"

using namespace dde;
constexpr double kPi = std::numbers::pi;

namespace {

// O(n^2) literal sum: p = sum_i l_i * (cos, sin)(sum_{j<=i} y_j).
Behavior literal_kinematics(const std::vector<double>& y, const std::vector<double>& l) {
    double x = 0, yy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double a = 0;
        for (std::size_t j = 0; j <= i; ++j) a += y[j];
        x += l[i] * std::cos(a);
        yy += l[i] * std::sin(a);
    }
    return {x, yy};
}

std::vector<double> random_genome(Rng& r, std::size_t n) {
    std::vector<double> g(n);
    for (double& v : g) v = r.uniform();
    return g;
}

}  // namespace

TEST_CASE("genome to angles") {
    CHECK(genome_to_angles(std::vector<double>{0.5, 0.5}, ArmConfig::uniform(2)) == std::vector<double>{0.0, 0.0});
    CHECK(genome_to_angles(std::vector<double>{0.0}, ArmConfig::uniform(1))[0] == doctest::Approx(-kPi).epsilon(1e-15));
    const auto a = genome_to_angles(std::vector<double>{0.75, 0.25}, ArmConfig::uniform(2));
    CHECK(a[0] == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(-kPi / 2).epsilon(1e-15));
    CHECK_THROWS_AS(genome_to_angles(std::vector<double>{0.5}, ArmConfig::uniform(2)), std::invalid_argument);
}

TEST_CASE("forward kinematics closed forms") {
    const Behavior straight = forward_kinematics(std::vector<double>(4, 0.0), ArmConfig::uniform(4));
    CHECK(straight.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(straight.y == doctest::Approx(0.0));
    const Behavior quarter = forward_kinematics(std::vector<double>{kPi / 2}, ArmConfig::uniform(1));
    CHECK(std::abs(quarter.x) < 1e-15);
    CHECK(quarter.y == doctest::Approx(1.0));
    const Behavior two = forward_kinematics(std::vector<double>{kPi / 2, kPi / 2}, ArmConfig::uniform(2));
    CHECK(two.x == doctest::Approx(-0.5));
    CHECK(two.y == doctest::Approx(0.5));
}

TEST_CASE("fitness examples") {
    CHECK(joint_variance(std::vector<double>{0.3, 0.3, 0.3}) == 0.0);
    CHECK(-joint_variance(std::vector<double>{0.0, kPi}) == doctest::Approx(-kPi * kPi / 4).epsilon(1e-14));
    const Evaluation e = evaluate(std::vector<double>(20, 0.5), ArmConfig::uniform(20));
    CHECK(e.fitness == 0.0);
    CHECK(e.behavior.x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(e.behavior.y) < 1e-15);
}

TEST_CASE("config validation") {
    ArmConfig bad = ArmConfig::uniform(3);
    bad.link_lengths[0] += 1e-6;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS(ArmConfig::uniform(3, AngleRange{1.0, -1.0}).validate());
    CHECK_NOTHROW(ArmConfig::uniform(1000).validate());
}

TEST_CASE("kinematics matches the literal-sum oracle") {
    Rng r(3);
    for (std::size_t n : {1u, 5u, 20u}) {
        const ArmConfig cfg = ArmConfig::uniform(n);
        for (int i = 0; i < 100; ++i) {
            const auto y = genome_to_angles(random_genome(r, n), cfg);
            const Behavior a = forward_kinematics(y, cfg), b = literal_kinematics(y, cfg.link_lengths);
            CHECK(std::abs(a.x - b.x) < 1e-9);
            CHECK(std::abs(a.y - b.y) < 1e-9);
        }
    }
}

TEST_CASE("properties over random genomes") {
    Rng r(4);
    const ArmConfig cfg = ArmConfig::uniform(20);
    for (int i = 0; i < 1000; ++i) {
        const auto g = random_genome(r, 20);
        const Evaluation e = evaluate(g, cfg);
        CHECK(e.fitness <= 0.0);
        CHECK(e.fitness < 0.0);  // random angles are never all equal
        CHECK(std::hypot(e.behavior.x, e.behavior.y) <= 1.0 + 1e-9);
    }
    for (int i = 0; i < 100; ++i) {
        auto y = genome_to_angles(random_genome(r, 20), cfg);
        const Behavior b0 = forward_kinematics(y, cfg);
        const double delta = r.uniform() * 2.0 * kPi;
        y[0] += delta;
        const Behavior b1 = forward_kinematics(y, cfg);
        CHECK(std::abs(std::hypot(b0.x, b0.y) - std::hypot(b1.x, b1.y)) < 1e-9);
        const double rx = b0.x * std::cos(delta) - b0.y * std::sin(delta);
        const double ry = b0.x * std::sin(delta) + b0.y * std::cos(delta);
        CHECK(std::abs(rx - b1.x) < 1e-9);
        CHECK(std::abs(ry - b1.y) < 1e-9);
    }
}

TEST_CASE("population variance oracle") {
    Rng r(8);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> y(1 + r.index(30));
        for (double& v : y) v = r.uniform() * 6 - 3;
        long double mean = 0;
        for (double v : y) mean += v;
        mean /= y.size();
        long double var = 0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= y.size();
        CHECK(joint_variance(y) == doctest::Approx(static_cast<double>(var)).epsilon(1e-12));
    }
}
