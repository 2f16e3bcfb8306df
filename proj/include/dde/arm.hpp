#pragma once

// Planar n-joint arm: genome -> joint angles -> end-effector position, with the
// negative joint variance as fitness.

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace dde {

using Genome = std::vector<double>;

struct Behavior {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Behavior&, const Behavior&) = default;
};

struct Evaluation {
    double fitness = 0.0;  // -(joint variance), <= 0
    Behavior behavior;
};

struct AngleRange {
    double lower = -std::numbers::pi;
    double upper = std::numbers::pi;
};

struct ArmConfig {
    std::size_t n_joints = 0;
    std::vector<double> link_lengths;  // sums to 1
    AngleRange angle_range;

    // n equal links of length 1/n.
    static ArmConfig uniform(std::size_t n_joints, AngleRange range = {});
    // Throws std::invalid_argument on a broken invariant.
    void validate() const;
};

std::vector<double> genome_to_angles(std::span<const double> genome, const ArmConfig& cfg);
Behavior forward_kinematics(std::span<const double> angles, const ArmConfig& cfg);
// Population variance (1/n normalization) of the angles.
double joint_variance(std::span<const double> angles);
Evaluation evaluate(std::span<const double> genome, const ArmConfig& cfg);

}  // namespace dde
