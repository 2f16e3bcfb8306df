#include "dde/arm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dde/errors.hpp"

namespace dde {

ArmConfig ArmConfig::uniform(std::size_t n_joints, AngleRange range) {
    ArmConfig cfg;
    cfg.n_joints = n_joints;
    cfg.link_lengths.assign(n_joints, n_joints ? 1.0 / static_cast<double>(n_joints) : 0.0);
    cfg.angle_range = range;
    return cfg;
}

void ArmConfig::validate() const {
    if (n_joints == 0) throw std::invalid_argument("arm needs at least one joint");
    require_dims(link_lengths.size(), n_joints, "link_lengths");
    double total = 0.0;
    for (double l : link_lengths) {
        if (!(l > 0.0)) throw std::invalid_argument("link lengths must be positive");
        total += l;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("link lengths must sum to 1, got " + std::to_string(total));
    if (!(angle_range.lower < angle_range.upper))
        throw std::invalid_argument("angle range must satisfy lower < upper");
}

std::vector<double> genome_to_angles(std::span<const double> genome, const ArmConfig& cfg) {
    require_dims(genome.size(), cfg.n_joints, "genome");
    const double lo = cfg.angle_range.lower;
    const double span = cfg.angle_range.upper - lo;
    std::vector<double> angles(genome.size());
    for (std::size_t i = 0; i < genome.size(); ++i) angles[i] = lo + genome[i] * span;
    return angles;
}

Behavior forward_kinematics(std::span<const double> angles, const ArmConfig& cfg) {
    require_dims(angles.size(), cfg.n_joints, "angles");
    Behavior b;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        cumulative += angles[k];
        b.x += cfg.link_lengths[k] * std::cos(cumulative);
        b.y += cfg.link_lengths[k] * std::sin(cumulative);
    }
    return b;
}

double joint_variance(std::span<const double> angles) {
    if (angles.empty()) return 0.0;
    // Shifted by the first angle: exactly zero when all angles are equal.
    const double pivot = angles[0];
    const double n = static_cast<double>(angles.size());
    double mean = 0.0;
    for (double a : angles) mean += a - pivot;
    mean /= n;
    double ss = 0.0;
    for (double a : angles) {
        const double d = (a - pivot) - mean;
        ss += d * d;
    }
    return ss / n;
}

Evaluation evaluate(std::span<const double> genome, const ArmConfig& cfg) {
    const auto angles = genome_to_angles(genome, cfg);
    return {-joint_variance(angles), forward_kinematics(angles, cfg)};
}

}  // namespace dde
