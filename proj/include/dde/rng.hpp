#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dde {

// Seeded random stream. Independent sub-streams are derived from the seed by a
// fixed label, so turning one component on or off never shifts the draws of
// another. Copying an Rng copies its full state, including the cached normal.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng derive(std::string_view label) const;

    double uniform();  // [0, 1)
    double normal();   // N(0, 1)
    std::size_t index(std::size_t n);  // uniform in [0, n), n > 0

    std::mt19937_64& engine() { return engine_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dde
