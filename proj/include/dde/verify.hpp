#pragma once

// Fast invariant suite behind `dde_elites verify`.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dde {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    // Test hook applied to every analytic gradient before the gradient check.
    std::function<void(std::span<double>)> corrupt_gradient;
};

VerifyReport run_verify(const VerifyOptions& opts = {});
std::string format_report(const VerifyReport& report);

}  // namespace dde
