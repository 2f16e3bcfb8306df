#pragma once

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and the
// standard default strategy parameters.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dde/rng.hpp"

namespace dde {

// Symmetric eigendecomposition by cyclic Jacobi rotations. a is n x n
// row-major; on return values holds the eigenvalues and vectors the
// eigenvectors as columns (row-major n x n).
void jacobi_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values, std::vector<double>& vectors);

struct CmaParameters {
    std::size_t lambda = 0;
    std::size_t mu = 0;
    std::vector<double> weights;
    double mu_eff = 0.0;
    double c_sigma = 0.0, d_sigma = 0.0, c_c = 0.0, c_1 = 0.0, c_mu = 0.0, chi_n = 0.0;

    // lambda == 0 selects 4 + floor(3 ln dim).
    static CmaParameters defaults(std::size_t dim, std::size_t lambda = 0);
};

class CmaEs {
public:
    CmaEs(std::vector<double> mean, double step_size, std::uint64_t seed, std::size_t lambda = 0);

    // lambda samples from N(mean, step^2 C).
    std::vector<std::vector<double>> ask();
    // Non-finite values rank last.
    void tell(const std::vector<std::vector<double>>& samples, std::span<const double> values);

    std::size_t dim() const { return mean_.size(); }
    const CmaParameters& parameters() const { return params_; }
    const std::vector<double>& mean() const { return mean_; }
    double step_size() const { return sigma_; }
    const std::vector<double>& covariance() const { return cov_; }
    const std::vector<double>& eigenvalues() const { return eigval_; }
    std::size_t generation() const { return generation_; }

private:
    void decompose();

    CmaParameters params_;
    std::vector<double> mean_;
    double sigma_;
    std::vector<double> cov_, basis_, eigval_, scale_;  // C = B diag(scale^2) B^T
    std::vector<double> p_sigma_, p_c_;
    std::size_t generation_ = 0;
    Rng rng_;
};

struct CmaTracePoint {
    std::size_t evaluations;
    double best_value;  // best ever so far
};

struct CmaResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    std::size_t evaluations = 0;
    std::vector<CmaTracePoint> trace;  // one entry per generation
};

struct CmaOptions {
    std::vector<double> initial_mean;  // empty: origin
    double initial_step = 0.5;
    std::size_t lambda = 0;
    // Called after each generation with the best-ever point.
    std::function<void(std::size_t evaluations, std::span<const double> best_point, double best_value)> on_generation;
};

using Objective = std::function<double(std::span<const double>)>;

// Runs whole generations while they fit in the budget. Throws
// std::invalid_argument if dim == 0 or the budget is below one generation.
CmaResult cma_minimize(const Objective& objective, std::size_t dim, std::size_t budget, std::uint64_t seed,
                       const CmaOptions& opts = {});

}  // namespace dde
