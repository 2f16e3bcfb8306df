#include "dde/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dde {

void jacobi_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values, std::vector<double>& vectors) {
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    double scale = 0.0;
    for (double v : a) scale += v * v;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off <= 1e-30 * scale || off == 0.0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {  // A <- A J
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // A <- J^T A
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                A(p, q) = A(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {  // V <- V J
                    const double vkp = vectors[k * n + p], vkq = vectors[k * n + q];
                    vectors[k * n + p] = c * vkp - s * vkq;
                    vectors[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = A(i, i);
}

CmaParameters CmaParameters::defaults(std::size_t dim, std::size_t lambda) {
    const double n = static_cast<double>(dim);
    CmaParameters p;
    p.lambda = lambda ? lambda : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(n)));
    p.mu = p.lambda / 2;
    p.weights.resize(p.mu);
    for (std::size_t i = 0; i < p.mu; ++i)
        p.weights[i] = std::log(static_cast<double>(p.mu) + 0.5) - std::log(static_cast<double>(i) + 1.0);
    const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
    double sq = 0.0;
    for (double& w : p.weights) {
        w /= sum;
        sq += w * w;
    }
    p.mu_eff = 1.0 / sq;
    p.c_sigma = (p.mu_eff + 2.0) / (n + p.mu_eff + 5.0);
    p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
    p.c_c = (4.0 + p.mu_eff / n) / (n + 4.0 + 2.0 * p.mu_eff / n);
    p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mu_eff);
    p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mu_eff - 2.0 + 1.0 / p.mu_eff) / ((n + 2.0) * (n + 2.0) + p.mu_eff));
    p.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    return p;
}

CmaEs::CmaEs(std::vector<double> mean, double step_size, std::uint64_t seed, std::size_t lambda)
    : mean_(std::move(mean)), sigma_(step_size), rng_(Rng(seed).derive("cma-es")) {
    const std::size_t n = mean_.size();
    if (n == 0) throw std::invalid_argument("CMA-ES needs dim >= 1");
    if (!(step_size > 0.0)) throw std::invalid_argument("CMA-ES step size must be positive");
    params_ = CmaParameters::defaults(n, lambda);
    cov_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) cov_[i * n + i] = 1.0;
    p_sigma_.assign(n, 0.0);
    p_c_.assign(n, 0.0);
    decompose();
}

void CmaEs::decompose() {
    const std::size_t n = dim();
    jacobi_eigen(cov_, n, eigval_, basis_);
    const double top = *std::max_element(eigval_.begin(), eigval_.end());
    const double floor = 1e-14 * std::max(top, std::numeric_limits<double>::min());
    bool repaired = false;
    for (double& v : eigval_) {
        if (!(v >= floor)) {
            v = floor;
            repaired = true;
        }
    }
    if (repaired) {  // C = B diag(values) B^T
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += basis_[i * n + k] * eigval_[k] * basis_[j * n + k];
                cov_[i * n + j] = s;
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) cov_[j * n + i] = cov_[i * n + j];
    }
    scale_.resize(n);
    for (std::size_t i = 0; i < n; ++i) scale_[i] = std::sqrt(eigval_[i]);
}

std::vector<std::vector<double>> CmaEs::ask() {
    const std::size_t n = dim();
    std::vector<std::vector<double>> out(params_.lambda, std::vector<double>(n));
    std::vector<double> z(n);
    for (auto& x : out) {
        for (std::size_t k = 0; k < n; ++k) z[k] = scale_[k] * rng_.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double y = 0.0;
            for (std::size_t k = 0; k < n; ++k) y += basis_[i * n + k] * z[k];
            x[i] = mean_[i] + sigma_ * y;
        }
    }
    return out;
}

void CmaEs::tell(const std::vector<std::vector<double>>& samples, std::span<const double> values) {
    const std::size_t n = dim();
    const auto& P = params_;
    if (samples.size() != P.lambda || values.size() != P.lambda)
        throw std::invalid_argument("CMA-ES tell: expected lambda samples and values");

    std::vector<std::size_t> order(P.lambda);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
        return std::isfinite(values[i]) ? values[i] : std::numeric_limits<double>::infinity();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    const std::vector<double> old_mean = mean_;
    std::vector<std::vector<double>> ys(P.mu, std::vector<double>(n));
    std::fill(mean_.begin(), mean_.end(), 0.0);
    for (std::size_t r = 0; r < P.mu; ++r) {
        const auto& x = samples[order[r]];
        for (std::size_t i = 0; i < n; ++i) {
            mean_[i] += P.weights[r] * x[i];
            ys[r][i] = (x[i] - old_mean[i]) / sigma_;
        }
    }
    std::vector<double> y_w(n);
    for (std::size_t i = 0; i < n; ++i) y_w[i] = (mean_[i] - old_mean[i]) / sigma_;

    // C^{-1/2} y_w = B diag(1/scale) B^T y_w
    std::vector<double> bty(n, 0.0), inv_sqrt_y(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) bty[k] += basis_[i * n + k] * y_w[i];
        bty[k] /= scale_[k];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) inv_sqrt_y[i] += basis_[i * n + k] * bty[k];

    const double cs = std::sqrt(P.c_sigma * (2.0 - P.c_sigma) * P.mu_eff);
    double ps_norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p_sigma_[i] = (1.0 - P.c_sigma) * p_sigma_[i] + cs * inv_sqrt_y[i];
        ps_norm2 += p_sigma_[i] * p_sigma_[i];
    }
    const double ps_norm = std::sqrt(ps_norm2);
    const double decay = 1.0 - std::pow(1.0 - P.c_sigma, 2.0 * static_cast<double>(generation_ + 1));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (static_cast<double>(n) + 1.0)) * P.chi_n;

    const double cc = std::sqrt(P.c_c * (2.0 - P.c_c) * P.mu_eff);
    for (std::size_t i = 0; i < n; ++i) p_c_[i] = (1.0 - P.c_c) * p_c_[i] + (h_sigma ? cc * y_w[i] : 0.0);

    const double delta_h = h_sigma ? 0.0 : P.c_c * (2.0 - P.c_c);
    const double keep = 1.0 - P.c_1 - P.c_mu;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double rank_mu = 0.0;
            for (std::size_t r = 0; r < P.mu; ++r) rank_mu += P.weights[r] * ys[r][i] * ys[r][j];
            const double c_ij = cov_[i * n + j];
            const double v = keep * c_ij + P.c_1 * (p_c_[i] * p_c_[j] + delta_h * c_ij) + P.c_mu * rank_mu;
            cov_[i * n + j] = v;
            cov_[j * n + i] = v;
        }
    }

    sigma_ *= std::exp((P.c_sigma / P.d_sigma) * (ps_norm / P.chi_n - 1.0));
    ++generation_;
    decompose();
}

CmaResult cma_minimize(const Objective& objective, std::size_t dim, std::size_t budget, std::uint64_t seed,
                       const CmaOptions& opts) {
    if (dim == 0) throw std::invalid_argument("cma_minimize: dim must be >= 1");
    std::vector<double> mean = opts.initial_mean.empty() ? std::vector<double>(dim, 0.0) : opts.initial_mean;
    if (mean.size() != dim) throw std::invalid_argument("cma_minimize: initial mean has the wrong length");
    CmaEs es(std::move(mean), opts.initial_step, seed, opts.lambda);
    const std::size_t lambda = es.parameters().lambda;
    if (budget < lambda) throw std::invalid_argument("cma_minimize: budget is below one generation");

    CmaResult result;
    result.best_value = std::numeric_limits<double>::infinity();
    std::vector<double> values(lambda);
    while (result.evaluations + lambda <= budget) {
        const auto samples = es.ask();
        for (std::size_t i = 0; i < lambda; ++i) {
            values[i] = objective(samples[i]);
            const double v = std::isfinite(values[i]) ? values[i] : std::numeric_limits<double>::infinity();
            if (result.best_point.empty() || v < result.best_value) {
                result.best_value = v;
                result.best_point = samples[i];
            }
        }
        result.evaluations += lambda;
        es.tell(samples, values);
        result.trace.push_back({result.evaluations, result.best_value});
        if (opts.on_generation) opts.on_generation(result.evaluations, result.best_point, result.best_value);
    }
    return result;
}

}  // namespace dde
