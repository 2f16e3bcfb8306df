#include "dde/simd/kernels.hpp"

#include <cmath>

namespace dde::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn_scalar(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* yr = y + r * out;
        const double* xr = x + r * in;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xr[i];
            const double* wi = w + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
        }
    }
}

void gemm_tn_scalar(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* d, double* g) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        const double* dr = d + r * out;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xr[i];
            double* gi = g + i * out;
            for (std::size_t o = 0; o < out; ++o) gi[o] += xi * dr[o];
        }
    }
}

void gemm_nt_scalar(std::size_t rows, std::size_t in, std::size_t out,
                    const double* d, const double* w, double* dx) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* dr = d + r * out;
        for (std::size_t i = 0; i < in; ++i) dx[r * in + i] += dot_scalar(dr, w + i * out, out);
    }
}

void adam_step_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                      const AdamCoeffs& c) {
    const double one_m_b1 = 1.0 - c.beta1;
    const double one_m_b2 = 1.0 - c.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = c.beta1 * m[i] + one_m_b1 * gi;
        v[i] = c.beta2 * v[i] + one_m_b2 * (gi * gi);
        const double denom = std::sqrt(v[i]) * c.inv_sqrt_bc2 + c.eps;
        p[i] -= (c.step * m[i]) / denom;
    }
}

std::size_t argmin_sqdist_scalar(double px, double py, const double* xs, const double* ys,
                                 std::size_t n, double* best) {
    std::size_t arg = 0;
    double b = INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        const double d2 = dx * dx + dy * dy;
        if (d2 < b) {
            b = d2;
            arg = i;
        }
    }
    *best = b;
    return arg;
}

constexpr KernelTable kScalar{
    "scalar",       dot_scalar,        axpy_scalar,          gemm_nn_scalar, gemm_tn_scalar,
    gemm_nt_scalar, adam_step_scalar, argmin_sqdist_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace dde::simd
