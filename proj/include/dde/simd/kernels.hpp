#pragma once

// Dense arithmetic kernels behind a runtime-selected function table.
//
// Every kernel has a scalar reference implementation; SIMD variants (AVX2+FMA
// on x86-64) are compiled in separate translation units and chosen once at
// startup according to the CPU. The reference and SIMD paths agree up to
// floating-point reassociation, except adam_step which is bit-identical.
//
// All matrices are row-major and all matrix kernels accumulate into their
// output.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dde::simd {

struct AdamCoeffs {
    double beta1;
    double beta2;
    double step;          // lr / (1 - beta1^t)
    double inv_sqrt_bc2;  // 1 / sqrt(1 - beta2^t)
    double eps;
};

struct KernelTable {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // Y[rows x out] += X[rows x in] * W[in x out]
    void (*gemm_nn)(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, double* y);
    // G[in x out] += X[rows x in]^T * D[rows x out]
    void (*gemm_tn)(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* d, double* g);
    // DX[rows x in] += D[rows x out] * W[in x out]^T
    void (*gemm_nt)(std::size_t rows, std::size_t in, std::size_t out,
                    const double* d, const double* w, double* dx);

    void (*adam_step)(double* params, double* m, double* v, const double* grad,
                      std::size_t n, const AdamCoeffs& c);

    // Index of the point closest to (px, py); ties go to the lowest index.
    // Writes the squared distance to *best. n must be > 0.
    std::size_t (*argmin_sqdist)(double px, double py, const double* xs,
                                 const double* ys, std::size_t n, double* best);
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();

// The table used by the library. Defaults to the best supported backend; the
// DDE_SIMD environment variable ("scalar" or "avx2") overrides the default.
const KernelTable& active();
// Returns false (and leaves the selection unchanged) if unavailable.
bool select_backend(Backend b);
bool select_backend(std::string_view name);
std::vector<const KernelTable*> available_backends();

// Convenience wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemm_nn(std::size_t rows, std::size_t in, std::size_t out,
             std::span<const double> x, std::span<const double> w, std::span<double> y);
void gemm_tn(std::size_t rows, std::size_t in, std::size_t out,
             std::span<const double> x, std::span<const double> d, std::span<double> g);
void gemm_nt(std::size_t rows, std::size_t in, std::size_t out,
             std::span<const double> d, std::span<const double> w, std::span<double> dx);

}  // namespace dde::simd
