// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include "dde/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace dde::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    }
    if (i + 4 <= n) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// Register block of R output rows by C vectors of 4 columns:
//   out[r, o0 + 4c + l] += sum_k lhs(r, k) * rhs[k * rhs_stride + o0 + 4c + l]
// lhs(r, k) = lhs[r * lhs_row + k * lhs_col].
template <int R, int C>
inline void block_fma(std::size_t depth, const double* lhs, std::size_t lhs_row, std::size_t lhs_col,
                      const double* rhs, std::size_t rhs_stride, double* out, std::size_t out_stride) {
    __m256d acc[R][C];
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) acc[r][c] = _mm256_loadu_pd(out + r * out_stride + 4 * c);
    for (std::size_t k = 0; k < depth; ++k) {
        __m256d w[C];
        for (int c = 0; c < C; ++c) w[c] = _mm256_loadu_pd(rhs + k * rhs_stride + 4 * c);
        for (int r = 0; r < R; ++r) {
            const __m256d xb = _mm256_broadcast_sd(lhs + r * lhs_row + k * lhs_col);
            for (int c = 0; c < C; ++c) acc[r][c] = _mm256_fmadd_pd(xb, w[c], acc[r][c]);
        }
    }
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) _mm256_storeu_pd(out + r * out_stride + 4 * c, acc[r][c]);
}

template <int R>
inline void row_panel(std::size_t depth, std::size_t width, const double* lhs, std::size_t lhs_row,
                      std::size_t lhs_col, const double* rhs, double* out) {
    std::size_t o = 0;
    for (; o + 8 <= width; o += 8)
        block_fma<R, 2>(depth, lhs, lhs_row, lhs_col, rhs + o, width, out + o, width);
    for (; o + 4 <= width; o += 4)
        block_fma<R, 1>(depth, lhs, lhs_row, lhs_col, rhs + o, width, out + o, width);
    for (; o < width; ++o) {
        for (int r = 0; r < R; ++r) {
            double s = out[r * width + o];
            for (std::size_t k = 0; k < depth; ++k) s += lhs[r * lhs_row + k * lhs_col] * rhs[k * width + o];
            out[r * width + o] = s;
        }
    }
}

// out[m x width] += lhs(m x depth) * rhs[depth x width], lhs addressed by strides.
void panel_product(std::size_t m, std::size_t depth, std::size_t width, const double* lhs,
                   std::size_t lhs_row, std::size_t lhs_col, const double* rhs, double* out) {
    std::size_t r = 0;
    for (; r + 4 <= m; r += 4)
        row_panel<4>(depth, width, lhs + r * lhs_row, lhs_row, lhs_col, rhs, out + r * width);
    for (; r < m; ++r)
        row_panel<1>(depth, width, lhs + r * lhs_row, lhs_row, lhs_col, rhs, out + r * width);
}

void gemm_nn_avx2(std::size_t rows, std::size_t in, std::size_t out, const double* x,
                  const double* w, double* y) {
    // Y = X W: lhs(r, k) = X[r * in + k]
    panel_product(rows, in, out, x, in, 1, w, y);
}

void gemm_tn_avx2(std::size_t rows, std::size_t in, std::size_t out, const double* x,
                  const double* d, double* g) {
    // G = X^T D: lhs(i, k) = X[k * in + i]
    panel_product(in, rows, out, x, 1, in, d, g);
}

template <int R, int I>
inline void nt_block(std::size_t out, const double* d, const double* w, double* dx, std::size_t in) {
    __m256d acc[R][I];
    for (int r = 0; r < R; ++r)
        for (int i = 0; i < I; ++i) acc[r][i] = _mm256_setzero_pd();
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
        __m256d wv[I];
        for (int i = 0; i < I; ++i) wv[i] = _mm256_loadu_pd(w + i * out + o);
        for (int r = 0; r < R; ++r) {
            const __m256d dv = _mm256_loadu_pd(d + r * out + o);
            for (int i = 0; i < I; ++i) acc[r][i] = _mm256_fmadd_pd(dv, wv[i], acc[r][i]);
        }
    }
    for (int r = 0; r < R; ++r) {
        for (int i = 0; i < I; ++i) {
            double s = hsum(acc[r][i]);
            for (std::size_t t = o; t < out; ++t) s += d[r * out + t] * w[i * out + t];
            dx[r * in + i] += s;
        }
    }
}

template <int R>
inline void nt_rows(std::size_t in, std::size_t out, const double* d, const double* w, double* dx) {
    std::size_t i = 0;
    for (; i + 4 <= in; i += 4) nt_block<R, 4>(out, d, w + i * out, dx + i, in);
    for (; i < in; ++i) nt_block<R, 1>(out, d, w + i * out, dx + i, in);
}

void gemm_nt_avx2(std::size_t rows, std::size_t in, std::size_t out, const double* d,
                  const double* w, double* dx) {
    std::size_t r = 0;
    for (; r + 2 <= rows; r += 2) nt_rows<2>(in, out, d + r * out, w, dx + r * in);
    for (; r < rows; ++r) nt_rows<1>(in, out, d + r * out, w, dx + r * in);
}

void adam_step_avx2(double* p, double* m, double* v, const double* g, std::size_t n,
                    const AdamCoeffs& c) {
    // Same operation order as the scalar reference, no FMA: results are bit-identical.
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
    const __m256d step = _mm256_set1_pd(c.step);
    const __m256d inv = _mm256_set1_pd(c.inv_sqrt_bc2);
    const __m256d eps = _mm256_set1_pd(c.eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
        const __m256d denom = _mm256_add_pd(_mm256_mul_pd(_mm256_sqrt_pd(vi), inv), eps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(step, mi), denom);
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    const double one_m_b1 = 1.0 - c.beta1;
    const double one_m_b2 = 1.0 - c.beta2;
    for (; i < n; ++i) {
        const double gi = g[i];
        m[i] = c.beta1 * m[i] + one_m_b1 * gi;
        v[i] = c.beta2 * v[i] + one_m_b2 * (gi * gi);
        const double denom = std::sqrt(v[i]) * c.inv_sqrt_bc2 + c.eps;
        p[i] -= (c.step * m[i]) / denom;
    }
}

std::size_t argmin_sqdist_avx2(double px, double py, const double* xs, const double* ys,
                               std::size_t n, double* best) {
    std::size_t i = 0;
    std::size_t arg = 0;
    double b = INFINITY;
    if (n >= 4) {
        const __m256d vx = _mm256_set1_pd(px);
        const __m256d vy = _mm256_set1_pd(py);
        __m256d bd = _mm256_set1_pd(INFINITY);
        __m256d bi = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
        __m256d idx = bi;
        const __m256d four = _mm256_set1_pd(4.0);
        for (; i + 4 <= n; i += 4) {
            const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx);
            const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy);
            // mul + add (no FMA) so distances match the scalar reference exactly
            const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
            const __m256d lt = _mm256_cmp_pd(d2, bd, _CMP_LT_OQ);
            bd = _mm256_blendv_pd(bd, d2, lt);
            bi = _mm256_blendv_pd(bi, idx, lt);
            idx = _mm256_add_pd(idx, four);
        }
        alignas(32) double lane_d[4];
        alignas(32) double lane_i[4];
        _mm256_store_pd(lane_d, bd);
        _mm256_store_pd(lane_i, bi);
        b = lane_d[0];
        arg = static_cast<std::size_t>(lane_i[0]);
        for (int l = 1; l < 4; ++l) {
            const auto li = static_cast<std::size_t>(lane_i[l]);
            if (lane_d[l] < b || (lane_d[l] == b && li < arg)) {
                b = lane_d[l];
                arg = li;
            }
        }
    }
    for (; i < n; ++i) {
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

constexpr KernelTable kAvx2{
    "avx2",       dot_avx2,       axpy_avx2,          gemm_nn_avx2, gemm_tn_avx2,
    gemm_nt_avx2, adam_step_avx2, argmin_sqdist_avx2,
};

}  // namespace

const KernelTable* avx2_kernels_unchecked() { return &kAvx2; }

}  // namespace dde::simd
