#include "dde/simd/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

namespace dde::simd {

#ifdef DDE_HAVE_AVX2
const KernelTable* avx2_kernels_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(DDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    const KernelTable* best = avx2_kernels();
    if (const char* env = std::getenv("DDE_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_kernels();
        if (want == "avx2" && best) return best;
    }
    return best ? best : &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
#ifdef DDE_HAVE_AVX2
    static const bool ok = cpu_has_avx2();
    return ok ? avx2_kernels_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select_backend(Backend b) {
    const KernelTable* t = b == Backend::Scalar ? &scalar_kernels() : avx2_kernels();
    if (!t) return false;
    current().store(t, std::memory_order_relaxed);
    return true;
}

bool select_backend(std::string_view name) {
    if (name == "scalar") return select_backend(Backend::Scalar);
    if (name == "avx2") return select_backend(Backend::Avx2);
    return false;
}

std::vector<const KernelTable*> available_backends() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
    if (const KernelTable* t = avx2_kernels()) out.push_back(t);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemm_nn(std::size_t rows, std::size_t in, std::size_t out, std::span<const double> x,
             std::span<const double> w, std::span<double> y) {
    assert(x.size() >= rows * in && w.size() >= in * out && y.size() >= rows * out);
    active().gemm_nn(rows, in, out, x.data(), w.data(), y.data());
}

void gemm_tn(std::size_t rows, std::size_t in, std::size_t out, std::span<const double> x,
             std::span<const double> d, std::span<double> g) {
    assert(x.size() >= rows * in && d.size() >= rows * out && g.size() >= in * out);
    active().gemm_tn(rows, in, out, x.data(), d.data(), g.data());
}

void gemm_nt(std::size_t rows, std::size_t in, std::size_t out, std::span<const double> d,
             std::span<const double> w, std::span<double> dx) {
    assert(d.size() >= rows * out && w.size() >= in * out && dx.size() >= rows * in);
    active().gemm_nt(rows, in, out, d.data(), w.data(), dx.data());
}

}  // namespace dde::simd
