#include "lsldg/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

#include "lsldg/common.hpp"
#include "kernels_detail.hpp"

namespace lsldg::kernels {

namespace scalar {

void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = points + i * dim;
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = row[c] - query[c];
            acc += d * d;
        }
        out[i] = acc;
    }
}

void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(scale * in[i] + shift);
}

void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (centers[i] - x) * inv_s2 * kernel[i];
}

void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = centers[i] - x;
        out[i] = (d * d * inv_s2 - 1.0) * inv_s2 * kernel[i];
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double min(const double* a, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = a[i] < m ? a[i] : m;
    return m;
}

void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out) {
    std::memset(out, 0, dim * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = points + i * dim;
        const double wi = w[i];
        for (std::size_t c = 0; c < dim; ++c) out[c] += wi * row[c];
    }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__amd64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend resolve_default() {
    if (const char* env = std::getenv("LSLDG_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::avx2))
            return Backend::avx2;
    }
    return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Backend& state() {
    static Backend b = resolve_default();
    return b;
}

}  // namespace

const char* backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
    return avx2::compiled() && cpu_has_avx2();
}

Backend active_backend() { return state(); }

void force_backend(Backend b) {
    require(backend_available(b),
            std::string("kernel backend not available on this machine: ") +
                backend_name(b));
    state() = b;
}

#define LSLDG_DISPATCH(fn, ...)                       \
    if (active_backend() == Backend::avx2)            \
        return avx2::fn(__VA_ARGS__);                 \
    return scalar::fn(__VA_ARGS__)

void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out) {
    LSLDG_DISPATCH(squared_distances, points, n, dim, query, out);
}

void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out) {
    LSLDG_DISPATCH(exp_affine, in, n, scale, shift, out);
}

void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out) {
    LSLDG_DISPATCH(gradient_row, centers, x, inv_s2, kernel, n, out);
}

void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out) {
    LSLDG_DISPATCH(curvature_row, centers, x, inv_s2, kernel, n, out);
}

double dot(const double* a, const double* b, std::size_t n) {
    LSLDG_DISPATCH(dot, a, b, n);
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    LSLDG_DISPATCH(dot3, a, b, c, n);
}

double sum(const double* a, std::size_t n) { LSLDG_DISPATCH(sum, a, n); }

double min(const double* a, std::size_t n) { LSLDG_DISPATCH(min, a, n); }

void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out) {
    LSLDG_DISPATCH(weighted_mean, points, n, dim, w, out);
}

#undef LSLDG_DISPATCH

}  // namespace lsldg::kernels
