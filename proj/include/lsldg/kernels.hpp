#pragma once

#include <cstddef>

namespace lsldg::kernels {

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);

/// True when the backend can run on this machine (compiled in and the CPU
/// reports the instruction set).
bool backend_available(Backend b);

/// Backend used by every kernel entry point. Resolved once: the widest
/// available instruction set wins, unless the LSLDG_KERNELS environment
/// variable ("scalar"/"avx2") or force_backend() overrides it.
Backend active_backend();
void force_backend(Backend b);

// out[i] = sum_c (points[i*dim + c] - query[c])^2
void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out);

// out[i] = exp(scale * in[i] + shift)
void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out);

// out[k] = (centers[k] - x) * inv_s2 * kernel[k]
void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out);

// out[k] = ((centers[k] - x)^2 * inv_s2 - 1) * inv_s2 * kernel[k]
void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out);

double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum(const double* a, std::size_t n);
double min(const double* a, std::size_t n);

// out[c] = sum_i w[i] * points[i*dim + c]
void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out);

}  // namespace lsldg::kernels
