#pragma once

#include <cstddef>

// Per-backend implementations behind lsldg::kernels. The scalar versions are
// the reference; SIMD variants must match them within the tolerances checked
// by the equivalence tests.

namespace lsldg::kernels::scalar {

void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out);
void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out);
void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out);
void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out);
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum(const double* a, std::size_t n);
double min(const double* a, std::size_t n);
void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out);

}  // namespace lsldg::kernels::scalar

namespace lsldg::kernels::avx2 {

/// False when this translation unit was built without AVX2 codegen.
bool compiled();

void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out);
void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out);
void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out);
void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out);
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum(const double* a, std::size_t n);
double min(const double* a, std::size_t n);
void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out);

}  // namespace lsldg::kernels::avx2
