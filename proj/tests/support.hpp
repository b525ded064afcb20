#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>

#include "lsldg/basis.hpp"
#include "lsldg/common.hpp"
#include "lsldg/estimator.hpp"
#include "lsldg/rng.hpp"

namespace testsup {

using lsldg::Matrix;
using lsldg::Vector;

/// Central finite difference of a scalar function along coordinate j.
inline double central_diff(const std::function<double(const Vector&)>& f,
                           const Vector& x, int j, double step) {
    Vector hi = x, lo = x;
    hi(j) += step;
    lo(j) -= step;
    return (f(hi) - f(lo)) / (2.0 * step);
}

/// Central finite difference of a vector-valued function along coordinate j.
inline Vector central_diff_vec(const std::function<Vector(const Vector&)>& f,
                               const Vector& x, int j, double step) {
    Vector hi = x, lo = x;
    hi(j) += step;
    lo(j) -= step;
    return (f(hi) - f(lo)) / (2.0 * step);
}

/// max-norm error relative to the larger of the reference norm and a floor
inline double rel_error(const Vector& got, const Vector& want, double floor = 1e-6) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), floor);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_error(double got, double want, double floor = 1e-6) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

/// Random basis with per-dimension bandwidths; x probes should be drawn near
/// the centers so the kernel rows are not all tail.
inline lsldg::BasisSpec random_basis(lsldg::Rng& rng, int d, int b) {
    lsldg::BasisSpec spec;
    spec.centers.resize(b, d);
    for (int k = 0; k < b; ++k)
        for (int j = 0; j < d; ++j) spec.centers(k, j) = 2.0 * rng.normal();
    spec.bandwidths.resize(d);
    for (int j = 0; j < d; ++j) spec.bandwidths(j) = 0.3 + 2.7 * rng.uniform01();
    return spec;
}

inline Vector probe_near_centers(lsldg::Rng& rng, const lsldg::BasisSpec& spec) {
    const int k = static_cast<int>(rng.below(spec.count()));
    Vector x = spec.centers.row(k).transpose();
    for (int j = 0; j < spec.dim(); ++j)
        x(j) += 0.5 * spec.bandwidths(j) * rng.normal();
    return x;
}

/// Random PSD sufficient statistics (a small synthetic solver instance).
inline lsldg::SufficientStats random_stats(lsldg::Rng& rng, int d, int b) {
    lsldg::SufficientStats stats;
    stats.sample_count = b + 5;
    for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd w(b + 5, b);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.normal();
        stats.gram.push_back(w.transpose() * w / w.rows());
        Eigen::VectorXd h(b);
        for (int c = 0; c < b; ++c) h(c) = rng.normal();
        stats.curvature.push_back(h);
    }
    return stats;
}

/// Dense assembly of the coupled stationarity system; test-only oracle kept
/// independent of the library's solve paths.
inline Matrix dense_mt_oracle(const lsldg::SufficientStats& stats,
                              const lsldg::HyperParams& hp) {
    const int d = stats.dim();
    const int b = stats.basis_count();
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(d * b, d * b);
    Eigen::VectorXd rhs(d * b);
    for (int j = 0; j < d; ++j) {
        big.block(j * b, j * b, b, b) = stats.gram[j];
        double srow = 0.0;
        for (int k = 0; k < d; ++k) srow += hp.similarity(j, k);
        big.block(j * b, j * b, b, b).diagonal().array() +=
            hp.lambda + hp.gamma * srow;
        for (int k = 0; k < d; ++k) {
            if (k == j) continue;
            big.block(j * b, k * b, b, b).diagonal().array() -=
                hp.gamma * hp.similarity(j, k);
        }
        rhs.segment(j * b, b) = -stats.curvature[j];
    }
    Eigen::VectorXd sol = big.ldlt().solve(rhs);
    Matrix coeffs(d, b);
    for (int j = 0; j < d; ++j) coeffs.row(j) = sol.segment(j * b, b).transpose();
    return coeffs;
}

}  // namespace testsup
