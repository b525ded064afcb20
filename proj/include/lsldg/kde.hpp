#pragma once

#include <cstdint>
#include <vector>

#include "lsldg/common.hpp"
#include "lsldg/dataset.hpp"

namespace lsldg {

/// Gaussian kernel density estimate with a single isotropic bandwidth.
struct KdeModel {
    Matrix points;  // n x d
    double sigma = 1.0;

    int count() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
    void validate() const;
};

/// log of the density estimate at x; computed with a max-shifted
/// exponential sum, so it stays finite where the density underflows.
double kde_log_density(const KdeModel& model, const Vector& x);

double kde_density(const KdeModel& model, const Vector& x);

/// Gradient of the log density estimate: a softmax-weighted average of
/// (x_i - x) / sigma^2.
Vector kde_log_gradient(const KdeModel& model, const Vector& x);

/// Softmax weights over the training points at x (nonnegative, sum 1).
Vector kde_weights(const KdeModel& model, const Vector& x);

struct BandwidthSelection {
    double sigma = 0.0;
    std::vector<double> candidates;
    std::vector<double> mean_log_likelihood;  // per candidate
};

/// K-fold cross-validated bandwidth: maximizes the mean held-out log
/// density, each fold scored against the density built from its complement.
/// Ties pick the smallest bandwidth.
BandwidthSelection kde_select_bandwidth(const Dataset& data,
                                        const std::vector<double>& candidates,
                                        int folds, std::uint64_t seed);

}  // namespace lsldg
