#pragma once

#include <vector>

#include "lsldg/common.hpp"
#include "lsldg/dataset.hpp"
#include "lsldg/estimator.hpp"

namespace lsldg {

/// Held-out fit score: sum over dimensions of
///   mean(g_j^2) + 2 * mean(d_j g_j)
/// over the given points. Smaller is better; for data from a known Gaussian
/// with covariance S the infimum over models is -trace(S^{-1}).
double test_score(const GradientModel& model, const Matrix& points);
double test_score(const GradientModel& model, const Dataset& data);

/// Chance-corrected pair-counting agreement between two labelings (the
/// Hubert-Arabie form). 1 means identical partitions; the degenerate case
/// where the expected and maximum indices coincide returns 1 for identical
/// partitions and 0 otherwise.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace lsldg
