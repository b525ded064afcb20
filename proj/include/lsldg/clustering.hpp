#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "lsldg/dataset.hpp"
#include "lsldg/estimator.hpp"
#include "lsldg/kde.hpp"
#include "lsldg/modelsel.hpp"

namespace lsldg {

struct SeekConfig {
    int max_iters = 1000;
    double step_tol = 1e-6;          // per-point max-norm step
    double merge_radius = 0.0;       // <= 0: 1e-2 * median pairwise distance
    double denominator_floor = 1e-12;

    void validate() const;
};

/// One fixed-point step of the fitted gradient field: coordinate j moves to
/// the kernel-weighted center average for dimension j. Returns nothing when
/// some coordinate's denominator falls below the floor (the trajectory is
/// then stopped and flagged by the caller).
std::optional<Vector> lsldg_update(const GradientModel& model, const Vector& x,
                                   double denominator_floor = 1e-12);

/// Classical kernel-density fixed point: the softmax-weighted mean of the
/// training points. Always well defined.
Vector mean_shift_update(const KdeModel& model, const Vector& x);

using UpdateFn = std::function<std::optional<Vector>(const Vector&)>;

struct SeekOutcome {
    Matrix terminals;
    std::vector<int> iterations;
    std::vector<char> converged;
};

/// Iterates every start until the step max-norm drops below step_tol or
/// max_iters is reached; degenerate updates stop the trajectory at its last
/// position with the converged flag cleared.
SeekOutcome seek_modes(const UpdateFn& update, const Matrix& starts,
                       const SeekConfig& cfg);

struct ClusteringResult {
    std::vector<int> labels;       // in [0, modes.rows())
    Matrix modes;                  // group centroids, one row per cluster
    std::vector<int> iterations;
    std::vector<int> unconverged;  // sorted point indices

    int cluster_count() const { return static_cast<int>(modes.rows()); }
};

/// Single-linkage grouping of terminal positions: terminals share a label
/// iff they are chained by pairwise distances <= merge_radius. Unconverged
/// points take the nearest mode's label but stay listed as unconverged.
ClusteringResult merge_and_label(const Matrix& terminals,
                                 const std::vector<char>& converged,
                                 double merge_radius);

void write_assignments_csv(const ClusteringResult& result,
                           const std::filesystem::path& path);
void write_modes_csv(const ClusteringResult& result,
                     const std::filesystem::path& path);

enum class ClusterMethod { mtlsldgc, slsldgc, clsldgc, meanshift };

ClusterMethod parse_cluster_method(const std::string& name);
const char* cluster_method_name(ClusterMethod m);

struct ClusterOptions {
    Grid grid;                           // LSLDG σ/λ/γ candidates
    std::vector<double> kde_bandwidths;  // mean-shift candidates
    int folds = 5;
    int max_centers = 50;
    Solver solver = Solver::analytic;
    BcdOptions bcd{};
    SeekConfig seek{};
    std::uint64_t seed = 0;
};

struct ClusterOutput {
    ClusteringResult result;
    std::optional<GradientModel> model;  // LSLDG methods
    std::optional<double> kde_sigma;     // mean shift
    double merge_radius = 0.0;
};

/// Full pipeline: model selection for the chosen method, mode seeking from
/// every data point, merging and labeling. The gamma grid is overridden to
/// {0} for the single-task method and {inf} for the common-parameter one.
ClusterOutput cluster(const Dataset& data, ClusterMethod method,
                      const ClusterOptions& opts);

}  // namespace lsldg
