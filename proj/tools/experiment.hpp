#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "lsldg/clustering.hpp"
#include "lsldg/dataset.hpp"
#include "lsldg/modelsel.hpp"

namespace lsldg::cli {

/// Configuration/usage problem; the CLI maps it to exit code 1 (numerical
/// failures keep lsldg::error and exit 2).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Candidate lists used by the artificial-data studies.
Grid default_gradient_grid();
Grid default_cluster_grid();
std::vector<double> default_cluster_bandwidths();

struct GradientExperimentConfig {
    MixtureFamily family = MixtureFamily::single_gaussian;
    int dim = 10;
    int train_count = 30;
    int test_count = 1000;
    int reps = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> methods = {"mt", "single", "common"};
    Grid grid;  // gammas double as the curve evaluation points
    bool curve = true;
    Solver solver = Solver::analytic;
    int folds = 5;
    int max_centers = 50;
    std::filesystem::path out_dir;
};

struct GradientSummary {
    struct MethodRow {
        std::string method;
        double mean = 0.0;
        double std_error = 0.0;
        int completed = 0;
        bool incomplete = false;
    };
    struct CurveRow {
        double gamma = 0.0;
        double mean_relative = 0.0;
        double std_error = 0.0;
        int completed = 0;
    };
    std::vector<MethodRow> methods;
    std::vector<CurveRow> curve;
};

/// Repeated draw/fit/score runs. Writes runs.csv while running, then builds
/// summary.csv, relative.csv and relative.svg strictly from the persisted
/// runs.csv (re-read, not carried over in memory).
GradientSummary run_gradient_experiment(const GradientExperimentConfig& config,
                                        std::ostream& log);

struct ClusterExperimentConfig {
    MixtureFamily family = MixtureFamily::three_gaussian_mixture;
    int dim = 2;
    int count = 300;
    int reps = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> methods = {"mtlsldgc", "slsldgc", "clsldgc",
                                        "meanshift"};
    Grid grid;
    std::vector<double> kde_bandwidths;
    Solver solver = Solver::analytic;
    int folds = 5;
    int max_centers = 50;
    SeekConfig seek{};
    std::filesystem::path out_dir;
};

struct ClusterSummary {
    struct MethodRow {
        std::string method;
        double mean_ari = 0.0;
        double std_error = 0.0;
        int completed = 0;
        bool incomplete = false;
    };
    std::vector<MethodRow> methods;
};

ClusterSummary run_cluster_experiment(const ClusterExperimentConfig& config,
                                      std::ostream& log);

}  // namespace lsldg::cli
