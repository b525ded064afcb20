#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsldg/dataset.hpp"
#include "lsldg/estimator.hpp"

namespace lsldg {

/// Hyperparameter candidates. Each list must be nonempty, strictly
/// ascending and duplicate-free; only `gammas` may contain infinity (last).
struct Grid {
    std::vector<double> sigmas;
    std::vector<double> lambdas;
    std::vector<double> gammas;

    void validate() const;
};

enum class Solver { analytic, bcd };

Solver parse_solver(const std::string& name);
const char* solver_name(Solver s);

struct CVEntry {
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<double> fold_scores;  // length K; empty when the triple failed
    double mean_score = 0.0;          // NaN when the triple failed
    std::string failure;              // why, when it failed
};

struct CVReport {
    std::vector<CVEntry> entries;  // lexicographic (sigma, lambda, gamma) order
    std::size_t chosen_index = 0;
    int folds = 0;
    std::uint64_t seed = 0;

    const CVEntry& chosen() const { return entries.at(chosen_index); }
    void write_csv(const std::filesystem::path& path) const;
};

/// Fit on `train`, return the held-out score on `holdout` (the same formula
/// as metrics::test_score). The basis provides the centers; its bandwidths
/// are replaced by hp.sigma.
double cv_score(const Dataset& train, const Dataset& holdout,
                const BasisSpec& centers, const HyperParams& hp, Solver solver,
                const BcdOptions& bcd = {});

struct SelectOptions {
    int folds = 5;
    int max_centers = 50;
    Solver solver = Solver::analytic;
    BcdOptions bcd{};
};

struct SelectResult {
    CVReport report;
    GradientModel model;   // refit on the full dataset at the chosen triple
    HyperParams chosen;
};

/// K-fold cross-validation over the full grid, then a refit at the argmin
/// triple. Centers are drawn once from the full dataset and shared across
/// folds and triples; statistics are cached per (sigma, fold); with the BCD
/// solver the gamma path within each (sigma, lambda) is warm-started in grid
/// order. Ties break toward the earliest triple in grid order.
SelectResult select(const Dataset& data, const Grid& grid, std::uint64_t seed,
                    const SelectOptions& opts = {});

}  // namespace lsldg
