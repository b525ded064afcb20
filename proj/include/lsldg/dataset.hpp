#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lsldg/common.hpp"

namespace lsldg {

/// An n x d sample matrix with optional column names and generator
/// provenance. Immutable by convention once built; validate() enforces the
/// shape/finiteness invariants.
struct Dataset {
    struct Provenance {
        std::string generator;
        std::uint64_t seed = 0;
    };

    Matrix samples;
    std::vector<std::string> column_names;  // empty or one name per column
    std::optional<Provenance> provenance;

    int count() const { return static_cast<int>(samples.rows()); }
    int dim() const { return static_cast<int>(samples.cols()); }
    void validate() const;
};

Dataset load_csv(const std::filesystem::path& path, bool has_header);
void save_csv(const Dataset& data, const std::filesystem::path& path);

/// K-fold assignment of n samples; a pure function of (n, K, seed).
struct FoldPartition {
    std::vector<int> assignments;  // fold index in [0, folds) per sample
    int folds = 0;

    std::vector<int> members(int fold) const;
    std::vector<int> complement(int fold) const;
};

FoldPartition make_folds(int n, int folds, std::uint64_t seed);

/// Per-column affine transform recorded by standardize(); invertible.
struct ColumnTransform {
    Vector mean;
    Vector scale;

    Matrix apply(const Matrix& rows) const;
    Matrix invert(const Matrix& rows) const;
};

/// Center and scale every column to sample mean 0 and unbiased sample
/// standard deviation 1 (n-1 denominator). Requires n >= 2 and nonconstant
/// columns.
std::pair<Dataset, ColumnTransform> standardize(const Dataset& data);

enum class MixtureFamily {
    single_gaussian,
    double_gaussian,
    three_gaussian_mixture,
    custom_gaussian_mixture,
};

const char* family_name(MixtureFamily f);
MixtureFamily parse_family(const std::string& name);

struct GaussianComponent {
    double weight = 0.0;
    Vector mean;
    Matrix covariance;
};

struct SyntheticSpec {
    MixtureFamily family = MixtureFamily::single_gaussian;
    int dim = 0;
    int count = 0;
    std::uint64_t seed = 0;
    std::vector<GaussianComponent> components;  // custom_gaussian_mixture only

    void validate() const;
};

/// Draws plus the index of the mixture component each row came from.
struct GeneratedSample {
    Dataset data;
    std::vector<int> component_labels;
};

GeneratedSample generate(const SyntheticSpec& spec);

/// Median of pairwise Euclidean distances (subsampled past 2048 rows);
/// used for data-scaled defaults.
double median_pairwise_distance(const Matrix& samples);

}  // namespace lsldg
