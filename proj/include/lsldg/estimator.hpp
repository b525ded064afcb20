#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "lsldg/basis.hpp"
#include "lsldg/common.hpp"
#include "lsldg/dataset.hpp"

namespace lsldg {

/// Per-dimension second-moment matrices of the basis gradients and mean
/// curvature vectors; together they determine every solver below.
struct SufficientStats {
    std::vector<Eigen::MatrixXd> gram;       // d matrices, b x b, symmetric PSD
    std::vector<Eigen::VectorXd> curvature;  // d vectors, length b
    int sample_count = 0;

    int dim() const { return static_cast<int>(gram.size()); }
    int basis_count() const {
        return gram.empty() ? 0 : static_cast<int>(gram.front().rows());
    }
};

SufficientStats compute_stats(const Matrix& samples, const BasisSpec& basis);
SufficientStats compute_stats(const Dataset& data, const BasisSpec& basis);

/// Hyperparameters of the coupled estimator. `gamma` may be infinity, which
/// means fully shared coefficients. `similarity` is d x d, symmetric,
/// nonnegative, zero diagonal.
struct HyperParams {
    double sigma = 1.0;
    double lambda = 0.0;
    double gamma = 0.0;
    Eigen::MatrixXd similarity;

    /// All pairwise similarities 1 (the usual choice when nothing is known
    /// about how the dimensions relate).
    static HyperParams uniform(int dim, double sigma, double lambda, double gamma);
    void validate(int dim) const;
};

/// Fitted gradient field: component j of the estimate at x is the dot
/// product of coefficient row j with the basis gradient row for dimension j.
class GradientModel {
public:
    GradientModel(BasisSpec basis, Matrix coeffs);

    const BasisSpec& basis() const { return ev_.spec(); }
    const Matrix& coeffs() const { return coeffs_; }
    const BasisEvaluator& evaluator() const { return ev_; }
    int dim() const { return ev_.dim(); }
    int basis_count() const { return ev_.count(); }

    /// Estimated log-density gradient at x.
    Vector evaluate(const Vector& x) const;

    /// Row i = evaluate(points.row(i)).
    Matrix evaluate(const Matrix& points) const;

    /// Unnormalized log-density surrogate for dimension j: coefficient row j
    /// dotted with the plain kernel vector. Its coordinate-j derivative is
    /// evaluate(x)(j).
    double log_density_partial(int j, const Vector& x) const;

private:
    BasisEvaluator ev_;
    Matrix coeffs_;
};

/// Independent per-dimension ridge solutions.
Matrix solve_single(const SufficientStats& stats, double lambda);

/// One coefficient vector shared by all dimensions (returned broadcast to
/// every row).
Matrix solve_common(const SufficientStats& stats, double lambda);

/// Exact minimizer of the coupled objective. gamma == 0 delegates to
/// solve_single, gamma == inf to solve_common with regularization d*lambda.
/// Uniform similarity matrices are solved through a Schur-complement route
/// that only touches b x b systems; general ones assemble the stacked system,
/// which is refused above max_dense_dim (memory guard).
Matrix solve_mt_analytic(const SufficientStats& stats, const HyperParams& hp,
                         int max_dense_dim = 4000);

struct BcdOptions {
    double tol = 1e-9;      // max-norm coefficient change per sweep
    int max_sweeps = 1000;
    bool track_objective = false;
};

struct BcdResult {
    Matrix coeffs;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // filled when track_objective
};

/// Cyclic block coordinate descent on the coupled objective; each block is a
/// b x b ridge solve. Warm-startable through `init`. Non-convergence is
/// reported in the result, never silently dropped.
BcdResult solve_mt_bcd(const SufficientStats& stats, const HyperParams& hp,
                       const Matrix* init, const BcdOptions& opts = {});

/// Value of the coupled objective (finite gamma only).
double mt_objective(const SufficientStats& stats, const HyperParams& hp,
                    const Matrix& coeffs);

/// Versioned plain-text model container; round-trips exactly.
void save_model(const GradientModel& model, const HyperParams& hp,
                const std::filesystem::path& path);

struct LoadedModel {
    GradientModel model;
    HyperParams hyper;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace lsldg
