#pragma once

#include <cstdint>
#include <vector>

#include "lsldg/common.hpp"
#include "lsldg/dataset.hpp"

namespace lsldg {

/// Gaussian kernel centers plus per-dimension bandwidths. Bandwidths may be
/// left empty by select_centers() and assigned later; validate() requires
/// them.
struct BasisSpec {
    Matrix centers;     // b x d
    Vector bandwidths;  // length d, all positive

    int count() const { return static_cast<int>(centers.rows()); }
    int dim() const { return static_cast<int>(centers.cols()); }
    bool has_bandwidths() const { return bandwidths.size() == centers.cols(); }

    BasisSpec with_bandwidth(double sigma) const;
    void validate() const;
};

/// b = min(b_max, n) centers drawn uniformly without replacement from the
/// dataset rows; deterministic in the seed. Bandwidths are left unset.
BasisSpec select_centers(const Dataset& data, int b_max, std::uint64_t seed);

/// Kernel vector: component k = exp(-|x - c_k|^2 / (2 sigma_j^2)).
Vector kernel_values(const BasisSpec& spec, int j, const Vector& x);

/// Partial derivative of kernel_values along coordinate j:
/// component k = (c_k(j) - x(j)) / sigma_j^2 * kernel_values(spec, j, x)(k).
/// These are the basis functions of the gradient model.
Vector kernel_grads(const BasisSpec& spec, int j, const Vector& x);

/// Second partial along coordinate j:
/// component k = ((c_k(j) - x(j))^2 / sigma_j^4 - 1 / sigma_j^2) * kernel.
Vector kernel_curvatures(const BasisSpec& spec, int j, const Vector& x);

/// Precomputed layout for repeated evaluation: centers transposed to
/// dimension-major storage and dimensions grouped by shared bandwidth so the
/// exponential is computed once per (x, center) pair and reused across all
/// per-dimension rows.
class BasisEvaluator {
public:
    explicit BasisEvaluator(BasisSpec spec);

    const BasisSpec& spec() const { return spec_; }
    int count() const { return spec_.count(); }
    int dim() const { return spec_.dim(); }
    int group_count() const { return static_cast<int>(group_scale_.size()); }
    int group_of(int j) const { return group_of_dim_[j]; }
    double inv_s2(int j) const { return inv_s2_[j]; }

    /// Center coordinates of dimension j, contiguous over k.
    const double* centers_dim(int j) const {
        return centers_dim_.data() + static_cast<std::ptrdiff_t>(j) * count();
    }

    /// sq[k] = |x - c_k|^2
    void squared_dist_row(const double* x, double* sq) const;

    /// e[k] = exp(-sq[k] / (2 sigma^2)) for bandwidth group g.
    void kernel_row(int g, const double* sq, double* e) const;

    /// Kernel rows for every bandwidth group at x; rows indexed by group.
    /// `rows` must be group_count() x count().
    void kernel_rows(const double* x, double* sq_scratch, Matrix& rows) const;

    void grad_row(int j, double xj, const double* e, double* out) const;
    void curv_row(int j, double xj, const double* e, double* out) const;

private:
    BasisSpec spec_;
    Matrix centers_dim_;          // d x b
    Vector inv_s2_;               // per dimension
    std::vector<int> group_of_dim_;
    std::vector<double> group_scale_;  // -1/(2 sigma^2) per group
};

}  // namespace lsldg
