#include "lsldg/basis.hpp"

#include <cmath>

#include "lsldg/kernels.hpp"
#include "lsldg/rng.hpp"

namespace lsldg {

BasisSpec BasisSpec::with_bandwidth(double sigma) const {
    require(sigma > 0.0, "bandwidth must be positive");
    BasisSpec out;
    out.centers = centers;
    out.bandwidths = Vector::Constant(centers.cols(), sigma);
    return out;
}

void BasisSpec::validate() const {
    require(centers.rows() >= 1, "basis needs at least one center");
    require(centers.allFinite(), "basis centers contain NaN or Inf");
    require(has_bandwidths(), "basis bandwidths are unset");
    require((bandwidths.array() > 0.0).all(), "bandwidths must be positive");
}

BasisSpec select_centers(const Dataset& data, int b_max, std::uint64_t seed) {
    data.validate();
    require(b_max >= 1, "need at least one center");
    const int b = std::min(b_max, data.count());
    Rng rng(derive_seed(seed, 0x63656e74));  // "cent"
    const auto rows = rng.sample_without_replacement(data.count(), b);
    BasisSpec spec;
    spec.centers.resize(b, data.dim());
    for (int k = 0; k < b; ++k) spec.centers.row(k) = data.samples.row(rows[k]);
    return spec;
}

namespace {

void check_point(const BasisSpec& spec, int j, const Vector& x) {
    spec.validate();
    require(j >= 0 && j < spec.dim(), "dimension index out of range");
    require(x.size() == spec.dim(), "point dimensionality does not match basis");
}

}  // namespace

Vector kernel_values(const BasisSpec& spec, int j, const Vector& x) {
    check_point(spec, j, x);
    const int b = spec.count();
    Vector sq(b), e(b);
    kernels::squared_distances(spec.centers.data(), b, spec.dim(), x.data(),
                               sq.data());
    const double s = spec.bandwidths(j);
    kernels::exp_affine(sq.data(), b, -0.5 / (s * s), 0.0, e.data());
    return e;
}

Vector kernel_grads(const BasisSpec& spec, int j, const Vector& x) {
    Vector e = kernel_values(spec, j, x);
    const int b = spec.count();
    Vector cj(b);
    cj = spec.centers.col(j);
    Vector out(b);
    const double s = spec.bandwidths(j);
    kernels::gradient_row(cj.data(), x(j), 1.0 / (s * s), e.data(), b,
                          out.data());
    return out;
}

Vector kernel_curvatures(const BasisSpec& spec, int j, const Vector& x) {
    Vector e = kernel_values(spec, j, x);
    const int b = spec.count();
    Vector cj(b);
    cj = spec.centers.col(j);
    Vector out(b);
    const double s = spec.bandwidths(j);
    kernels::curvature_row(cj.data(), x(j), 1.0 / (s * s), e.data(), b,
                           out.data());
    return out;
}

BasisEvaluator::BasisEvaluator(BasisSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const int d = spec_.dim();
    const int b = spec_.count();
    centers_dim_.resize(d, b);
    centers_dim_ = spec_.centers.transpose();
    inv_s2_.resize(d);
    group_of_dim_.resize(d);
    for (int j = 0; j < d; ++j) {
        const double s = spec_.bandwidths(j);
        inv_s2_(j) = 1.0 / (s * s);
        const double scale = -0.5 * inv_s2_(j);
        int g = -1;
        for (std::size_t t = 0; t < group_scale_.size(); ++t)
            if (group_scale_[t] == scale) g = static_cast<int>(t);
        if (g < 0) {
            g = static_cast<int>(group_scale_.size());
            group_scale_.push_back(scale);
        }
        group_of_dim_[j] = g;
    }
}

void BasisEvaluator::squared_dist_row(const double* x, double* sq) const {
    kernels::squared_distances(spec_.centers.data(), count(), dim(), x, sq);
}

void BasisEvaluator::kernel_row(int g, const double* sq, double* e) const {
    kernels::exp_affine(sq, count(), group_scale_[g], 0.0, e);
}

void BasisEvaluator::kernel_rows(const double* x, double* sq_scratch,
                                 Matrix& rows) const {
    squared_dist_row(x, sq_scratch);
    for (int g = 0; g < group_count(); ++g)
        kernel_row(g, sq_scratch, rows.data() + static_cast<std::ptrdiff_t>(g) * count());
}

void BasisEvaluator::grad_row(int j, double xj, const double* e,
                              double* out) const {
    kernels::gradient_row(centers_dim(j), xj, inv_s2_(j), e, count(), out);
}

void BasisEvaluator::curv_row(int j, double xj, const double* e,
                              double* out) const {
    kernels::curvature_row(centers_dim(j), xj, inv_s2_(j), e, count(), out);
}

}  // namespace lsldg
