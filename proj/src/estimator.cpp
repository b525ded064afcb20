#include "lsldg/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "lsldg/kernels.hpp"

namespace lsldg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& m,
                                            double lambda) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "singular system (lambda = " << lambda
            << "); increase the l2 regularization";
        throw error(msg.str());
    }
    return llt;
}

}  // namespace

SufficientStats compute_stats(const Matrix& samples, const BasisSpec& basis) {
    basis.validate();
    const int n = static_cast<int>(samples.rows());
    const int d = basis.dim();
    const int b = basis.count();
    require(n >= 1, "stats need at least one sample");
    require(static_cast<int>(samples.cols()) == d,
            "data dimensionality does not match basis");

    BasisEvaluator ev(basis);
    SufficientStats stats;
    stats.sample_count = n;
    stats.gram.assign(d, Eigen::MatrixXd::Zero(b, b));
    stats.curvature.assign(d, Eigen::VectorXd::Zero(b));

    const int block = 256;
    Matrix kernel_rows(ev.group_count(), b);
    Vector sq(b);
    std::vector<Matrix> grads(d, Matrix(std::min(block, n), b));
    Vector curv(b);

    for (int start = 0; start < n; start += block) {
        const int m = std::min(block, n - start);
        for (int r = 0; r < m; ++r) {
            const double* x = samples.data() +
                              static_cast<std::ptrdiff_t>(start + r) * d;
            ev.kernel_rows(x, sq.data(), kernel_rows);
            for (int j = 0; j < d; ++j) {
                const double* e =
                    kernel_rows.data() +
                    static_cast<std::ptrdiff_t>(ev.group_of(j)) * b;
                ev.grad_row(j, x[j], e,
                            grads[j].data() + static_cast<std::ptrdiff_t>(r) * b);
                ev.curv_row(j, x[j], e, curv.data());
                stats.curvature[j] += curv;
            }
        }
        for (int j = 0; j < d; ++j) {
            auto rows = grads[j].topRows(m);
            stats.gram[j].selfadjointView<Eigen::Lower>().rankUpdate(
                rows.transpose(), 1.0);
        }
    }
    for (int j = 0; j < d; ++j) {
        stats.gram[j] = stats.gram[j]
                            .selfadjointView<Eigen::Lower>()
                            .toDenseMatrix() /
                        static_cast<double>(n);
        stats.curvature[j] /= static_cast<double>(n);
    }
    return stats;
}

SufficientStats compute_stats(const Dataset& data, const BasisSpec& basis) {
    data.validate();
    return compute_stats(data.samples, basis);
}

HyperParams HyperParams::uniform(int dim, double sigma, double lambda,
                                 double gamma) {
    HyperParams hp;
    hp.sigma = sigma;
    hp.lambda = lambda;
    hp.gamma = gamma;
    hp.similarity = Eigen::MatrixXd::Ones(dim, dim);
    hp.similarity.diagonal().setZero();
    return hp;
}

void HyperParams::validate(int dim) const {
    require(sigma > 0.0, "sigma must be positive");
    require(lambda >= 0.0, "lambda must be nonnegative");
    require(gamma >= 0.0, "gamma must be nonnegative");
    require(similarity.rows() == dim && similarity.cols() == dim,
            "similarity matrix has wrong size");
    require((similarity.array() >= 0.0).all(),
            "similarity entries must be nonnegative");
    require(similarity.diagonal().cwiseAbs().maxCoeff() == 0.0,
            "similarity diagonal must be zero");
    require((similarity - similarity.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "similarity matrix must be symmetric");
}

GradientModel::GradientModel(BasisSpec basis, Matrix coeffs)
    : ev_(std::move(basis)), coeffs_(std::move(coeffs)) {
    require(coeffs_.rows() == ev_.dim() && coeffs_.cols() == ev_.count(),
            "coefficient matrix does not match basis shape");
    require(coeffs_.allFinite(), "coefficients contain NaN or Inf");
}

Vector GradientModel::evaluate(const Vector& x) const {
    require(x.size() == dim(), "point dimensionality does not match model");
    const int b = basis_count();
    Vector sq(b), row(b);
    Matrix kernel_rows(ev_.group_count(), b);
    ev_.kernel_rows(x.data(), sq.data(), kernel_rows);
    Vector out(dim());
    for (int j = 0; j < dim(); ++j) {
        const double* e = kernel_rows.data() +
                          static_cast<std::ptrdiff_t>(ev_.group_of(j)) * b;
        ev_.grad_row(j, x(j), e, row.data());
        out(j) = kernels::dot(coeffs_.data() + static_cast<std::ptrdiff_t>(j) * b,
                              row.data(), b);
    }
    return out;
}

Matrix GradientModel::evaluate(const Matrix& points) const {
    require(points.cols() == dim(), "points dimensionality does not match model");
    Matrix out(points.rows(), dim());
    Vector x(dim());
    for (int i = 0; i < points.rows(); ++i) {
        x = points.row(i);
        out.row(i) = evaluate(x).transpose();
    }
    return out;
}

double GradientModel::log_density_partial(int j, const Vector& x) const {
    require(j >= 0 && j < dim(), "dimension index out of range");
    require(x.size() == dim(), "point dimensionality does not match model");
    const int b = basis_count();
    Vector sq(b), e(b);
    ev_.squared_dist_row(x.data(), sq.data());
    ev_.kernel_row(ev_.group_of(j), sq.data(), e.data());
    return kernels::dot(coeffs_.data() + static_cast<std::ptrdiff_t>(j) * b,
                        e.data(), b);
}

Matrix solve_single(const SufficientStats& stats, double lambda) {
    require(lambda >= 0.0, "lambda must be nonnegative");
    const int d = stats.dim();
    const int b = stats.basis_count();
    Matrix coeffs(d, b);
    Eigen::MatrixXd m(b, b);
    for (int j = 0; j < d; ++j) {
        m = stats.gram[j];
        m.diagonal().array() += lambda;
        auto llt = factor_or_throw(m, lambda);
        coeffs.row(j) = -llt.solve(stats.curvature[j]).transpose();
    }
    return coeffs;
}

Matrix solve_common(const SufficientStats& stats, double lambda) {
    require(lambda >= 0.0, "lambda must be nonnegative");
    const int d = stats.dim();
    const int b = stats.basis_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b, b);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b);
    for (int j = 0; j < d; ++j) {
        m += stats.gram[j];
        rhs += stats.curvature[j];
    }
    m.diagonal().array() += lambda;
    auto llt = factor_or_throw(m, lambda);
    const Eigen::VectorXd shared = -llt.solve(rhs);
    Matrix coeffs(d, b);
    for (int j = 0; j < d; ++j) coeffs.row(j) = shared.transpose();
    return coeffs;
}

namespace {

/// Off-diagonal similarity weight when all pairs share one value, else nullopt.
std::optional<double> uniform_similarity(const Eigen::MatrixXd& sim) {
    const int d = static_cast<int>(sim.rows());
    if (d < 2) return 0.0;
    const double w = sim(0, 1);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            if (j != k && sim(j, k) != w) return std::nullopt;
    return w;
}

/// Exact solve for uniform coupling: eliminating the coefficient sum T gives
/// (G_j + (lambda + g d) I) theta_j = -h_j + g T and a single b x b system
/// (I - g sum_j M_j^{-1}) T = -sum_j M_j^{-1} h_j, with g the effective
/// pairwise weight.
Matrix solve_mt_uniform(const SufficientStats& stats, double lambda, double g) {
    const int d = stats.dim();
    const int b = stats.basis_count();
    const double shift = lambda + g * d;
    Eigen::MatrixXd inv_sum = Eigen::MatrixXd::Zero(b, b);
    Eigen::VectorXd rhs_sum = Eigen::VectorXd::Zero(b);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
    factors.reserve(d);
    Eigen::MatrixXd m(b, b);
    for (int j = 0; j < d; ++j) {
        m = stats.gram[j];
        m.diagonal().array() += shift;
        factors.push_back(factor_or_throw(m, lambda));
        inv_sum += factors.back().solve(Eigen::MatrixXd::Identity(b, b));
        rhs_sum += factors.back().solve(stats.curvature[j]);
    }
    Eigen::MatrixXd pivot = Eigen::MatrixXd::Identity(b, b) - g * inv_sum;
    // symmetric (sum of inverses of symmetric matrices); PD whenever lambda>0
    Eigen::LLT<Eigen::MatrixXd> pivot_llt(pivot);
    if (pivot_llt.info() != Eigen::Success)
        throw error("singular coupled system; increase the l2 regularization");
    const Eigen::VectorXd total = pivot_llt.solve(-rhs_sum);
    Matrix coeffs(d, b);
    Eigen::VectorXd rhs(b);
    for (int j = 0; j < d; ++j) {
        rhs = -stats.curvature[j] + g * total;
        coeffs.row(j) = factors[j].solve(rhs).transpose();
    }
    return coeffs;
}

Matrix solve_mt_dense(const SufficientStats& stats, const HyperParams& hp) {
    const int d = stats.dim();
    const int b = stats.basis_count();
    const int db = d * b;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(db, db);
    Eigen::VectorXd rhs(db);
    for (int j = 0; j < d; ++j) {
        const double s_j = hp.similarity.row(j).sum();
        system.block(j * b, j * b, b, b) = stats.gram[j];
        system.block(j * b, j * b, b, b).diagonal().array() +=
            hp.lambda + hp.gamma * s_j;
        for (int k = 0; k < d; ++k) {
            if (k == j) continue;
            const double w = hp.gamma * hp.similarity(j, k);
            if (w != 0.0)
                system.block(j * b, k * b, b, b).diagonal().array() -= w;
        }
        rhs.segment(j * b, b) = -stats.curvature[j];
    }
    auto llt = factor_or_throw(system, hp.lambda);
    const Eigen::VectorXd stacked = llt.solve(rhs);
    Matrix coeffs(d, b);
    for (int j = 0; j < d; ++j)
        coeffs.row(j) = stacked.segment(j * b, b).transpose();
    return coeffs;
}

}  // namespace

Matrix solve_mt_analytic(const SufficientStats& stats, const HyperParams& hp,
                         int max_dense_dim) {
    const int d = stats.dim();
    hp.validate(d);
    if (hp.gamma == 0.0 || d == 1) return solve_single(stats, hp.lambda);
    if (hp.gamma == kInf) return solve_common(stats, d * hp.lambda);
    if (auto w = uniform_similarity(hp.similarity)) {
        if (*w == 0.0) return solve_single(stats, hp.lambda);
        return solve_mt_uniform(stats, hp.lambda, hp.gamma * *w);
    }
    require(d * stats.basis_count() <= max_dense_dim,
            "stacked system exceeds the dense-solve limit; use the block "
            "coordinate descent solver");
    return solve_mt_dense(stats, hp);
}

BcdResult solve_mt_bcd(const SufficientStats& stats, const HyperParams& hp,
                       const Matrix* init, const BcdOptions& opts) {
    const int d = stats.dim();
    const int b = stats.basis_count();
    hp.validate(d);
    require(hp.gamma != kInf, "block coordinate descent needs finite gamma");
    require(opts.tol > 0.0 && opts.max_sweeps >= 1, "invalid BCD options");
    if (init)
        require(init->rows() == d && init->cols() == b,
                "warm start has wrong shape");

    BcdResult result;
    if (hp.gamma == 0.0 || d == 1) {
        result.coeffs = solve_single(stats, hp.lambda);
        result.sweeps = 1;
        result.converged = true;
        if (opts.track_objective)
            result.objective_trace.push_back(mt_objective(stats, hp, result.coeffs));
        return result;
    }

    Matrix theta = init ? *init : Matrix::Zero(d, b);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
    factors.reserve(d);
    Eigen::MatrixXd m(b, b);
    for (int j = 0; j < d; ++j) {
        const double s_j = hp.similarity.row(j).sum();
        m = stats.gram[j];
        m.diagonal().array() += hp.lambda + hp.gamma * s_j;
        factors.push_back(factor_or_throw(m, hp.lambda));
    }

    Eigen::VectorXd rhs(b), updated(b);
    double prev_delta = -1.0;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double delta = 0.0;
        for (int j = 0; j < d; ++j) {
            rhs = -stats.curvature[j] +
                  hp.gamma * (theta.transpose() * hp.similarity.row(j).transpose());
            updated = factors[j].solve(rhs);
            delta = std::max(delta,
                             (updated.transpose() - theta.row(j)).cwiseAbs().maxCoeff());
            theta.row(j) = updated.transpose();
        }
        result.sweeps = sweep;
        if (opts.track_objective)
            result.objective_trace.push_back(mt_objective(stats, hp, theta));
        if (delta < opts.tol) {
            // the step alone undersells the remaining error when the sweep
            // contraction is slow; project the geometric tail before stopping
            double projected = delta;
            if (prev_delta > delta)
                projected = delta * delta / (prev_delta - delta);
            if (projected <= opts.tol) {
                result.converged = true;
                break;
            }
        }
        prev_delta = delta;
    }
    result.coeffs = std::move(theta);
    return result;
}

double mt_objective(const SufficientStats& stats, const HyperParams& hp,
                    const Matrix& coeffs) {
    const int d = stats.dim();
    hp.validate(d);
    require(hp.gamma != kInf, "objective is defined for finite gamma");
    double obj = 0.0;
    for (int j = 0; j < d; ++j) {
        const Eigen::VectorXd t = coeffs.row(j).transpose();
        obj += t.dot(stats.gram[j] * t) + 2.0 * t.dot(stats.curvature[j]) +
               hp.lambda * t.squaredNorm();
    }
    double coupling = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            if (hp.similarity(j, k) != 0.0)
                coupling += hp.similarity(j, k) *
                            (coeffs.row(j) - coeffs.row(k)).squaredNorm();
    return obj + 0.5 * hp.gamma * coupling;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int c = 0; c < m.cols(); ++c) out << (c ? " " : "") << fmt(m(i, c));
        out << '\n';
    }
}

}  // namespace

void save_model(const GradientModel& model, const HyperParams& hp,
                const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write model file: " + path.string());
    const auto& spec = model.basis();
    out << "lsldg-model 1\n";
    out << "dims " << spec.dim() << "\n";
    out << "basis " << spec.count() << "\n";
    out << "bandwidths";
    for (int j = 0; j < spec.dim(); ++j) out << ' ' << fmt(spec.bandwidths(j));
    out << "\nsigma " << fmt(hp.sigma) << "\n";
    out << "lambda " << fmt(hp.lambda) << "\n";
    out << "gamma " << fmt(hp.gamma) << "\n";
    out << "similarity\n";
    write_matrix(out, Matrix(hp.similarity));
    out << "centers\n";
    write_matrix(out, spec.centers);
    out << "coeffs\n";
    write_matrix(out, model.coeffs());
    require(out.good(), "write failed: " + path.string());
}

namespace {

std::string next_token(std::istream& in, const std::string& context) {
    std::string tok;
    require(static_cast<bool>(in >> tok), "model file truncated at " + context);
    return tok;
}

double next_double(std::istream& in, const std::string& context) {
    const std::string tok = next_token(in, context);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    require(end == tok.c_str() + tok.size(),
            "bad numeric value in model file at " + context + ": '" + tok + "'");
    return v;
}

void expect(std::istream& in, const std::string& keyword) {
    const std::string tok = next_token(in, keyword);
    require(tok == keyword,
            "malformed model file: expected '" + keyword + "', got '" + tok + "'");
}

Matrix read_matrix(std::istream& in, int rows, int cols, const std::string& what) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c) m(i, c) = next_double(in, what);
    return m;
}

}  // namespace

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open model file: " + path.string());
    expect(in, "lsldg-model");
    const std::string version = next_token(in, "version");
    require(version == "1", "unsupported model file version: " + version);
    expect(in, "dims");
    const int d = static_cast<int>(next_double(in, "dims"));
    expect(in, "basis");
    const int b = static_cast<int>(next_double(in, "basis"));
    require(d >= 1 && b >= 1, "model file has invalid dimensions");
    expect(in, "bandwidths");
    Vector bandwidths(d);
    for (int j = 0; j < d; ++j) bandwidths(j) = next_double(in, "bandwidths");
    HyperParams hp;
    expect(in, "sigma");
    hp.sigma = next_double(in, "sigma");
    expect(in, "lambda");
    hp.lambda = next_double(in, "lambda");
    expect(in, "gamma");
    hp.gamma = next_double(in, "gamma");
    expect(in, "similarity");
    hp.similarity = read_matrix(in, d, d, "similarity");
    expect(in, "centers");
    BasisSpec spec;
    spec.centers = read_matrix(in, b, d, "centers");
    spec.bandwidths = bandwidths;
    expect(in, "coeffs");
    Matrix coeffs = read_matrix(in, d, b, "coeffs");
    return LoadedModel{GradientModel(std::move(spec), std::move(coeffs)), hp};
}

}  // namespace lsldg
