#include "lsldg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "lsldg/kernels.hpp"

namespace lsldg {

void SeekConfig::validate() const {
    require(max_iters >= 1, "max_iters must be >= 1");
    require(step_tol > 0.0, "step_tol must be positive");
    require(denominator_floor > 0.0, "denominator_floor must be positive");
}

std::optional<Vector> lsldg_update(const GradientModel& model, const Vector& x,
                                   double denominator_floor) {
    const auto& ev = model.evaluator();
    const int d = model.dim();
    const int b = model.basis_count();
    require(x.size() == d, "point dimensionality does not match model");

    Vector sq(b);
    Matrix kernel_rows(ev.group_count(), b);
    ev.kernel_rows(x.data(), sq.data(), kernel_rows);

    Vector out(d);
    for (int j = 0; j < d; ++j) {
        const double* e = kernel_rows.data() +
                          static_cast<std::ptrdiff_t>(ev.group_of(j)) * b;
        const double* coeff =
            model.coeffs().data() + static_cast<std::ptrdiff_t>(j) * b;
        const double denom = kernels::dot(coeff, e, b);
        if (std::abs(denom) < denominator_floor) return std::nullopt;
        const double numer = kernels::dot3(coeff, ev.centers_dim(j), e, b);
        out(j) = numer / denom;
    }
    return out;
}

Vector mean_shift_update(const KdeModel& model, const Vector& x) {
    const Vector w = kde_weights(model, x);
    Vector out(model.dim());
    kernels::weighted_mean(model.points.data(), model.count(), model.dim(),
                           w.data(), out.data());
    return out;
}

SeekOutcome seek_modes(const UpdateFn& update, const Matrix& starts,
                       const SeekConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(starts.rows());
    SeekOutcome out;
    out.terminals = starts;
    out.iterations.assign(n, 0);
    out.converged.assign(n, 0);

    Vector x(starts.cols());
    for (int i = 0; i < n; ++i) {
        x = starts.row(i);
        int iters = 0;
        bool done = false;
        while (iters < cfg.max_iters) {
            const auto next = update(x);
            ++iters;
            if (!next) break;  // degenerate step; stop where we are
            const double step = (*next - x).cwiseAbs().maxCoeff();
            x = *next;
            if (step < cfg.step_tol) {
                done = true;
                break;
            }
        }
        out.terminals.row(i) = x.transpose();
        out.iterations[i] = iters;
        out.converged[i] = done ? 1 : 0;
    }
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void merge(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

ClusteringResult merge_and_label(const Matrix& terminals,
                                 const std::vector<char>& converged,
                                 double merge_radius) {
    const int n = static_cast<int>(terminals.rows());
    const int d = static_cast<int>(terminals.cols());
    require(n >= 1, "nothing to label");
    require(static_cast<int>(converged.size()) == n,
            "converged flags do not match terminal count");
    require(merge_radius > 0.0, "merge radius must be positive");

    std::vector<int> formers;
    for (int i = 0; i < n; ++i)
        if (converged[i]) formers.push_back(i);
    // no trajectory converged: group everything we have
    if (formers.empty()) {
        formers.resize(n);
        std::iota(formers.begin(), formers.end(), 0);
    }

    UnionFind uf(static_cast<int>(formers.size()));
    for (std::size_t a = 0; a < formers.size(); ++a)
        for (std::size_t b = a + 1; b < formers.size(); ++b) {
            const double dist =
                (terminals.row(formers[a]) - terminals.row(formers[b])).norm();
            if (dist <= merge_radius)
                uf.merge(static_cast<int>(a), static_cast<int>(b));
        }

    // groups ordered by smallest member index -> deterministic mode order
    std::vector<int> root_to_group;
    std::vector<int> group_of_former(formers.size());
    for (std::size_t a = 0; a < formers.size(); ++a) {
        const int root = uf.find(static_cast<int>(a));
        int g = -1;
        for (std::size_t t = 0; t < root_to_group.size(); ++t)
            if (root_to_group[t] == root) g = static_cast<int>(t);
        if (g < 0) {
            g = static_cast<int>(root_to_group.size());
            root_to_group.push_back(root);
        }
        group_of_former[a] = g;
    }
    const int m = static_cast<int>(root_to_group.size());

    ClusteringResult result;
    result.modes = Matrix::Zero(m, d);
    std::vector<int> group_sizes(m, 0);
    for (std::size_t a = 0; a < formers.size(); ++a) {
        result.modes.row(group_of_former[a]) += terminals.row(formers[a]);
        ++group_sizes[group_of_former[a]];
    }
    for (int g = 0; g < m; ++g) result.modes.row(g) /= group_sizes[g];

    result.labels.assign(n, -1);
    for (std::size_t a = 0; a < formers.size(); ++a)
        result.labels[formers[a]] = group_of_former[a];
    for (int i = 0; i < n; ++i) {
        if (result.labels[i] >= 0) continue;
        int best = 0;
        double best_dist = (terminals.row(i) - result.modes.row(0)).norm();
        for (int g = 1; g < m; ++g) {
            const double dist = (terminals.row(i) - result.modes.row(g)).norm();
            if (dist < best_dist) {
                best_dist = dist;
                best = g;
            }
        }
        result.labels[i] = best;
    }
    for (int i = 0; i < n; ++i)
        if (!converged[i]) result.unconverged.push_back(i);
    return result;
}

void write_assignments_csv(const ClusteringResult& result,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    std::vector<char> unconv(result.labels.size(), 0);
    for (int i : result.unconverged) unconv[i] = 1;
    out << "index,label,iterations,converged\n";
    for (std::size_t i = 0; i < result.labels.size(); ++i)
        out << i << ',' << result.labels[i] << ',' << result.iterations[i] << ','
            << (unconv[i] ? 0 : 1) << '\n';
    require(out.good(), "write failed: " + path.string());
}

void write_modes_csv(const ClusteringResult& result,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    char buf[32];
    for (int g = 0; g < result.modes.rows(); ++g) {
        for (int c = 0; c < result.modes.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", result.modes(g, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    require(out.good(), "write failed: " + path.string());
}

ClusterMethod parse_cluster_method(const std::string& name) {
    if (name == "mtlsldgc") return ClusterMethod::mtlsldgc;
    if (name == "slsldgc") return ClusterMethod::slsldgc;
    if (name == "clsldgc") return ClusterMethod::clsldgc;
    if (name == "meanshift") return ClusterMethod::meanshift;
    throw error("unknown clustering method '" + name +
                "'; valid: mtlsldgc, slsldgc, clsldgc, meanshift");
}

const char* cluster_method_name(ClusterMethod m) {
    switch (m) {
        case ClusterMethod::mtlsldgc: return "mtlsldgc";
        case ClusterMethod::slsldgc: return "slsldgc";
        case ClusterMethod::clsldgc: return "clsldgc";
        case ClusterMethod::meanshift: return "meanshift";
    }
    return "unknown";
}

ClusterOutput cluster(const Dataset& data, ClusterMethod method,
                      const ClusterOptions& opts) {
    data.validate();
    opts.seek.validate();

    ClusterOutput out;
    out.merge_radius = opts.seek.merge_radius > 0.0
                           ? opts.seek.merge_radius
                           : 1e-2 * median_pairwise_distance(data.samples);

    UpdateFn update;
    if (method == ClusterMethod::meanshift) {
        const auto bw = kde_select_bandwidth(data, opts.kde_bandwidths,
                                             opts.folds, opts.seed);
        out.kde_sigma = bw.sigma;
        KdeModel kde{data.samples, bw.sigma};
        update = [kde](const Vector& x) -> std::optional<Vector> {
            return mean_shift_update(kde, x);
        };
    } else {
        Grid grid = opts.grid;
        if (method == ClusterMethod::slsldgc) grid.gammas = {0.0};
        if (method == ClusterMethod::clsldgc)
            grid.gammas = {std::numeric_limits<double>::infinity()};
        SelectOptions sopts;
        sopts.folds = opts.folds;
        sopts.max_centers = opts.max_centers;
        sopts.solver = opts.solver;
        sopts.bcd = opts.bcd;
        auto selected = select(data, grid, opts.seed, sopts);
        out.model.emplace(std::move(selected.model));
        const GradientModel& model = *out.model;
        const double floor = opts.seek.denominator_floor;
        update = [&model, floor](const Vector& x) {
            return lsldg_update(model, x, floor);
        };
    }

    auto outcome = seek_modes(update, data.samples, opts.seek);
    out.result = merge_and_label(outcome.terminals, outcome.converged,
                                 out.merge_radius);
    out.result.iterations = std::move(outcome.iterations);
    return out;
}

}  // namespace lsldg
