#include <cmath>
#include <limits>

#include "doctest.h"
#include "lsldg/clustering.hpp"
#include "lsldg/metrics.hpp"
#include "support.hpp"

using namespace lsldg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GeneratedSample three_blobs(int d, int n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.family = MixtureFamily::three_gaussian_mixture;
    spec.dim = d;
    spec.count = n;
    spec.seed = seed;
    return generate(spec);
}

Grid small_grid() {
    Grid grid;
    grid.sigmas = {0.3, 0.5, 0.8, 1.3};
    grid.lambdas = {1e-4, 1e-3, 1e-2, 1e-1};
    grid.gammas = {0.0, 0.1, 1.0, kInf};
    return grid;
}

}  // namespace

TEST_CASE("one-center models jump straight to the center") {
    BasisSpec spec;
    spec.centers.resize(1, 2);
    spec.centers << 1.5, -0.5;
    spec.bandwidths = Vector::Constant(2, 1.0);
    const GradientModel model(spec, Matrix::Constant(2, 1, 0.7));
    Vector x(2);
    x << 4.0, -3.0;
    const auto next = lsldg_update(model, x);
    REQUIRE(next.has_value());
    CHECK((*next - spec.centers.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("symmetric two-center models fix the midpoint") {
    BasisSpec spec;
    spec.centers.resize(2, 1);
    spec.centers << -1.0, 1.0;
    spec.bandwidths = Vector::Constant(1, 0.9);
    const GradientModel model(spec, Matrix::Constant(1, 2, 0.4));
    Vector mid(1);
    mid << 0.0;
    const auto next = lsldg_update(model, mid);
    REQUIRE(next.has_value());
    CHECK(std::abs((*next)(0)) <= 1e-14);
}

TEST_CASE("fixed points of the update are zeros of the gradient field") {
    const auto sample = three_blobs(2, 150, 90);
    const auto basis = select_centers(sample.data, 40, 6).with_bandwidth(0.6);
    const auto stats = compute_stats(sample.data, basis);
    const GradientModel model(basis, solve_single(stats, 1e-3));

    SeekConfig cfg;
    cfg.step_tol = 1e-12;
    cfg.max_iters = 3000;
    const auto outcome = seek_modes(
        [&](const Vector& x) { return lsldg_update(model, x); },
        sample.data.samples.topRows(20), cfg);
    for (int i = 0; i < 20; ++i) {
        if (!outcome.converged[i]) continue;
        const Vector mode = outcome.terminals.row(i).transpose();
        CHECK(model.evaluate(mode).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("degenerate denominators are signaled, not guessed") {
    BasisSpec spec;
    spec.centers.resize(2, 1);
    spec.centers << -1.0, 1.0;
    spec.bandwidths = Vector::Constant(1, 1.0);
    Matrix coeffs(1, 2);
    coeffs << 0.5, -0.5;  // antisymmetric: denominator vanishes at 0
    const GradientModel model(spec, coeffs);
    Vector x(1);
    x << 0.0;
    CHECK(!lsldg_update(model, x).has_value());
}

TEST_CASE("mean shift with one point maps everywhere to that point") {
    KdeModel kde;
    kde.points.resize(1, 2);
    kde.points << 0.3, -0.9;
    kde.sigma = 0.7;
    Vector x(2);
    x << 100.0, 100.0;
    const Vector next = mean_shift_update(kde, x);
    CHECK((next - kde.points.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mean shift stays in the convex hull and ascends the density") {
    Rng rng(91);
    KdeModel kde;
    kde.points.resize(25, 1);
    for (int i = 0; i < 25; ++i) kde.points(i, 0) = rng.normal();
    kde.sigma = 0.5;
    const double lo = kde.points.minCoeff(), hi = kde.points.maxCoeff();
    Vector x(1);
    x << 1.7;
    double prev_log = kde_log_density(kde, x);
    for (int t = 0; t < 200; ++t) {
        x = mean_shift_update(kde, x);
        CHECK(x(0) >= lo - 1e-12);
        CHECK(x(0) <= hi + 1e-12);
        const double cur = kde_log_density(kde, x);
        CHECK(cur >= prev_log - 1e-12);
        prev_log = cur;
    }
    // terminal point is stationary for the kde gradient
    const Vector fixed = mean_shift_update(kde, x);
    CHECK(std::abs(fixed(0) - x(0)) <= 1e-10);
    CHECK(std::abs(kde_log_gradient(kde, x)(0)) <= 1e-8);
}

TEST_CASE("seek_modes counts one iteration at a fixed start") {
    KdeModel kde;
    kde.points.resize(1, 1);
    kde.points << 2.0;
    kde.sigma = 1.0;
    Matrix starts(1, 1);
    starts << 2.0;
    SeekConfig cfg;
    const auto outcome = seek_modes(
        [&](const Vector& x) -> std::optional<Vector> {
            return mean_shift_update(kde, x);
        },
        starts, cfg);
    CHECK(outcome.iterations[0] == 1);
    CHECK(outcome.converged[0] == 1);
    CHECK(outcome.terminals(0, 0) == 2.0);
}

TEST_CASE("max_iters 1 performs exactly one update") {
    KdeModel kde;
    kde.points.resize(2, 1);
    kde.points << 0.0, 4.0;
    kde.sigma = 1.0;
    Matrix starts(1, 1);
    starts << 3.0;
    SeekConfig cfg;
    cfg.max_iters = 1;
    const auto outcome = seek_modes(
        [&](const Vector& x) -> std::optional<Vector> {
            return mean_shift_update(kde, x);
        },
        starts, cfg);
    Vector x(1);
    x << 3.0;
    CHECK(outcome.terminals(0, 0) ==
          doctest::Approx(mean_shift_update(kde, x)(0)).epsilon(1e-15));
    CHECK(outcome.converged[0] == 0);
}

TEST_CASE("well-separated blobs converge almost everywhere") {
    const auto sample = three_blobs(2, 300, 92);
    const auto basis = select_centers(sample.data, 50, 7).with_bandwidth(0.5);
    const auto stats = compute_stats(sample.data, basis);
    const GradientModel model(basis, solve_single(stats, 1e-3));
    SeekConfig cfg;
    cfg.max_iters = 500;
    const auto outcome = seek_modes(
        [&](const Vector& x) { return lsldg_update(model, x); },
        sample.data.samples, cfg);
    int converged = 0;
    for (char c : outcome.converged) converged += c;
    CHECK(converged >= 297);  // >= 99%
}

TEST_CASE("merging groups chained terminals") {
    Matrix terminals(3, 1);
    const double r = 0.25;
    terminals << 0.0, r, 2 * r;
    std::vector<char> conv = {1, 1, 1};
    const auto res = merge_and_label(terminals, conv, r);
    CHECK(res.cluster_count() == 1);  // single-linkage chains through
    CHECK(res.labels == std::vector<int>({0, 0, 0}));

    Matrix apart(2, 1);
    apart << 0.0, 10 * r;
    const auto res2 = merge_and_label(apart, {1, 1}, r);
    CHECK(res2.cluster_count() == 2);

    Matrix same(4, 2);
    same << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    const auto res3 = merge_and_label(same, {1, 1, 1, 1}, 0.1);
    CHECK(res3.cluster_count() == 1);
    CHECK(res3.modes(0, 0) == 1.0);
    CHECK(res3.modes(0, 1) == 2.0);
}

TEST_CASE("unconverged points get the nearest mode but stay flagged") {
    Matrix terminals(3, 1);
    terminals << 0.0, 5.0, 0.9;
    std::vector<char> conv = {1, 1, 0};
    const auto res = merge_and_label(terminals, conv, 0.5);
    CHECK(res.cluster_count() == 2);
    CHECK(res.labels[2] == res.labels[0]);  // 0.9 is nearer to mode 0
    CHECK(res.unconverged == std::vector<int>({2}));
}

TEST_CASE("labels form a valid partition whose ARI survives relabeling") {
    const auto sample = three_blobs(2, 200, 93);
    ClusterOptions opts;
    opts.grid = small_grid();
    opts.seed = 17;
    const auto out = cluster(sample.data, ClusterMethod::slsldgc, opts);
    REQUIRE(out.result.labels.size() == 200);
    for (int label : out.result.labels) {
        CHECK(label >= 0);
        CHECK(label < out.result.cluster_count());
    }
    const double ari =
        adjusted_rand_index(out.result.labels, sample.component_labels);
    std::vector<int> relabeled(sample.component_labels);
    for (auto& v : relabeled) v = (v + 7) % 3 + 100;
    CHECK(adjusted_rand_index(out.result.labels, relabeled) ==
          doctest::Approx(ari).epsilon(1e-15));
}

TEST_CASE("gradient-based clustering recovers the three blobs in 2-d") {
    const auto sample = three_blobs(2, 300, 94);
    ClusterOptions opts;
    opts.grid = small_grid();
    opts.seed = 18;
    for (auto method : {ClusterMethod::slsldgc, ClusterMethod::mtlsldgc}) {
        const auto out = cluster(sample.data, method, opts);
        const double ari =
            adjusted_rand_index(out.result.labels, sample.component_labels);
        CHECK(ari >= 0.9);
        REQUIRE(out.model.has_value());
        // returned modes are stationary points of the fitted field
        for (int g = 0; g < out.result.cluster_count(); ++g) {
            const Vector mode = out.result.modes.row(g).transpose();
            CHECK(out.model->evaluate(mode).cwiseAbs().maxCoeff() < 1e-3);
        }
    }
}

TEST_CASE("mean shift recovers 2-d blobs but collapses in high dimension") {
    const auto flat = three_blobs(2, 300, 95);
    ClusterOptions opts;
    opts.kde_bandwidths = {0.2, 0.3, 0.5, 0.8, 1.3, 2.0};
    opts.seed = 19;
    const auto good = cluster(flat.data, ClusterMethod::meanshift, opts);
    CHECK(adjusted_rand_index(good.result.labels, flat.component_labels) >= 0.9);

    const auto tall = three_blobs(10, 300, 96);
    const auto bad = cluster(tall.data, ClusterMethod::meanshift, opts);
    CHECK(adjusted_rand_index(bad.result.labels, tall.component_labels) < 0.2);
}

TEST_CASE("clustering is deterministic in seed and config") {
    const auto sample = three_blobs(2, 120, 97);
    ClusterOptions opts;
    opts.grid = small_grid();
    opts.seed = 23;
    const auto a = cluster(sample.data, ClusterMethod::mtlsldgc, opts);
    const auto b = cluster(sample.data, ClusterMethod::mtlsldgc, opts);
    CHECK(a.result.labels == b.result.labels);
    CHECK((a.result.modes - b.result.modes).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.result.iterations == b.result.iterations);
}

TEST_CASE("method names parse both ways") {
    CHECK(parse_cluster_method("meanshift") == ClusterMethod::meanshift);
    CHECK(parse_cluster_method(cluster_method_name(ClusterMethod::clsldgc)) ==
          ClusterMethod::clsldgc);
    CHECK_THROWS_AS(parse_cluster_method("kmeans"), error);
}
