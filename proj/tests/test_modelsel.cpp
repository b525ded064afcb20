#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "lsldg/metrics.hpp"
#include "lsldg/modelsel.hpp"
#include "support.hpp"

using namespace lsldg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Dataset standard_normal(int d, int n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.family = MixtureFamily::custom_gaussian_mixture;
    spec.dim = d;
    spec.count = n;
    spec.seed = seed;
    GaussianComponent comp;
    comp.weight = 1.0;
    comp.mean = Vector::Zero(d);
    comp.covariance = Matrix::Identity(d, d);
    spec.components = {comp};
    return generate(spec).data;
}

}  // namespace

TEST_CASE("grid validation") {
    Grid g;
    g.sigmas = {0.5, 1.0};
    g.lambdas = {0.1};
    g.gammas = {0.0, 1.0, kInf};
    CHECK_NOTHROW(g.validate());

    Grid bad = g;
    bad.sigmas = {1.0, 0.5};
    CHECK_THROWS_AS(bad.validate(), error);
    bad = g;
    bad.lambdas = {0.1, 0.1};
    CHECK_THROWS_AS(bad.validate(), error);
    bad = g;
    bad.gammas = {kInf, 1.0};
    CHECK_THROWS_AS(bad.validate(), error);
    bad = g;
    bad.sigmas = {0.5, kInf};
    CHECK_THROWS_AS(bad.validate(), error);
    bad = g;
    bad.lambdas.clear();
    CHECK_THROWS_AS(bad.validate(), error);
}

TEST_CASE("huge ridge drives the held-out score to zero") {
    const auto train = standard_normal(1, 200, 70);
    const auto holdout = standard_normal(1, 100, 71);
    const auto centers = select_centers(train, 20, 1);
    auto hp = HyperParams::uniform(1, 1.0, 1e12, 0.0);
    CHECK(std::abs(cv_score(train, holdout, centers, hp, Solver::analytic)) <=
          1e-3);
}

TEST_CASE("well-tuned 1-d score sits near the known optimum") {
    // truth: gradient of log N(0,1) is -x, and the score optimum is -1
    const auto train = standard_normal(1, 2000, 72);
    const auto holdout = standard_normal(1, 2000, 73);
    const auto centers = select_centers(train, 50, 2);
    auto hp = HyperParams::uniform(1, 0.7, 0.01, 0.0);
    const double score = cv_score(train, holdout, centers, hp, Solver::analytic);
    CHECK(score >= -1.2);
    CHECK(score <= -0.6);
}

TEST_CASE("in-sample score equals the quadratic-form objective value") {
    const auto train = standard_normal(2, 150, 74);
    const auto centers = select_centers(train, 25, 3);
    auto hp = HyperParams::uniform(2, 0.8, 0.05, 0.0);
    const double in_sample =
        cv_score(train, train, centers, hp, Solver::analytic);

    const auto basis = centers.with_bandwidth(hp.sigma);
    const auto stats = compute_stats(train, basis);
    const Matrix coeffs = solve_single(stats, hp.lambda);
    double want = 0.0;
    for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd t = coeffs.row(j).transpose();
        want += t.dot(stats.gram[j] * t) + 2.0 * t.dot(stats.curvature[j]);
    }
    CHECK(in_sample == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("cv errors carry the hyperparameter context") {
    const auto train = standard_normal(1, 30, 75);
    const auto centers = select_centers(train, 10, 4);
    auto hp = HyperParams::uniform(1, 1e-8, 0.0, 0.0);  // singular at lambda 0
    CHECK_THROWS_WITH_AS(
        cv_score(train, train, centers, hp, Solver::analytic),
        doctest::Contains("sigma="), error);
}

TEST_CASE("a one-triple grid is chosen and refit") {
    const auto data = standard_normal(2, 120, 76);
    Grid grid;
    grid.sigmas = {0.9};
    grid.lambdas = {0.01};
    grid.gammas = {0.0};
    const auto result = select(data, grid, 5, {});
    CHECK(result.report.entries.size() == 1);
    CHECK(result.report.chosen_index == 0);
    CHECK(result.chosen.sigma == 0.9);

    // the refit equals a plain fit with the same centers
    const auto centers =
        select_centers(data, 50, derive_seed(5, 0x73656c31));
    const auto stats = compute_stats(data, centers.with_bandwidth(0.9));
    const Matrix want = solve_single(stats, 0.01);
    CHECK((result.model.coeffs() - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("report means equal a manual cv_score loop") {
    const auto data = standard_normal(2, 100, 77);
    Grid grid;
    grid.sigmas = {0.6, 1.2};
    grid.lambdas = {0.01, 0.1};
    grid.gammas = {0.0, 0.5, kInf};
    SelectOptions opts;
    opts.folds = 4;
    opts.max_centers = 15;
    const auto result = select(data, grid, 11, opts);
    REQUIRE(result.report.entries.size() == 12);

    const auto centers =
        select_centers(data, 15, derive_seed(11, 0x73656c31));
    const auto part = make_folds(data.count(), 4, derive_seed(11, 0x73656c32));
    for (const auto& entry : result.report.entries) {
        double total = 0.0;
        for (int k = 0; k < 4; ++k) {
            Dataset train, hold;
            const auto tr = part.complement(k);
            const auto ho = part.members(k);
            train.samples.resize(static_cast<int>(tr.size()), 2);
            hold.samples.resize(static_cast<int>(ho.size()), 2);
            for (std::size_t i = 0; i < tr.size(); ++i)
                train.samples.row(static_cast<int>(i)) = data.samples.row(tr[i]);
            for (std::size_t i = 0; i < ho.size(); ++i)
                hold.samples.row(static_cast<int>(i)) = data.samples.row(ho[i]);
            auto hp = HyperParams::uniform(2, entry.sigma, entry.lambda,
                                           entry.gamma);
            total += cv_score(train, hold, centers, hp, Solver::analytic);
        }
        CHECK(entry.mean_score == doctest::Approx(total / 4).epsilon(1e-10));
    }

    // the chosen triple attains the minimum of the table
    double best = kInf;
    for (const auto& e : result.report.entries) best = std::min(best, e.mean_score);
    CHECK(result.report.chosen().mean_score == best);
}

TEST_CASE("selection is reproducible and stable under grid pruning") {
    const auto data = standard_normal(2, 90, 78);
    Grid grid;
    grid.sigmas = {0.5, 1.0, 2.0};
    grid.lambdas = {0.01, 0.1};
    grid.gammas = {0.0, 1.0};
    const auto a = select(data, grid, 21, {});
    const auto b = select(data, grid, 21, {});
    REQUIRE(a.report.entries.size() == b.report.entries.size());
    for (std::size_t i = 0; i < a.report.entries.size(); ++i) {
        CHECK(a.report.entries[i].mean_score == b.report.entries[i].mean_score);
    }
    CHECK(a.report.chosen_index == b.report.chosen_index);

    // drop a non-selected sigma; the winner must not change
    const auto& chosen = a.report.chosen();
    Grid pruned = grid;
    pruned.sigmas.clear();
    for (double s : grid.sigmas)
        if (s == chosen.sigma || s != grid.sigmas.front()) pruned.sigmas.push_back(s);
    if (pruned.sigmas.size() == grid.sigmas.size())
        pruned.sigmas.erase(pruned.sigmas.end() - 1);
    if (std::find(pruned.sigmas.begin(), pruned.sigmas.end(), chosen.sigma) ==
        pruned.sigmas.end())
        pruned.sigmas.push_back(chosen.sigma);
    std::sort(pruned.sigmas.begin(), pruned.sigmas.end());
    const auto c = select(data, pruned, 21, {});
    CHECK(c.report.chosen().sigma == chosen.sigma);
    CHECK(c.report.chosen().lambda == chosen.lambda);
    CHECK(c.report.chosen().gamma == chosen.gamma);
}

TEST_CASE("warm-started gamma path matches per-triple bcd fits") {
    const auto data = standard_normal(3, 80, 79);
    Grid grid;
    grid.sigmas = {0.8};
    grid.lambdas = {0.05};
    grid.gammas = {0.0, 0.5, 2.0, kInf};
    SelectOptions bcd_opts;
    bcd_opts.solver = Solver::bcd;
    SelectOptions ana_opts;
    ana_opts.solver = Solver::analytic;
    const auto via_bcd = select(data, grid, 31, bcd_opts);
    const auto via_ana = select(data, grid, 31, ana_opts);
    REQUIRE(via_bcd.report.entries.size() == via_ana.report.entries.size());
    for (std::size_t i = 0; i < via_bcd.report.entries.size(); ++i)
        CHECK(via_bcd.report.entries[i].mean_score ==
              doctest::Approx(via_ana.report.entries[i].mean_score).epsilon(1e-7));
}

TEST_CASE("every-triple-failure raises an aggregate error") {
    const auto data = standard_normal(1, 30, 80);
    Grid grid;
    grid.sigmas = {1e-9};  // kernel rows collapse; gram is singular
    grid.lambdas = {0.0};
    grid.gammas = {0.0};
    CHECK_THROWS_WITH_AS(select(data, grid, 3, {}),
                         doctest::Contains("every grid triple failed"), error);
}

TEST_CASE("cv report serializes one row per fold plus mean rows") {
    const auto data = standard_normal(1, 40, 81);
    Grid grid;
    grid.sigmas = {0.8, 1.6};
    grid.lambdas = {0.1};
    grid.gammas = {0.0};
    const auto result = select(data, grid, 9, {});
    const auto path = std::filesystem::temp_directory_path() / "lsldg_cv.csv";
    result.report.write_csv(path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * (5 + 1));  // header + 2 triples x (5 folds + mean)
}

TEST_CASE("selected 1-d model tracks the true standard normal gradient") {
    const auto data = standard_normal(1, 10000, 82);
    Grid grid;
    grid.sigmas = {0.1, std::pow(10, -0.25), std::pow(10, 0.5),
                   std::pow(10, 1.25), 100.0};
    grid.lambdas = {0.01, std::pow(10, -1.25), std::pow(10, -0.5),
                    std::pow(10, 0.25), 10.0};
    grid.gammas = {0.0};
    const auto result = select(data, grid, 83, {});
    double total = 0.0;
    int count = 0;
    Vector x(1);
    for (double t = -2.0; t <= 2.0 + 1e-9; t += 0.1) {
        x << t;
        total += std::abs(result.model.evaluate(x)(0) - (-t));
        ++count;
    }
    CHECK(total / count < 0.15);
}

TEST_CASE("cv_score and test_score are the same formula") {
    const auto train = standard_normal(2, 120, 84);
    const auto holdout = standard_normal(2, 60, 85);
    const auto centers = select_centers(train, 20, 5);
    auto hp = HyperParams::uniform(2, 0.9, 0.02, 0.3);
    const double via_cv = cv_score(train, holdout, centers, hp, Solver::analytic);

    const auto basis = centers.with_bandwidth(hp.sigma);
    const auto stats = compute_stats(train, basis);
    const GradientModel model(basis, solve_mt_analytic(stats, hp));
    CHECK(via_cv == doctest::Approx(test_score(model, holdout)).epsilon(1e-12));
}
