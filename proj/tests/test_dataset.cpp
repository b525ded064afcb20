#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "lsldg/dataset.hpp"
#include "lsldg/rng.hpp"
#include "support.hpp"

using namespace lsldg;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

void write_file(const fs::path& p, const char* text) {
    std::ofstream out(p);
    out << text;
}

/// Analytic mixture moments: mean = sum w_i mu_i,
/// cov = sum w_i (S_i + mu_i mu_i') - mean mean'.
void mixture_moments(const std::vector<double>& w, const std::vector<Vector>& mu,
                     const std::vector<Eigen::MatrixXd>& cov, Vector& mean,
                     Eigen::MatrixXd& covariance) {
    const int d = static_cast<int>(mu[0].size());
    mean = Vector::Zero(d);
    for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * mu[i];
    covariance = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < w.size(); ++i)
        covariance += w[i] * (cov[i] + mu[i] * mu[i].transpose());
    covariance -= mean * mean.transpose();
}

void check_moments(const Matrix& samples, const Vector& mean,
                   const Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(samples.rows());
    const int d = static_cast<int>(samples.cols());
    Vector m = samples.colwise().mean().transpose();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        const Vector r = samples.row(i).transpose() - m;
        c += r * r.transpose();
    }
    c /= n - 1;
    for (int j = 0; j < d; ++j) {
        const double tol = std::abs(mean(j)) > 1.0 ? 0.05 * std::abs(mean(j)) : 0.05;
        CHECK(std::abs(m(j) - mean(j)) <= tol);
    }
    for (int j = 0; j < d; ++j)
        for (int t = 0; t < d; ++t) {
            const double tol =
                std::abs(cov(j, t)) > 1.0 ? 0.05 * std::abs(cov(j, t)) : 0.05;
            CHECK(std::abs(c(j, t) - cov(j, t)) <= tol);
        }
}

}  // namespace

TEST_CASE("load_csv parses plain numeric files") {
    const auto p = temp_file("lsldg_t1.csv");
    write_file(p, "1,2\n3,4\n5,6\n");
    const auto data = load_csv(p, false);
    CHECK(data.count() == 3);
    CHECK(data.dim() == 2);
    CHECK(data.samples(2, 1) == 6.0);
    CHECK(data.column_names.empty());
}

TEST_CASE("load_csv reads a header row") {
    const auto p = temp_file("lsldg_t2.csv");
    write_file(p, "a,b\n0,0\n");
    const auto data = load_csv(p, true);
    CHECK(data.count() == 1);
    CHECK(data.dim() == 2);
    REQUIRE(data.column_names.size() == 2);
    CHECK(data.column_names[0] == "a");
    CHECK(data.column_names[1] == "b");
}

TEST_CASE("load_csv names the failing cell") {
    const auto p = temp_file("lsldg_t3.csv");
    write_file(p, "1,foo\n");
    CHECK_THROWS_WITH_AS(load_csv(p, false),
                         doctest::Contains("row 1, column 2"), error);
}

TEST_CASE("load_csv rejects ragged and empty files") {
    const auto p = temp_file("lsldg_t4.csv");
    write_file(p, "1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(p, false), doctest::Contains("ragged"), error);
    const auto q = temp_file("lsldg_t5.csv");
    write_file(q, "");
    CHECK_THROWS_AS(load_csv(q, false), error);
}

TEST_CASE("csv round-trip preserves values") {
    Rng rng(7);
    Dataset data;
    data.samples.resize(23, 4);
    for (int i = 0; i < data.samples.size(); ++i)
        data.samples.data()[i] = rng.normal() * std::pow(10.0, rng.normal() * 3);
    data.column_names = {"w", "x", "y", "z"};
    const auto p = temp_file("lsldg_t6.csv");
    save_csv(data, p);
    const auto back = load_csv(p, true);
    REQUIRE(back.count() == data.count());
    REQUIRE(back.dim() == data.dim());
    CHECK((back.samples - data.samples).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(back.column_names == data.column_names);
}

TEST_CASE("make_folds balances fold sizes") {
    auto sizes = [](const FoldPartition& p) {
        std::vector<int> s(p.folds, 0);
        for (int f : p.assignments) ++s[f];
        return s;
    };
    auto p1 = make_folds(10, 5, 1);
    for (int s : sizes(p1)) CHECK(s == 2);
    auto p2 = make_folds(11, 5, 1);
    auto s2 = sizes(p2);
    std::multiset<int> got(s2.begin(), s2.end());
    CHECK(got == std::multiset<int>({2, 2, 2, 2, 3}));
}

TEST_CASE("make_folds is deterministic and covers all indices") {
    const auto a = make_folds(37, 4, 99);
    const auto b = make_folds(37, 4, 99);
    CHECK(a.assignments == b.assignments);
    std::set<int> seen;
    for (int f = 0; f < 4; ++f)
        for (int i : a.members(f)) CHECK(seen.insert(i).second);
    CHECK(seen.size() == 37);
}

TEST_CASE("make_folds rejects more folds than samples") {
    CHECK_THROWS_AS(make_folds(3, 4, 0), error);
}

TEST_CASE("standardize centers and scales with the n-1 convention") {
    Dataset data;
    data.samples.resize(2, 1);
    data.samples << 0.0, 2.0;
    const auto [out, tf] = standardize(data);
    CHECK(tf.mean(0) == 1.0);
    CHECK(tf.scale(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(out.samples(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(out.samples(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    // round trip
    const Matrix back = tf.invert(out.samples);
    CHECK((back - data.samples).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("standardize is idempotent") {
    Rng rng(11);
    Dataset data;
    data.samples.resize(40, 3);
    for (int i = 0; i < data.samples.size(); ++i)
        data.samples.data()[i] = 3.0 * rng.normal() + 1.0;
    const auto [once, tf1] = standardize(data);
    const auto [twice, tf2] = standardize(once);
    CHECK((twice.samples - once.samples).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("standardize rejects constant columns") {
    Dataset data;
    data.samples.resize(3, 2);
    data.samples << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0;
    CHECK_THROWS_WITH_AS(standardize(data), doctest::Contains("column 2"), error);
}

TEST_CASE("single_gaussian variances follow the half-split") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::single_gaussian;
    spec.dim = 2;
    spec.count = 100000;
    spec.seed = 41;
    const auto sample = generate(spec);
    for (int j = 0; j < 2; ++j) {
        const double m = sample.data.samples.col(j).mean();
        const double var =
            (sample.data.samples.col(j).array() - m).square().sum() /
            (spec.count - 1);
        const double want = j == 0 ? 1.0 : 5.0;
        CHECK(std::abs(var - want) <= 0.05 * want);
    }
}

TEST_CASE("single_gaussian odd dimension puts the extra variance at 1") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::single_gaussian;
    spec.dim = 3;
    spec.count = 100000;
    spec.seed = 42;
    const auto sample = generate(spec);
    std::vector<double> want = {1.0, 1.0, 5.0};  // first ceil(d/2) are 1
    for (int j = 0; j < 3; ++j) {
        const double m = sample.data.samples.col(j).mean();
        const double var =
            (sample.data.samples.col(j).array() - m).square().sum() /
            (spec.count - 1);
        CHECK(std::abs(var - want[j]) <= 0.05 * want[j]);
    }
}

TEST_CASE("double_gaussian mean matches the mixture mean") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::double_gaussian;
    spec.dim = 2;
    spec.count = 100000;
    spec.seed = 43;
    const auto sample = generate(spec);
    CHECK(std::abs(sample.data.samples.col(0).mean() - 2.5) <= 0.05);
    CHECK(std::abs(sample.data.samples.col(1).mean() - 0.0) <= 0.05);
}

TEST_CASE("three_gaussian_mixture weights show up in mode shares") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::three_gaussian_mixture;
    spec.dim = 2;
    spec.count = 100000;
    spec.seed = 44;
    const auto sample = generate(spec);
    Vector m1(2), m2(2), m3(2);
    m1 << 0, 2;
    m2 << -2, -2;
    m3 << 2, -2;
    int near_first = 0;
    for (int i = 0; i < spec.count; ++i) {
        const Vector x = sample.data.samples.row(i).transpose();
        const double d1 = (x - m1).norm(), d2 = (x - m2).norm(), d3 = (x - m3).norm();
        if (d1 <= d2 && d1 <= d3) ++near_first;
    }
    CHECK(std::abs(near_first / 1e5 - 0.4) <= 0.02);
}

TEST_CASE("generator moments match the analytic mixture moments") {
    const double v3 = 1.0 / std::sqrt(2.0 * M_PI);
    struct Case {
        MixtureFamily family;
        std::vector<double> w;
        std::vector<Vector> mu;
        std::vector<Eigen::MatrixXd> cov;
    };
    std::vector<Case> cases;
    {
        Case c;
        c.family = MixtureFamily::single_gaussian;
        c.w = {1.0};
        Vector mu = Vector::Zero(3);
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
        s.diagonal() << 1, 1, 5;
        c.mu = {mu};
        c.cov = {s};
        cases.push_back(c);
    }
    {
        Case c;
        c.family = MixtureFamily::double_gaussian;
        c.w = {0.5, 0.5};
        Vector mu1 = Vector::Zero(3), mu2 = Vector::Zero(3);
        mu2(0) = 5.0;
        c.mu = {mu1, mu2};
        c.cov = {Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)};
        cases.push_back(c);
    }
    {
        Case c;
        c.family = MixtureFamily::three_gaussian_mixture;
        c.w = {0.4, 0.3, 0.3};
        Vector mu1 = Vector::Zero(3), mu2 = Vector::Zero(3), mu3 = Vector::Zero(3);
        mu1(1) = 2;
        mu2(0) = -2;
        mu2(1) = -2;
        mu3(0) = 2;
        mu3(1) = -2;
        c.mu = {mu1, mu2, mu3};
        c.cov = {v3 * Eigen::MatrixXd::Identity(3, 3),
                 v3 * Eigen::MatrixXd::Identity(3, 3),
                 v3 * Eigen::MatrixXd::Identity(3, 3)};
        cases.push_back(c);
    }
    int seed = 1000;
    for (const auto& c : cases) {
        SyntheticSpec spec;
        spec.family = c.family;
        spec.dim = 3;
        spec.count = 100000;
        spec.seed = seed++;
        const auto sample = generate(spec);
        Vector mean;
        Eigen::MatrixXd cov;
        mixture_moments(c.w, c.mu, c.cov, mean, cov);
        check_moments(sample.data.samples, mean, cov);
    }
}

TEST_CASE("custom mixtures validate their parameters") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::custom_gaussian_mixture;
    spec.dim = 2;
    spec.count = 10;
    GaussianComponent comp;
    comp.weight = 0.7;
    comp.mean = Vector::Zero(2);
    comp.covariance = Matrix::Identity(2, 2);
    spec.components = {comp};
    CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("sum to 1"), error);

    spec.components[0].weight = 1.0;
    spec.components[0].covariance << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("positive definite"),
                         error);
}

TEST_CASE("custom mixture draws respect a full covariance") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::custom_gaussian_mixture;
    spec.dim = 2;
    spec.count = 100000;
    spec.seed = 5;
    GaussianComponent comp;
    comp.weight = 1.0;
    comp.mean = Vector::Zero(2);
    comp.mean << 1.0, -1.0;
    comp.covariance.resize(2, 2);
    comp.covariance << 2.0, 0.8, 0.8, 1.0;
    spec.components = {comp};
    const auto sample = generate(spec);
    Vector mean;
    Eigen::MatrixXd cov;
    mixture_moments({1.0}, {comp.mean}, {Eigen::MatrixXd(comp.covariance)}, mean, cov);
    check_moments(sample.data.samples, mean, cov);
}

TEST_CASE("generate rejects bad specs") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::three_gaussian_mixture;
    spec.dim = 1;
    spec.count = 5;
    CHECK_THROWS_AS(generate(spec), error);
    CHECK_THROWS_WITH_AS(parse_family("triangular"),
                         doctest::Contains("valid families"), error);
}

TEST_CASE("generate is deterministic in the seed") {
    SyntheticSpec spec;
    spec.family = MixtureFamily::double_gaussian;
    spec.dim = 4;
    spec.count = 50;
    spec.seed = 77;
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK((a.data.samples - b.data.samples).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.component_labels == b.component_labels);
}

TEST_CASE("median pairwise distance of two points is their distance") {
    Matrix pts(2, 1);
    pts << 0.0, 3.0;
    CHECK(median_pairwise_distance(pts) == doctest::Approx(3.0));
}
