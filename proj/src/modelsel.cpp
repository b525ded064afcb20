#include "lsldg/modelsel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lsldg/metrics.hpp"
#include "lsldg/rng.hpp"

namespace lsldg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_ascending(const std::vector<double>& v, const char* what,
                     bool allow_inf) {
    require(!v.empty(), std::string(what) + " grid is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(!std::isnan(v[i]), std::string(what) + " grid contains NaN");
        if (v[i] == kInf)
            require(allow_inf && i + 1 == v.size(),
                    std::string(what) + " grid may not contain infinity");
        if (i > 0)
            require(v[i] > v[i - 1],
                    std::string(what) + " grid must be strictly ascending");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void Grid::validate() const {
    check_ascending(sigmas, "sigma", false);
    check_ascending(lambdas, "lambda", false);
    check_ascending(gammas, "gamma", true);
    require(sigmas.front() > 0.0, "sigma candidates must be positive");
    require(lambdas.front() >= 0.0, "lambda candidates must be nonnegative");
    require(gammas.front() >= 0.0, "gamma candidates must be nonnegative");
}

Solver parse_solver(const std::string& name) {
    if (name == "analytic") return Solver::analytic;
    if (name == "bcd") return Solver::bcd;
    throw error("unknown solver '" + name + "'; use 'analytic' or 'bcd'");
}

const char* solver_name(Solver s) {
    return s == Solver::analytic ? "analytic" : "bcd";
}

void CVReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    out << "sigma,lambda,gamma,fold,score,chosen\n";
    for (std::size_t t = 0; t < entries.size(); ++t) {
        const auto& e = entries[t];
        const std::string prefix =
            fmt(e.sigma) + "," + fmt(e.lambda) + "," + fmt(e.gamma) + ",";
        for (std::size_t k = 0; k < e.fold_scores.size(); ++k)
            out << prefix << (k + 1) << "," << fmt(e.fold_scores[k]) << ",0\n";
        out << prefix << "mean," << fmt(e.mean_score) << ","
            << (t == chosen_index ? 1 : 0) << "\n";
    }
    require(out.good(), "write failed: " + path.string());
}

namespace {

/// gamma == 0 and gamma == inf have closed forms regardless of the solver
/// choice; finite positive gamma goes through the requested solver.
Matrix fit_coeffs(const SufficientStats& stats, const HyperParams& hp,
                  Solver solver, const Matrix* warm, const BcdOptions& bcd) {
    if (hp.gamma == 0.0) return solve_single(stats, hp.lambda);
    if (hp.gamma == kInf) return solve_common(stats, stats.dim() * hp.lambda);
    if (solver == Solver::analytic) return solve_mt_analytic(stats, hp);
    return solve_mt_bcd(stats, hp, warm, bcd).coeffs;
}

/// Same value as metrics::test_score, but from precomputed holdout
/// statistics: mean(g^2) = theta' G theta and mean(curvature) = theta . h.
double score_from_stats(const SufficientStats& holdout, const Matrix& coeffs) {
    double score = 0.0;
    for (int j = 0; j < holdout.dim(); ++j) {
        const Eigen::VectorXd t = coeffs.row(j).transpose();
        score += t.dot(holdout.gram[j] * t) + 2.0 * t.dot(holdout.curvature[j]);
    }
    return score;
}

Matrix gather_rows(const Matrix& samples, const std::vector<int>& rows) {
    Matrix out(static_cast<int>(rows.size()), samples.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<int>(i)) = samples.row(rows[i]);
    return out;
}

}  // namespace

double cv_score(const Dataset& train, const Dataset& holdout,
                const BasisSpec& centers, const HyperParams& hp, Solver solver,
                const BcdOptions& bcd) {
    train.validate();
    holdout.validate();
    require(train.dim() == holdout.dim(),
            "train and holdout dimensionality differ");
    const BasisSpec basis = centers.with_bandwidth(hp.sigma);
    try {
        const auto stats = compute_stats(train, basis);
        const Matrix coeffs = fit_coeffs(stats, hp, solver, nullptr, bcd);
        return test_score(GradientModel(basis, coeffs), holdout);
    } catch (const error& e) {
        std::ostringstream msg;
        msg << "cv_score failed at sigma=" << hp.sigma << " lambda=" << hp.lambda
            << " gamma=" << hp.gamma << ": " << e.what();
        throw error(msg.str());
    }
}

SelectResult select(const Dataset& data, const Grid& grid, std::uint64_t seed,
                    const SelectOptions& opts) {
    data.validate();
    grid.validate();
    require(opts.folds >= 2 && opts.folds <= data.count(),
            "fold count must be in [2, n]");
    const int d = data.dim();
    const int K = opts.folds;

    const BasisSpec centers =
        select_centers(data, opts.max_centers, derive_seed(seed, 0x73656c31));
    const FoldPartition part =
        make_folds(data.count(), K, derive_seed(seed, 0x73656c32));

    std::vector<Matrix> train_rows(K), hold_rows(K);
    for (int k = 0; k < K; ++k) {
        train_rows[k] = gather_rows(data.samples, part.complement(k));
        hold_rows[k] = gather_rows(data.samples, part.members(k));
    }

    CVReport report;
    report.folds = K;
    report.seed = seed;

    bool have_best = false;
    std::size_t best_index = 0;
    double best_mean = kInf;

    for (double sigma : grid.sigmas) {
        const BasisSpec basis = centers.with_bandwidth(sigma);
        // statistics depend on sigma only; shared across (lambda, gamma)
        std::vector<SufficientStats> train_stats(K), hold_stats(K);
        std::string sigma_failure;
        try {
            for (int k = 0; k < K; ++k) {
                train_stats[k] = compute_stats(train_rows[k], basis);
                hold_stats[k] = compute_stats(hold_rows[k], basis);
            }
        } catch (const error& e) {
            sigma_failure = e.what();
        }

        for (double lambda : grid.lambdas) {
            std::vector<Matrix> warm(K);
            std::vector<bool> have_warm(K, false);
            for (double gamma : grid.gammas) {
                CVEntry entry;
                entry.sigma = sigma;
                entry.lambda = lambda;
                entry.gamma = gamma;
                if (!sigma_failure.empty()) {
                    entry.mean_score = kNaN;
                    entry.failure = sigma_failure;
                    report.entries.push_back(std::move(entry));
                    continue;
                }
                HyperParams hp = HyperParams::uniform(d, sigma, lambda, gamma);
                try {
                    double total = 0.0;
                    for (int k = 0; k < K; ++k) {
                        const Matrix* init =
                            (opts.solver == Solver::bcd && have_warm[k])
                                ? &warm[k]
                                : nullptr;
                        Matrix coeffs =
                            fit_coeffs(train_stats[k], hp, opts.solver, init, opts.bcd);
                        entry.fold_scores.push_back(
                            score_from_stats(hold_stats[k], coeffs));
                        total += entry.fold_scores.back();
                        if (opts.solver == Solver::bcd && gamma != kInf) {
                            warm[k] = std::move(coeffs);
                            have_warm[k] = true;
                        }
                    }
                    entry.mean_score = total / K;
                } catch (const error& e) {
                    std::ostringstream msg;
                    msg << "sigma=" << sigma << " lambda=" << lambda
                        << " gamma=" << gamma << ": " << e.what();
                    entry.fold_scores.clear();
                    entry.mean_score = kNaN;
                    entry.failure = msg.str();
                }
                if (!std::isnan(entry.mean_score) && entry.mean_score < best_mean) {
                    best_mean = entry.mean_score;
                    best_index = report.entries.size();
                    have_best = true;
                }
                report.entries.push_back(std::move(entry));
            }
        }
    }

    if (!have_best) {
        std::ostringstream msg;
        msg << "every grid triple failed:";
        int listed = 0;
        for (const auto& e : report.entries) {
            if (e.failure.empty()) continue;
            if (listed == 5) {
                msg << "\n  ...";
                break;
            }
            msg << "\n  " << e.failure;
            ++listed;
        }
        throw error(msg.str());
    }
    report.chosen_index = best_index;

    const CVEntry& best = report.chosen();
    HyperParams hp = HyperParams::uniform(d, best.sigma, best.lambda, best.gamma);
    const BasisSpec basis = centers.with_bandwidth(best.sigma);
    const auto full_stats = compute_stats(data, basis);
    Matrix coeffs = fit_coeffs(full_stats, hp, opts.solver, nullptr, opts.bcd);
    return SelectResult{std::move(report),
                        GradientModel(basis, std::move(coeffs)), hp};
}

}  // namespace lsldg
