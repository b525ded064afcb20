#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lsldg/metrics.hpp"
#include "lsldg/rng.hpp"
#include "svg.hpp"

namespace lsldg::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string gamma_label(double g) {
    if (g == kInf) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", g);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

struct MeanSe {
    double mean = kNaN;
    double se = kNaN;
    int count = 0;
};

MeanSe mean_and_stderr(const std::vector<double>& xs) {
    MeanSe out;
    out.count = static_cast<int>(xs.size());
    if (xs.empty()) return out;
    double total = 0.0;
    for (double x : xs) total += x;
    out.mean = total / xs.size();
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(double(xs.size()));
    } else {
        out.se = 0.0;
    }
    return out;
}

Grid grid_for_method(const Grid& grid, const std::string& method) {
    Grid out = grid;
    if (method == "single") out.gammas = {0.0};
    if (method == "common") out.gammas = {kInf};
    return out;
}

}  // namespace

Grid default_gradient_grid() {
    Grid grid;
    grid.sigmas = {0.1, std::pow(10.0, -0.25), std::pow(10.0, 0.5),
                   std::pow(10.0, 1.25), 100.0};
    grid.lambdas = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    grid.gammas = {0.0, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, kInf};
    return grid;
}

Grid default_cluster_grid() {
    Grid grid;
    for (int k = 0; k <= 9; ++k)
        grid.sigmas.push_back(std::pow(10.0, -1.0 + 2.0 * k / 9.0));
    grid.lambdas = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    grid.gammas = {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, kInf};
    return grid;
}

std::vector<double> default_cluster_bandwidths() {
    return default_cluster_grid().sigmas;
}

namespace {

struct RunRow {
    int rep;
    std::string kind;    // "cv" or "curve"
    std::string method;  // mt / single / common (cv) or mt (curve)
    double gamma;        // chosen gamma (cv) or fixed gamma (curve)
    double score;
    std::string status;  // ok / failed
};

void write_runs_csv(const std::filesystem::path& path,
                    const std::vector<RunRow>& rows) {
    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    out << "rep,kind,method,gamma,score,status\n";
    for (const auto& r : rows)
        out << r.rep << ',' << r.kind << ',' << r.method << ',' << fmt(r.gamma)
            << ',' << fmt(r.score) << ',' << r.status << '\n';
    require(out.good(), "write failed: " + path.string());
}

std::vector<RunRow> read_runs_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open file: " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        require(f.size() == 6, "malformed runs row: " + line);
        RunRow r;
        r.rep = std::stoi(f[0]);
        r.kind = f[1];
        r.method = f[2];
        r.gamma = std::strtod(f[3].c_str(), nullptr);
        r.score = std::strtod(f[4].c_str(), nullptr);
        r.status = f[5];
        rows.push_back(std::move(r));
    }
    return rows;
}

GradientSummary summarize_gradient(const std::filesystem::path& out_dir,
                                   const std::vector<std::string>& methods,
                                   const std::vector<double>& curve_gammas,
                                   int reps) {
    const auto rows = read_runs_csv(out_dir / "runs.csv");
    GradientSummary summary;

    std::ofstream sum(out_dir / "summary.csv");
    require(sum.good(), "cannot write summary.csv");
    sum << "method,mean_score,std_error,completed,incomplete\n";
    for (const auto& method : methods) {
        std::vector<double> scores;
        for (const auto& r : rows)
            if (r.kind == "cv" && r.method == method && r.status == "ok")
                scores.push_back(r.score);
        const auto ms = mean_and_stderr(scores);
        GradientSummary::MethodRow mr;
        mr.method = method;
        mr.mean = ms.mean;
        mr.std_error = ms.se;
        mr.completed = ms.count;
        mr.incomplete = ms.count < reps;
        summary.methods.push_back(mr);
        sum << method << ',' << fmt(ms.mean) << ',' << fmt(ms.se) << ','
            << ms.count << ',' << (mr.incomplete ? 1 : 0) << '\n';
    }
    require(sum.good(), "write failed: summary.csv");

    if (curve_gammas.empty()) return summary;

    // per-rep scores of the gamma curve; relative to the gamma = 0 entry
    std::map<int, std::map<double, double>> by_rep;
    for (const auto& r : rows)
        if (r.kind == "curve" && r.status == "ok") by_rep[r.rep][r.gamma] = r.score;

    std::ofstream rel(out_dir / "relative.csv");
    require(rel.good(), "cannot write relative.csv");
    rel << "gamma,mean_relative,std_error,completed\n";
    std::vector<std::string> ticks;
    std::vector<double> means, errors;
    for (double gamma : curve_gammas) {
        std::vector<double> deltas;
        for (const auto& [rep, scores] : by_rep) {
            const auto base = scores.find(0.0);
            const auto cur = scores.find(gamma);
            if (base != scores.end() && cur != scores.end())
                deltas.push_back(cur->second - base->second);
        }
        const auto ms = mean_and_stderr(deltas);
        GradientSummary::CurveRow cr;
        cr.gamma = gamma;
        cr.mean_relative = ms.mean;
        cr.std_error = ms.se;
        cr.completed = ms.count;
        summary.curve.push_back(cr);
        rel << fmt(gamma) << ',' << fmt(ms.mean) << ',' << fmt(ms.se) << ','
            << ms.count << '\n';
        ticks.push_back(gamma_label(gamma));
        means.push_back(ms.mean);
        errors.push_back(2.0 * ms.se);  // two standard errors, as plotted
    }
    require(rel.good(), "write failed: relative.csv");
    write_curve_svg(out_dir / "relative.svg", "relative score vs coupling",
                    "gamma", "score - score(gamma=0)", ticks, means, errors);
    return summary;
}

}  // namespace

GradientSummary run_gradient_experiment(const GradientExperimentConfig& config,
                                        std::ostream& log) {
    if (config.reps < 2)
        throw config_error("experiments need at least 2 repetitions for "
                           "standard errors");
    if (config.methods.empty()) throw config_error("no methods requested");
    for (const auto& m : config.methods)
        if (m != "mt" && m != "single" && m != "common")
            throw config_error("unknown gradient method '" + m +
                               "'; valid: mt, single, common");
    config.grid.validate();
    std::filesystem::create_directories(config.out_dir);

    std::vector<double> curve_gammas;
    if (config.curve) {
        curve_gammas = config.grid.gammas;
        if (std::find(curve_gammas.begin(), curve_gammas.end(), 0.0) ==
            curve_gammas.end())
            curve_gammas.insert(curve_gammas.begin(), 0.0);
    }

    SelectOptions sopts;
    sopts.folds = config.folds;
    sopts.max_centers = config.max_centers;
    sopts.solver = config.solver;

    std::vector<RunRow> rows;
    for (int rep = 0; rep < config.reps; ++rep) {
        SyntheticSpec dspec;
        dspec.family = config.family;
        dspec.dim = config.dim;
        dspec.count = config.train_count;
        dspec.seed = derive_seed(config.seed, 100 + 2 * rep);
        const auto train = generate(dspec).data;
        dspec.count = config.test_count;
        dspec.seed = derive_seed(config.seed, 101 + 2 * rep);
        const auto test = generate(dspec).data;
        const std::uint64_t fit_seed = derive_seed(config.seed, 500 + rep);

        double single_cv_score = kNaN;  // reused as the curve's gamma = 0 point
        bool have_single = false;
        for (const auto& method : config.methods) {
            RunRow row{rep, "cv", method, kNaN, kNaN, "failed"};
            try {
                const auto res =
                    select(train, grid_for_method(config.grid, method), fit_seed,
                           sopts);
                row.gamma = res.chosen.gamma;
                row.score = test_score(res.model, test);
                row.status = "ok";
                if (method == "single") {
                    single_cv_score = row.score;
                    have_single = true;
                }
            } catch (const error& e) {
                log << "rep " << rep << " method " << method
                    << " failed: " << e.what() << "\n";
            }
            rows.push_back(row);
        }

        for (double gamma : curve_gammas) {
            RunRow row{rep, "curve", "mt", gamma, kNaN, "failed"};
            if (gamma == 0.0 && have_single) {
                row.score = single_cv_score;  // same fit by construction
                row.status = "ok";
            } else {
                Grid point = config.grid;
                point.gammas = {gamma};
                try {
                    const auto res = select(train, point, fit_seed, sopts);
                    row.score = test_score(res.model, test);
                    row.status = "ok";
                } catch (const error& e) {
                    log << "rep " << rep << " curve gamma " << gamma_label(gamma)
                        << " failed: " << e.what() << "\n";
                }
            }
            rows.push_back(row);
        }
        log << "rep " << rep + 1 << "/" << config.reps << " done\n";
    }

    write_runs_csv(config.out_dir / "runs.csv", rows);
    return summarize_gradient(config.out_dir, config.methods, curve_gammas,
                              config.reps);
}

namespace {

struct ClusterRow {
    int rep;
    std::string method;
    double ari;
    int clusters;
    std::string status;
};

ClusterSummary summarize_cluster(const std::filesystem::path& out_dir,
                                 const std::vector<std::string>& methods,
                                 int reps) {
    std::ifstream in(out_dir / "runs.csv");
    require(in.good(), "cannot open runs.csv");
    std::string line;
    std::getline(in, line);
    std::vector<ClusterRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        require(f.size() == 5, "malformed runs row: " + line);
        rows.push_back(ClusterRow{std::stoi(f[0]), f[1],
                                  std::strtod(f[2].c_str(), nullptr),
                                  std::stoi(f[3]), f[4]});
    }

    ClusterSummary summary;
    std::ofstream sum(out_dir / "summary.csv");
    require(sum.good(), "cannot write summary.csv");
    sum << "method,mean_ari,std_error,completed,incomplete\n";
    for (const auto& method : methods) {
        std::vector<double> aris;
        for (const auto& r : rows)
            if (r.method == method && r.status == "ok") aris.push_back(r.ari);
        const auto ms = mean_and_stderr(aris);
        ClusterSummary::MethodRow mr;
        mr.method = method;
        mr.mean_ari = ms.mean;
        mr.std_error = ms.se;
        mr.completed = ms.count;
        mr.incomplete = ms.count < reps;
        summary.methods.push_back(mr);
        sum << method << ',' << fmt(ms.mean) << ',' << fmt(ms.se) << ','
            << ms.count << ',' << (mr.incomplete ? 1 : 0) << '\n';
    }
    require(sum.good(), "write failed: summary.csv");
    return summary;
}

}  // namespace

ClusterSummary run_cluster_experiment(const ClusterExperimentConfig& config,
                                      std::ostream& log) {
    if (config.reps < 2)
        throw config_error("experiments need at least 2 repetitions for "
                           "standard errors");
    if (config.methods.empty()) throw config_error("no methods requested");
    for (const auto& m : config.methods) parse_cluster_method(m);
    config.grid.validate();
    std::filesystem::create_directories(config.out_dir);

    std::ofstream runs(config.out_dir / "runs.csv");
    require(runs.good(), "cannot write runs.csv");
    runs << "rep,method,ari,clusters,status\n";

    for (int rep = 0; rep < config.reps; ++rep) {
        SyntheticSpec dspec;
        dspec.family = config.family;
        dspec.dim = config.dim;
        dspec.count = config.count;
        dspec.seed = derive_seed(config.seed, 300 + rep);
        const auto sample = generate(dspec);

        ClusterOptions copts;
        copts.grid = config.grid;
        copts.kde_bandwidths = config.kde_bandwidths;
        copts.folds = config.folds;
        copts.max_centers = config.max_centers;
        copts.solver = config.solver;
        copts.seek = config.seek;
        copts.seed = derive_seed(config.seed, 700 + rep);

        for (const auto& method : config.methods) {
            double ari = kNaN;
            int clusters = 0;
            std::string status = "failed";
            try {
                const auto out =
                    cluster(sample.data, parse_cluster_method(method), copts);
                ari = adjusted_rand_index(out.result.labels,
                                          sample.component_labels);
                clusters = out.result.cluster_count();
                status = "ok";
            } catch (const error& e) {
                log << "rep " << rep << " method " << method
                    << " failed: " << e.what() << "\n";
            }
            runs << rep << ',' << method << ',' << fmt(ari) << ',' << clusters
                 << ',' << status << '\n';
        }
        log << "rep " << rep + 1 << "/" << config.reps << " done\n";
    }
    runs.close();
    return summarize_cluster(config.out_dir, config.methods, config.reps);
}

}  // namespace lsldg::cli
