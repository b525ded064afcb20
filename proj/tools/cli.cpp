#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "experiment.hpp"
#include "lsldg/clustering.hpp"
#include "lsldg/kernels.hpp"
#include "lsldg/metrics.hpp"
#include "lsldg/modelsel.hpp"

namespace lsldg::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok == "inf" || tok == "Inf" || tok == "INF") {
            out.push_back(kInf);
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw config_error(std::string("bad number in ") + what + " list: '" +
                               tok + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw config_error(std::string(what) + " list is empty");
    return out;
}

std::string join_default(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += (v[i] == kInf) ? "inf" : fmt(v[i]);
    }
    return out;
}

Dataset load_data_checked(const std::string& path, bool has_header,
                          bool do_standardize) {
    Dataset data;
    try {
        data = load_csv(path, has_header);
    } catch (const error& e) {
        throw config_error(e.what());
    }
    if (do_standardize) {
        auto [out, tf] = standardize(data);
        return out;
    }
    return data;
}

std::vector<int> load_labels(const std::string& path) {
    Dataset raw;
    try {
        raw = load_csv(path, false);
    } catch (const error& e) {
        throw config_error(e.what());
    }
    if (raw.dim() != 1)
        throw config_error("labels file must have exactly one column");
    std::vector<int> labels(raw.count());
    for (int i = 0; i < raw.count(); ++i)
        labels[i] = static_cast<int>(std::lround(raw.samples(i, 0)));
    return labels;
}

Grid build_grid(const std::string& sigmas, const std::string& lambdas,
                const std::string& gammas) {
    Grid grid;
    grid.sigmas = parse_list(sigmas, "sigma");
    grid.lambdas = parse_list(lambdas, "lambda");
    grid.gammas = parse_list(gammas, "gamma");
    try {
        grid.validate();
    } catch (const error& e) {
        throw config_error(e.what());
    }
    return grid;
}

struct GenerateArgs {
    std::string family = "single_gaussian";
    int dim = 2;
    int count = 100;
    std::uint64_t seed = 1;
    std::string out;
    std::string labels_out;
    std::string components;
    bool header = false;
};

SyntheticSpec spec_from_args(const GenerateArgs& a) {
    SyntheticSpec spec;
    try {
        spec.family = parse_family(a.family);
    } catch (const error& e) {
        throw config_error(e.what());
    }
    spec.dim = a.dim;
    spec.count = a.count;
    spec.seed = a.seed;
    if (spec.family == MixtureFamily::custom_gaussian_mixture) {
        if (a.components.empty())
            throw config_error("custom_gaussian_mixture needs --components");
        std::ifstream in(a.components);
        if (!in.good())
            throw config_error("cannot open components file: " + a.components);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const std::exception& e) {
            throw config_error(std::string("bad components JSON: ") + e.what());
        }
        for (const auto& item : doc) {
            GaussianComponent comp;
            comp.weight = item.at("weight").get<double>();
            const auto mean = item.at("mean").get<std::vector<double>>();
            comp.mean.resize(static_cast<int>(mean.size()));
            for (std::size_t j = 0; j < mean.size(); ++j) comp.mean(j) = mean[j];
            const auto cov =
                item.at("cov").get<std::vector<std::vector<double>>>();
            comp.covariance.resize(static_cast<int>(cov.size()),
                                   static_cast<int>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r) {
                if (cov[r].size() != cov.size())
                    throw config_error("components cov must be square");
                for (std::size_t c = 0; c < cov.size(); ++c)
                    comp.covariance(static_cast<int>(r), static_cast<int>(c)) =
                        cov[r][c];
            }
            spec.components.push_back(std::move(comp));
        }
    }
    try {
        spec.validate();
    } catch (const error& e) {
        throw config_error(e.what());
    }
    return spec;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const auto spec = spec_from_args(a);
    auto sample = generate(spec);
    if (a.header) {
        sample.data.column_names.resize(spec.dim);
        for (int j = 0; j < spec.dim; ++j)
            sample.data.column_names[j] = "x" + std::to_string(j + 1);
    }
    save_csv(sample.data, a.out);

    nlohmann::json meta;
    meta["format"] = "lsldg-dataset";
    meta["family"] = a.family;
    meta["dim"] = spec.dim;
    meta["count"] = spec.count;
    meta["seed"] = spec.seed;
    meta["header"] = a.header;
    std::ofstream side(a.out + ".meta.json");
    require(side.good(), "cannot write sidecar");
    side << meta.dump(2) << "\n";

    if (!a.labels_out.empty()) {
        std::ofstream lab(a.labels_out);
        require(lab.good(), "cannot write labels file");
        for (int v : sample.component_labels) lab << v << "\n";
    }
    out << "wrote " << spec.count << "x" << spec.dim << " samples to " << a.out
        << "\n";
    return 0;
}

struct FitArgs {
    std::string data;
    bool has_header = false;
    bool standardize_data = false;
    std::string method = "mt";
    std::string sigmas, lambdas, gammas;
    int folds = 5;
    int centers = 50;
    std::string solver = "analytic";
    std::uint64_t seed = 1;
    std::string model_out;
    std::string cv_out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    if (a.method != "mt" && a.method != "single" && a.method != "common")
        throw config_error("unknown method '" + a.method +
                           "'; valid: mt, single, common");
    const auto data = load_data_checked(a.data, a.has_header, a.standardize_data);
    Grid grid = build_grid(a.sigmas, a.lambdas, a.gammas);
    if (a.method == "single") grid.gammas = {0.0};
    if (a.method == "common") grid.gammas = {kInf};

    SelectOptions opts;
    opts.folds = a.folds;
    opts.max_centers = a.centers;
    try {
        opts.solver = parse_solver(a.solver);
    } catch (const error& e) {
        throw config_error(e.what());
    }

    const auto result = select(data, grid, a.seed, opts);
    save_model(result.model, result.chosen, a.model_out);
    if (!a.cv_out.empty()) result.report.write_csv(a.cv_out);
    const auto& c = result.report.chosen();
    out << "chosen sigma=" << fmt(c.sigma) << " lambda=" << fmt(c.lambda)
        << " gamma=" << (c.gamma == kInf ? "inf" : fmt(c.gamma))
        << " cv_score=" << fmt(c.mean_score) << "\n";
    out << "model written to " << a.model_out << "\n";
    return 0;
}

struct ScoreArgs {
    std::string model;
    std::string data;
    bool has_header = false;
    std::string out_path;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
    LoadedModel loaded = [&] {
        try {
            return load_model(a.model);
        } catch (const error& e) {
            throw config_error(e.what());
        }
    }();
    const auto data = load_data_checked(a.data, a.has_header, false);
    if (data.dim() != loaded.model.dim())
        throw config_error("model dimensionality (" +
                           std::to_string(loaded.model.dim()) +
                           ") does not match data (" +
                           std::to_string(data.dim()) + ")");
    const double score = test_score(loaded.model, data);
    out << fmt(score) << "\n";
    if (!a.out_path.empty()) {
        std::ofstream csv(a.out_path);
        require(csv.good(), "cannot write file: " + a.out_path);
        csv << "model,data,count,score\n";
        csv << a.model << ',' << a.data << ',' << data.count() << ','
            << fmt(score) << '\n';
    }
    return 0;
}

struct ClusterArgs {
    std::string data;
    bool has_header = false;
    std::string method = "mtlsldgc";
    std::string sigmas, lambdas, gammas, kde_bandwidths;
    int folds = 5;
    int centers = 50;
    std::string solver = "analytic";
    std::uint64_t seed = 1;
    int max_iters = 1000;
    double step_tol = 1e-6;
    double merge_radius = 0.0;
    std::string truth;
    std::string assign_out;
    std::string modes_out;
    std::string ari_out;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
    const auto data = load_data_checked(a.data, a.has_header, false);
    ClusterMethod method;
    try {
        method = parse_cluster_method(a.method);
    } catch (const error& e) {
        throw config_error(e.what());
    }

    std::vector<int> truth;
    if (!a.truth.empty()) {
        truth = load_labels(a.truth);
        if (static_cast<int>(truth.size()) != data.count())
            throw config_error("labels file has " +
                               std::to_string(truth.size()) + " rows, data has " +
                               std::to_string(data.count()));
    }

    ClusterOptions opts;
    if (method == ClusterMethod::meanshift) {
        opts.kde_bandwidths = parse_list(a.kde_bandwidths, "kde bandwidth");
    } else {
        opts.grid = build_grid(a.sigmas, a.lambdas, a.gammas);
    }
    opts.folds = a.folds;
    opts.max_centers = a.centers;
    try {
        opts.solver = parse_solver(a.solver);
    } catch (const error& e) {
        throw config_error(e.what());
    }
    opts.seed = a.seed;
    opts.seek.max_iters = a.max_iters;
    opts.seek.step_tol = a.step_tol;
    opts.seek.merge_radius = a.merge_radius;

    const auto result = cluster(data, method, opts);
    if (!a.assign_out.empty()) write_assignments_csv(result.result, a.assign_out);
    if (!a.modes_out.empty()) write_modes_csv(result.result, a.modes_out);
    out << "clusters=" << result.result.cluster_count()
        << " unconverged=" << result.result.unconverged.size() << "\n";

    if (!truth.empty()) {
        const double ari = adjusted_rand_index(result.result.labels, truth);
        out << "ari=" << fmt(ari) << "\n";
        if (!a.ari_out.empty()) {
            std::ofstream csv(a.ari_out);
            require(csv.good(), "cannot write file: " + a.ari_out);
            csv << "method,ari,clusters\n";
            csv << a.method << ',' << fmt(ari) << ','
                << result.result.cluster_count() << '\n';
        }
    }
    return 0;
}

struct ExperimentArgs {
    std::string task = "gradient";
    std::string family = "single_gaussian";
    int dim = 10;
    int count = 30;
    int test_count = 1000;
    int reps = 20;
    std::uint64_t seed = 1;
    std::string methods;
    std::string sigmas, lambdas, gammas, kde_bandwidths;
    int folds = 5;
    int centers = 50;
    std::string solver = "analytic";
    bool no_curve = false;
    std::string out_dir;
};

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
    Solver solver;
    try {
        solver = parse_solver(a.solver);
    } catch (const error& e) {
        throw config_error(e.what());
    }
    MixtureFamily family;
    try {
        family = parse_family(a.family);
    } catch (const error& e) {
        throw config_error(e.what());
    }

    if (a.task == "gradient") {
        GradientExperimentConfig config;
        config.family = family;
        config.dim = a.dim;
        config.train_count = a.count;
        config.test_count = a.test_count;
        config.reps = a.reps;
        config.seed = a.seed;
        if (!a.methods.empty()) config.methods = split_names(a.methods);
        config.grid = build_grid(a.sigmas, a.lambdas, a.gammas);
        config.curve = !a.no_curve;
        config.solver = solver;
        config.folds = a.folds;
        config.max_centers = a.centers;
        config.out_dir = a.out_dir;
        const auto summary = run_gradient_experiment(config, out);
        out << "method,mean_score,std_error,completed\n";
        for (const auto& m : summary.methods)
            out << m.method << ',' << fmt(m.mean) << ',' << fmt(m.std_error)
                << ',' << m.completed << "\n";
        return 0;
    }
    if (a.task == "cluster") {
        ClusterExperimentConfig config;
        config.family = family == MixtureFamily::single_gaussian
                            ? MixtureFamily::three_gaussian_mixture
                            : family;
        config.dim = a.dim;
        config.count = a.count;
        config.reps = a.reps;
        config.seed = a.seed;
        if (!a.methods.empty()) config.methods = split_names(a.methods);
        config.grid = build_grid(a.sigmas, a.lambdas, a.gammas);
        config.kde_bandwidths = parse_list(a.kde_bandwidths, "kde bandwidth");
        config.solver = solver;
        config.folds = a.folds;
        config.max_centers = a.centers;
        config.out_dir = a.out_dir;
        const auto summary = run_cluster_experiment(config, out);
        out << "method,mean_ari,std_error,completed\n";
        for (const auto& m : summary.methods)
            out << m.method << ',' << fmt(m.mean_ari) << ',' << fmt(m.std_error)
                << ',' << m.completed << "\n";
        return 0;
    }
    throw config_error("unknown task '" + a.task + "'; valid: gradient, cluster");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"direct log-density gradient estimation, multi-task coupling "
                 "and mode-seeking clustering"};
    app.set_config("--config", "", "read options from an INI/TOML file");
    app.require_subcommand(1);

    const auto grad_grid = default_gradient_grid();
    const auto clus_grid = default_cluster_grid();

    GenerateArgs gen;
    auto* cgen = app.add_subcommand("generate", "draw a synthetic dataset");
    cgen->add_option("--family", gen.family,
                     "single_gaussian | double_gaussian | "
                     "three_gaussian_mixture | custom_gaussian_mixture");
    cgen->add_option("--dim", gen.dim, "dimensionality");
    cgen->add_option("--count", gen.count, "sample count");
    cgen->add_option("--seed", gen.seed, "generator seed");
    cgen->add_option("--out", gen.out, "output CSV path")->required();
    cgen->add_option("--labels-out", gen.labels_out,
                     "write mixture component labels here");
    cgen->add_option("--components", gen.components,
                     "JSON component list for custom_gaussian_mixture");
    cgen->add_flag("--header", gen.header, "write a header row");

    FitArgs fit;
    auto* cfit = app.add_subcommand("fit", "cross-validate and fit a model");
    cfit->add_option("--data", fit.data, "training CSV")->required();
    cfit->add_flag("--has-header", fit.has_header, "CSV has a header row");
    cfit->add_flag("--standardize", fit.standardize_data,
                   "standardize columns before fitting");
    cfit->add_option("--method", fit.method, "mt | single | common");
    cfit->add_option("--sigmas", fit.sigmas, "bandwidth candidates")
        ->default_val(join_default(grad_grid.sigmas));
    cfit->add_option("--lambdas", fit.lambdas, "ridge candidates")
        ->default_val(join_default(grad_grid.lambdas));
    cfit->add_option("--gammas", fit.gammas, "coupling candidates (inf allowed)")
        ->default_val(join_default(grad_grid.gammas));
    cfit->add_option("--folds", fit.folds, "cross-validation folds");
    cfit->add_option("--centers", fit.centers, "max kernel centers");
    cfit->add_option("--solver", fit.solver, "analytic | bcd");
    cfit->add_option("--seed", fit.seed, "seed for centers and folds");
    cfit->add_option("--model-out", fit.model_out, "model file")->required();
    cfit->add_option("--cv-out", fit.cv_out, "cross-validation table CSV");

    ScoreArgs score;
    auto* cscore = app.add_subcommand("score", "held-out score of a model");
    cscore->add_option("--model", score.model, "model file")->required();
    cscore->add_option("--data", score.data, "test CSV")->required();
    cscore->add_flag("--has-header", score.has_header, "CSV has a header row");
    cscore->add_option("--out", score.out_path, "write a one-row CSV here");

    ClusterArgs clus;
    auto* cclus = app.add_subcommand("cluster", "mode-seeking clustering");
    cclus->add_option("--data", clus.data, "input CSV")->required();
    cclus->add_flag("--has-header", clus.has_header, "CSV has a header row");
    cclus->add_option("--method", clus.method,
                      "mtlsldgc | slsldgc | clsldgc | meanshift");
    cclus->add_option("--sigmas", clus.sigmas, "bandwidth candidates")
        ->default_val(join_default(clus_grid.sigmas));
    cclus->add_option("--lambdas", clus.lambdas, "ridge candidates")
        ->default_val(join_default(clus_grid.lambdas));
    cclus->add_option("--gammas", clus.gammas, "coupling candidates")
        ->default_val(join_default(clus_grid.gammas));
    cclus->add_option("--kde-bandwidths", clus.kde_bandwidths,
                      "mean-shift bandwidth candidates")
        ->default_val(join_default(default_cluster_bandwidths()));
    cclus->add_option("--folds", clus.folds, "cross-validation folds");
    cclus->add_option("--centers", clus.centers, "max kernel centers");
    cclus->add_option("--solver", clus.solver, "analytic | bcd");
    cclus->add_option("--seed", clus.seed, "seed");
    cclus->add_option("--max-iters", clus.max_iters, "mode-seeking cap");
    cclus->add_option("--step-tol", clus.step_tol, "per-point stopping step");
    cclus->add_option("--merge-radius", clus.merge_radius,
                      "mode merge radius (0 = data-scaled default)");
    cclus->add_option("--truth", clus.truth, "ground-truth labels CSV");
    cclus->add_option("--assign-out", clus.assign_out, "assignments CSV");
    cclus->add_option("--modes-out", clus.modes_out, "modes CSV");
    cclus->add_option("--ari-out", clus.ari_out, "ARI CSV");

    ExperimentArgs exp;
    auto* cexp = app.add_subcommand(
        "experiment", "repeated synthetic-data runs with summary tables");
    cexp->add_option("--task", exp.task, "gradient | cluster");
    cexp->add_option("--family", exp.family, "synthetic family");
    cexp->add_option("--dim", exp.dim, "dimensionality");
    cexp->add_option("--count", exp.count, "training sample count");
    cexp->add_option("--test-count", exp.test_count, "test sample count");
    cexp->add_option("--reps", exp.reps, "repetitions (>= 2)");
    cexp->add_option("--seed", exp.seed, "base seed");
    cexp->add_option("--methods", exp.methods, "comma-separated method list");
    cexp->add_option("--sigmas", exp.sigmas, "bandwidth candidates");
    cexp->add_option("--lambdas", exp.lambdas, "ridge candidates");
    cexp->add_option("--gammas", exp.gammas, "coupling candidates");
    cexp->add_option("--kde-bandwidths", exp.kde_bandwidths,
                     "mean-shift bandwidth candidates")
        ->default_val(join_default(default_cluster_bandwidths()));
    cexp->add_option("--folds", exp.folds, "cross-validation folds");
    cexp->add_option("--centers", exp.centers, "max kernel centers");
    cexp->add_option("--solver", exp.solver, "analytic | bcd");
    cexp->add_flag("--no-curve", exp.no_curve, "skip the per-gamma curve");
    cexp->add_option("--out-dir", exp.out_dir, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cgen->parsed()) return cmd_generate(gen, out);
        if (cfit->parsed()) return cmd_fit(fit, out);
        if (cscore->parsed()) return cmd_score(score, out);
        if (cclus->parsed()) return cmd_cluster(clus, out);
        if (cexp->parsed()) return cmd_experiment(exp, out);
    } catch (const config_error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "no subcommand given\n";
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace lsldg::cli
