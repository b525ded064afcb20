#include "lsldg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "lsldg/rng.hpp"

namespace lsldg {

namespace {

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
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

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

}  // namespace

void Dataset::validate() const {
    require(samples.rows() >= 1 && samples.cols() >= 1,
            "dataset must have at least one row and one column");
    require(samples.allFinite(), "dataset contains NaN or Inf entries");
    require(column_names.empty() ||
                static_cast<int>(column_names.size()) == dim(),
            "column name count does not match dimensionality");
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    require(in.good(), "cannot open file: " + path.string());

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    int data_row = 0;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        if (has_header && line_no == 1) {
            names = split_fields(line);
            continue;
        }
        ++data_row;
        auto fields = split_fields(line);
        if (width == 0) width = fields.size();
        require(fields.size() == width,
                "ragged row " + std::to_string(data_row) + " in " +
                    path.string() + ": expected " + std::to_string(width) +
                    " fields, got " + std::to_string(fields.size()));
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            require(parse_double(fields[c], v),
                    "parse error at row " + std::to_string(data_row) +
                        ", column " + std::to_string(c + 1) + " in " +
                        path.string() + ": '" + fields[c] + "'");
            require(std::isfinite(v),
                    "non-finite value at row " + std::to_string(data_row) +
                        ", column " + std::to_string(c + 1));
            row[c] = v;
        }
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), "empty file: " + path.string());

    Dataset data;
    data.samples.resize(static_cast<int>(rows.size()), static_cast<int>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < width; ++c)
            data.samples(static_cast<int>(i), static_cast<int>(c)) = rows[i][c];
    if (has_header) {
        require(names.size() == width, "header width does not match data");
        data.column_names = std::move(names);
    }
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write file: " + path.string());
    if (!data.column_names.empty()) {
        for (int c = 0; c < data.dim(); ++c)
            out << (c ? "," : "") << data.column_names[c];
        out << '\n';
    }
    for (int i = 0; i < data.count(); ++i) {
        for (int c = 0; c < data.dim(); ++c)
            out << (c ? "," : "") << format_full(data.samples(i, c));
        out << '\n';
    }
    require(out.good(), "write failed: " + path.string());
}

std::vector<int> FoldPartition::members(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> FoldPartition::complement(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(static_cast<int>(i));
    return out;
}

FoldPartition make_folds(int n, int folds, std::uint64_t seed) {
    require(folds >= 2, "need at least 2 folds");
    require(folds <= n, "more folds than samples");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, 0x666f6c64));  // "fold"
    rng.shuffle(perm);
    FoldPartition part;
    part.folds = folds;
    part.assignments.assign(n, 0);
    for (int t = 0; t < n; ++t) part.assignments[perm[t]] = t % folds;
    return part;
}

Matrix ColumnTransform::apply(const Matrix& rows) const {
    Matrix out = rows;
    for (int c = 0; c < out.cols(); ++c)
        out.col(c) = (out.col(c).array() - mean(c)) / scale(c);
    return out;
}

Matrix ColumnTransform::invert(const Matrix& rows) const {
    Matrix out = rows;
    for (int c = 0; c < out.cols(); ++c)
        out.col(c) = out.col(c).array() * scale(c) + mean(c);
    return out;
}

std::pair<Dataset, ColumnTransform> standardize(const Dataset& data) {
    data.validate();
    const int n = data.count();
    require(n >= 2, "standardize needs at least 2 samples");
    ColumnTransform tf;
    tf.mean.resize(data.dim());
    tf.scale.resize(data.dim());
    for (int c = 0; c < data.dim(); ++c) {
        const double m = data.samples.col(c).mean();
        const double ss = (data.samples.col(c).array() - m).square().sum();
        const double sd = std::sqrt(ss / (n - 1));
        require(sd > 16.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(m)),
                "zero-variance column " + std::to_string(c + 1) +
                    " cannot be standardized");
        tf.mean(c) = m;
        tf.scale(c) = sd;
    }
    Dataset out = data;
    out.samples = tf.apply(data.samples);
    return {std::move(out), std::move(tf)};
}

const char* family_name(MixtureFamily f) {
    switch (f) {
        case MixtureFamily::single_gaussian: return "single_gaussian";
        case MixtureFamily::double_gaussian: return "double_gaussian";
        case MixtureFamily::three_gaussian_mixture: return "three_gaussian_mixture";
        case MixtureFamily::custom_gaussian_mixture: return "custom_gaussian_mixture";
    }
    return "unknown";
}

MixtureFamily parse_family(const std::string& name) {
    if (name == "single_gaussian") return MixtureFamily::single_gaussian;
    if (name == "double_gaussian") return MixtureFamily::double_gaussian;
    if (name == "three_gaussian_mixture") return MixtureFamily::three_gaussian_mixture;
    if (name == "custom_gaussian_mixture") return MixtureFamily::custom_gaussian_mixture;
    throw error("unknown family '" + name +
                "'; valid families: single_gaussian, double_gaussian, "
                "three_gaussian_mixture, custom_gaussian_mixture");
}

void SyntheticSpec::validate() const {
    require(dim >= 1, "dimensionality must be >= 1");
    require(count >= 1, "sample count must be >= 1");
    if (family == MixtureFamily::three_gaussian_mixture)
        require(dim >= 2, "three_gaussian_mixture needs d >= 2 (component "
                          "means use two coordinates)");
    if (family == MixtureFamily::custom_gaussian_mixture) {
        require(!components.empty(), "custom mixture needs components");
        double total = 0.0;
        for (const auto& comp : components) {
            require(comp.weight >= 0.0, "mixing coefficients must be >= 0");
            require(comp.mean.size() == dim, "component mean has wrong size");
            require(comp.covariance.rows() == dim && comp.covariance.cols() == dim,
                    "component covariance has wrong size");
            require((comp.covariance - comp.covariance.transpose())
                            .cwiseAbs()
                            .maxCoeff() <= 1e-12,
                    "component covariance must be symmetric");
            total += comp.weight;
        }
        require(std::abs(total - 1.0) <= 1e-12,
                "mixing coefficients must sum to 1");
    }
}

namespace {

struct PreparedComponent {
    double weight;
    Vector mean;
    Matrix chol;  // lower-triangular factor of the covariance
};

std::vector<PreparedComponent> prepare_components(const SyntheticSpec& spec) {
    std::vector<PreparedComponent> comps;
    const int d = spec.dim;
    auto isotropic = [&](const Vector& mean, double var) {
        PreparedComponent c;
        c.mean = mean;
        c.chol = Matrix::Identity(d, d) * std::sqrt(var);
        return c;
    };
    switch (spec.family) {
        case MixtureFamily::single_gaussian: {
            // diag(1,...,1,5,...,5); first ceil(d/2) variances are 1
            PreparedComponent c;
            c.weight = 1.0;
            c.mean = Vector::Zero(d);
            c.chol = Matrix::Zero(d, d);
            const int ones = (d + 1) / 2;
            for (int j = 0; j < d; ++j)
                c.chol(j, j) = j < ones ? 1.0 : std::sqrt(5.0);
            comps.push_back(std::move(c));
            break;
        }
        case MixtureFamily::double_gaussian: {
            Vector m1 = Vector::Zero(d);
            Vector m2 = Vector::Zero(d);
            m2(0) = 5.0;
            auto c1 = isotropic(m1, 1.0);
            auto c2 = isotropic(m2, 1.0);
            c1.weight = 0.5;
            c2.weight = 0.5;
            comps.push_back(std::move(c1));
            comps.push_back(std::move(c2));
            break;
        }
        case MixtureFamily::three_gaussian_mixture: {
            const double var = 1.0 / std::sqrt(2.0 * M_PI);
            Vector m1 = Vector::Zero(d), m2 = Vector::Zero(d), m3 = Vector::Zero(d);
            m1(0) = 0.0;  m1(1) = 2.0;
            m2(0) = -2.0; m2(1) = -2.0;
            m3(0) = 2.0;  m3(1) = -2.0;
            auto c1 = isotropic(m1, var);
            auto c2 = isotropic(m2, var);
            auto c3 = isotropic(m3, var);
            c1.weight = 0.4;
            c2.weight = 0.3;
            c3.weight = 0.3;
            comps.push_back(std::move(c1));
            comps.push_back(std::move(c2));
            comps.push_back(std::move(c3));
            break;
        }
        case MixtureFamily::custom_gaussian_mixture: {
            for (const auto& comp : spec.components) {
                PreparedComponent c;
                c.weight = comp.weight;
                c.mean = comp.mean;
                Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(comp.covariance));
                require(llt.info() == Eigen::Success,
                        "component covariance is not positive definite");
                c.chol = llt.matrixL();
                comps.push_back(std::move(c));
            }
            break;
        }
    }
    return comps;
}

}  // namespace

GeneratedSample generate(const SyntheticSpec& spec) {
    spec.validate();
    const auto comps = prepare_components(spec);
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& c : comps) {
        acc += c.weight;
        cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;  // guard against rounding in the last bin

    Rng rng(derive_seed(spec.seed, 0x67656e));  // "gen"
    GeneratedSample out;
    out.data.samples.resize(spec.count, spec.dim);
    out.component_labels.resize(spec.count);
    Vector z(spec.dim);
    for (int i = 0; i < spec.count; ++i) {
        const double u = rng.uniform01();
        int comp = 0;
        while (u >= cumulative[comp]) ++comp;
        for (int j = 0; j < spec.dim; ++j) z(j) = rng.normal();
        out.data.samples.row(i) =
            (comps[comp].mean + comps[comp].chol * z).transpose();
        out.component_labels[i] = comp;
    }
    out.data.provenance = Dataset::Provenance{family_name(spec.family), spec.seed};
    out.data.validate();
    return out;
}

double median_pairwise_distance(const Matrix& samples) {
    const int n = static_cast<int>(samples.rows());
    require(n >= 2, "need at least 2 samples for pairwise distances");
    // evenly strided subsample keeps this deterministic and O(1)-bounded
    std::vector<int> idx;
    const int cap = 2048;
    if (n <= cap) {
        idx.resize(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
    } else {
        idx.reserve(cap);
        const double step = static_cast<double>(n) / cap;
        for (int i = 0; i < cap; ++i) idx.push_back(static_cast<int>(i * step));
    }
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            dists.push_back((samples.row(idx[a]) - samples.row(idx[b])).norm());
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    return dists[dists.size() / 2];
}

}  // namespace lsldg
