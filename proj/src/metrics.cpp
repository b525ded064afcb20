#include "lsldg/metrics.hpp"

#include <map>
#include <unordered_map>

#include "lsldg/kernels.hpp"

namespace lsldg {

double test_score(const GradientModel& model, const Matrix& points) {
    const int n = static_cast<int>(points.rows());
    const int d = model.dim();
    const int b = model.basis_count();
    require(n >= 1, "score needs at least one point");
    require(static_cast<int>(points.cols()) == d,
            "points dimensionality does not match model");

    const auto& ev = model.evaluator();
    Vector sq(b), row(b);
    Matrix kernel_rows(ev.group_count(), b);
    Vector sum_sq = Vector::Zero(d);
    Vector sum_slope = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
        const double* x = points.data() + static_cast<std::ptrdiff_t>(i) * d;
        ev.kernel_rows(x, sq.data(), kernel_rows);
        for (int j = 0; j < d; ++j) {
            const double* e = kernel_rows.data() +
                              static_cast<std::ptrdiff_t>(ev.group_of(j)) * b;
            const double* coeff =
                model.coeffs().data() + static_cast<std::ptrdiff_t>(j) * b;
            ev.grad_row(j, x[j], e, row.data());
            const double g = kernels::dot(coeff, row.data(), b);
            ev.curv_row(j, x[j], e, row.data());
            const double slope = kernels::dot(coeff, row.data(), b);
            sum_sq(j) += g * g;
            sum_slope(j) += slope;
        }
    }
    return (sum_sq.sum() + 2.0 * sum_slope.sum()) / static_cast<double>(n);
}

double test_score(const GradientModel& model, const Dataset& data) {
    data.validate();
    return test_score(model, data.samples);
}

namespace {

// pairwise (cascade) summation; keeps the long count sums exact-ish
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double pairs(double count) { return 0.5 * count * (count - 1.0); }

std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = remap.emplace(labels[i], static_cast<int>(remap.size())).first->second;
    return out;
}

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    require(a.size() == b.size(), "labelings have different lengths");
    require(!a.empty(), "labelings are empty");
    if (a.size() == 1) return 1.0;
    const double n = static_cast<double>(a.size());

    std::map<std::pair<int, int>, double> cells;
    std::unordered_map<int, double> row_sums, col_sums;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        row_sums[a[i]] += 1.0;
        col_sums[b[i]] += 1.0;
    }

    std::vector<double> cell_pairs, row_pairs, col_pairs;
    cell_pairs.reserve(cells.size());
    for (const auto& [key, count] : cells) cell_pairs.push_back(pairs(count));
    for (const auto& [key, count] : row_sums) row_pairs.push_back(pairs(count));
    for (const auto& [key, count] : col_sums) col_pairs.push_back(pairs(count));

    const double together = pairwise_sum(cell_pairs, 0, cell_pairs.size());
    const double in_a = pairwise_sum(row_pairs, 0, row_pairs.size());
    const double in_b = pairwise_sum(col_pairs, 0, col_pairs.size());
    const double total = pairs(n);

    // (together - E) / (M - E) with E = in_a in_b / total and
    // M = (in_a + in_b) / 2, cleared of divisions so small-count cases come
    // out exact (every term is an integer below 2^53)
    const double numer = 2.0 * total * together - 2.0 * in_a * in_b;
    const double denom = total * (in_a + in_b) - 2.0 * in_a * in_b;
    if (denom == 0.0)
        return canonical_labels(a) == canonical_labels(b) ? 1.0 : 0.0;
    return numer / denom;
}

}  // namespace lsldg
