#include "lsldg/kde.hpp"

#include <algorithm>
#include <cmath>

#include "lsldg/kernels.hpp"

namespace lsldg {

void KdeModel::validate() const {
    require(points.rows() >= 1, "density estimate needs at least one point");
    require(sigma > 0.0, "bandwidth must be positive");
    require(points.allFinite(), "training points contain NaN or Inf");
}

namespace {

void check_query(const KdeModel& model, const Vector& x) {
    model.validate();
    require(x.size() == model.dim(),
            "query dimensionality does not match density estimate");
}

// log( (1/n) sum_i exp(scale * sq_i) ) computed with a max shift
double log_mean_exp(const Vector& sq, double scale, Vector& scratch) {
    const double peak = scale * kernels::min(sq.data(), sq.size());
    kernels::exp_affine(sq.data(), sq.size(), scale, -peak, scratch.data());
    const double total = kernels::sum(scratch.data(), sq.size());
    return peak + std::log(total / static_cast<double>(sq.size()));
}

}  // namespace

double kde_log_density(const KdeModel& model, const Vector& x) {
    check_query(model, x);
    const int n = model.count();
    Vector sq(n), e(n);
    kernels::squared_distances(model.points.data(), n, model.dim(), x.data(),
                               sq.data());
    const double scale = -0.5 / (model.sigma * model.sigma);
    const double norm = -0.5 * model.dim() *
                        std::log(2.0 * M_PI * model.sigma * model.sigma);
    return norm + log_mean_exp(sq, scale, e);
}

double kde_density(const KdeModel& model, const Vector& x) {
    return std::exp(kde_log_density(model, x));
}

Vector kde_weights(const KdeModel& model, const Vector& x) {
    check_query(model, x);
    const int n = model.count();
    Vector sq(n), w(n);
    kernels::squared_distances(model.points.data(), n, model.dim(), x.data(),
                               sq.data());
    const double scale = -0.5 / (model.sigma * model.sigma);
    const double peak = scale * kernels::min(sq.data(), n);
    kernels::exp_affine(sq.data(), n, scale, -peak, w.data());
    w /= kernels::sum(w.data(), n);
    return w;
}

Vector kde_log_gradient(const KdeModel& model, const Vector& x) {
    const Vector w = kde_weights(model, x);
    Vector mean(model.dim());
    kernels::weighted_mean(model.points.data(), model.count(), model.dim(),
                           w.data(), mean.data());
    return (mean - x) / (model.sigma * model.sigma);
}

BandwidthSelection kde_select_bandwidth(const Dataset& data,
                                        const std::vector<double>& candidates,
                                        int folds, std::uint64_t seed) {
    data.validate();
    require(!candidates.empty(), "bandwidth candidate list is empty");
    for (double s : candidates)
        require(s > 0.0, "bandwidth candidates must be positive");

    BandwidthSelection sel;
    sel.candidates = candidates;
    std::sort(sel.candidates.begin(), sel.candidates.end());
    sel.mean_log_likelihood.assign(sel.candidates.size(), 0.0);

    const auto part = make_folds(data.count(), folds, seed);
    std::vector<Matrix> train(folds), hold(folds);
    for (int k = 0; k < folds; ++k) {
        const auto tr = part.complement(k);
        const auto ho = part.members(k);
        train[k].resize(static_cast<int>(tr.size()), data.dim());
        hold[k].resize(static_cast<int>(ho.size()), data.dim());
        for (std::size_t i = 0; i < tr.size(); ++i)
            train[k].row(static_cast<int>(i)) = data.samples.row(tr[i]);
        for (std::size_t i = 0; i < ho.size(); ++i)
            hold[k].row(static_cast<int>(i)) = data.samples.row(ho[i]);
    }

    bool any_finite = false;
    for (std::size_t c = 0; c < sel.candidates.size(); ++c) {
        double total = 0.0;
        int scored = 0;
        for (int k = 0; k < folds; ++k) {
            KdeModel model{train[k], sel.candidates[c]};
            Vector x(data.dim());
            for (int i = 0; i < hold[k].rows(); ++i) {
                x = hold[k].row(i);
                total += kde_log_density(model, x);
                ++scored;
            }
        }
        sel.mean_log_likelihood[c] = total / scored;
        if (std::isfinite(sel.mean_log_likelihood[c])) any_finite = true;
    }
    require(any_finite, "every bandwidth candidate gave a degenerate density");

    std::size_t best = 0;
    for (std::size_t c = 1; c < sel.candidates.size(); ++c)
        if (sel.mean_log_likelihood[c] > sel.mean_log_likelihood[best]) best = c;
    sel.sigma = sel.candidates[best];
    return sel;
}

}  // namespace lsldg
