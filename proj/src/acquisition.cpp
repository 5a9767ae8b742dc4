#include "mixbo/acquisition.hpp"

#include <algorithm>
#include <cmath>

namespace mixbo {

namespace {
constexpr double kMatchTol = 1e-9;
constexpr double kSigmaFloor = 1e-12;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
}  // namespace

double expected_improvement(double mu, double sigma, double f_best) {
    if (sigma <= kSigmaFloor) return std::max(f_best - mu, 0.0);
    const double u = (f_best - mu) / sigma;
    return (f_best - mu) * norm_cdf(u) + sigma * norm_pdf(u);
}

double lower_confidence_bound(double mu, double sigma, double w) { return mu - w * sigma; }

bool matches_sampled(const NormalizedPoint& candidate, const SearchSpace& space,
                     const std::vector<NormalizedPoint>& sampled) {
    for (const auto& s : sampled) {
        bool same = true;
        for (std::size_t i = 0; i < space.size() && same; ++i) {
            const auto& p = space.param(i);
            if (p.kind == ParamKind::Continuous) {
                same = std::abs(candidate.coords[i] - s.coords[i]) <= kMatchTol;
            } else if (p.kind == ParamKind::Categorical) {
                same = std::round(candidate.coords[i]) == std::round(s.coords[i]);
            } else {
                same = std::abs(candidate.coords[i] - s.coords[i]) <= kMatchTol;
            }
        }
        if (same) return true;
    }
    return false;
}

double apply_penalty(double mu, const NormalizedPoint& candidate, const SearchSpace& space,
                     const std::vector<NormalizedPoint>& sampled, double value) {
    return matches_sampled(candidate, space, sampled) ? mu + value : mu;
}

GpAcquisition::GpAcquisition(const GpModel& model, AcquisitionSpec spec, AfKind active_kind)
    : model_(model), spec_(std::move(spec)), kind_(active_kind) {
    if (!(spec_.lcb_weight > 0.0)) throw DomainError("lcb_weight must be positive");
    if (spec_.penalty.enabled && spec_.penalty.value < 1e4)
        throw DomainError("penalty value must dominate the standardized posterior mean (>= 1e4)");
    f_best_ = model_.data().y_std.minCoeff();
}

Vec GpAcquisition::value(const std::vector<NormalizedPoint>& pts) const {
    const PosteriorResult post = model_.posterior(pts);
    Vec out(post.mean.size());
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        double mu = post.mean(j);
        if (spec_.penalty.enabled)
            mu = apply_penalty(mu, pts[static_cast<std::size_t>(j)], model_.space(), model_.data().X,
                               spec_.penalty.value);
        const double var = post.var(j);
        const double sigma = std::sqrt(std::max(var, 0.0));
        switch (kind_) {
            case AfKind::EI:
                out(j) = expected_improvement(mu, sigma, f_best_);
                break;
            case AfKind::LCB:
                out(j) = -lower_confidence_bound(mu, sigma, spec_.lcb_weight);
                break;
            case AfKind::MaxVariance:
                out(j) = var;
                break;
        }
    }
    return out;
}

std::pair<Vec, Mat> GpAcquisition::value_with_grad(const std::vector<NormalizedPoint>& pts,
                                                   const std::vector<std::size_t>& grad_dims) const {
    const GpModel::PosteriorGrad post = model_.posterior_with_grad(pts, grad_dims);
    const auto m = post.mean.size();
    const auto g = static_cast<Eigen::Index>(grad_dims.size());
    Vec val(m);
    Mat grad(m, g);
    for (Eigen::Index j = 0; j < m; ++j) {
        double mu = post.mean(j);
        if (spec_.penalty.enabled)
            mu = apply_penalty(mu, pts[static_cast<std::size_t>(j)], model_.space(), model_.data().X,
                               spec_.penalty.value);
        const double var = std::max(post.var(j), 0.0);
        const double sigma = std::max(std::sqrt(var), kSigmaFloor);
        double dmu = 0.0, dvar = 0.0;  // partials of the attractiveness
        switch (kind_) {
            case AfKind::EI: {
                val(j) = expected_improvement(mu, sigma, f_best_);
                const double u = (f_best_ - mu) / sigma;
                dmu = -norm_cdf(u);
                dvar = norm_pdf(u) / (2.0 * sigma);
                break;
            }
            case AfKind::LCB:
                val(j) = -(mu - spec_.lcb_weight * sigma);
                dmu = -1.0;
                dvar = spec_.lcb_weight / (2.0 * sigma);
                break;
            case AfKind::MaxVariance:
                val(j) = var;
                dmu = 0.0;
                dvar = 1.0;
                break;
        }
        for (Eigen::Index d = 0; d < g; ++d)
            grad(j, d) = dmu * post.dmean(j, d) + dvar * post.dvar(j, d);
    }
    return {val, grad};
}

void MafController::observe(const Proposal& p) {
    if (!spec_.maf.enabled) return;
    if (p.used_exploration) {
        explore_next_ = false;  // single-shot override
        return;
    }
    explore_next_ = p.min_distance_to_data < spec_.maf.threshold;
}

}  // namespace mixbo
