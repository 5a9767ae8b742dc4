#include "mixbo/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace mixbo {

namespace {
const double kSqrt5 = std::sqrt(5.0);
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

// ---- presets ---------------------------------------------------------------

KernelSpec KernelSpec::preset(const std::string& name) {
    KernelSpec k;
    k.name = name;
    if (name == "meta_off") {
        k.comp = Composition::MetaSum;
    } else if (name == "hvafner_fixed") {
        k.comp = Composition::Product;
        k.scale_mode = ScaleMode::FixedOne;
        k.ls_prior = LengthscalePrior::LogNormalDim;
    } else if (name == "KR_on_gam_Mat52") {
        k.comp = Composition::Product;
        k.ls_prior = LengthscalePrior::GammaQuantile;
        k.scale_prior = ScalePrior::GammaYRange;
        k.rounding = Rounding::KernelRound;
    } else if (name == "BOSS_off_RBF") {
        k.base = BaseKernel::RBF;
    } else if (name == "BOSS_off_Mat52") {
        // defaults
    } else if (name == "BOSS_off_Mat52_sum") {
        k.comp = Composition::Sum;
    } else if (name == "BOSS_on_gam_Mat52") {
        k.ls_prior = LengthscalePrior::GammaQuantile;
        k.scale_prior = ScalePrior::GammaYRange;
    } else if (name == "BOSS_on_LN_Mat52") {
        k.ls_prior = LengthscalePrior::LogNormalDim;
        k.scale_prior = ScalePrior::GammaYRange;
    } else if (name == "BOSS_on_gam_fixed_Mat52") {
        k.ls_prior = LengthscalePrior::GammaQuantile;
        k.scale_mode = ScaleMode::FixedOne;
    } else {
        throw DomainError("unknown kernel preset '" + name + "'");
    }
    return k;
}

const std::vector<std::string>& KernelSpec::preset_names() {
    static const std::vector<std::string> names = {
        "meta_off",       "hvafner_fixed",    "KR_on_gam_Mat52",
        "BOSS_off_RBF",   "BOSS_off_Mat52",   "BOSS_off_Mat52_sum",
        "BOSS_on_gam_Mat52", "BOSS_on_LN_Mat52", "BOSS_on_gam_fixed_Mat52"};
    return names;
}

void KernelSpec::validate_for_space(const SearchSpace& space) const {
    if (rounding == Rounding::KernelRound) {
        if (space.dims_of(ParamKind::Integer).empty())
            throw UnsupportedError("kernel rounding requires at least one integer dimension");
        if (space.has_discrete() || space.has_categorical())
            throw UnsupportedError("kernel rounding is incompatible with discrete and categorical dimensions");
    }
}

HyperParams HyperParams::defaults(const KernelSpec& spec, const SearchSpace& space) {
    HyperParams hp;
    const auto noncat = space.non_categorical_dims();
    const auto cat = space.dims_of(ParamKind::Categorical);
    const double d = static_cast<double>(space.size());
    hp.lengthscales = Vec::Constant(static_cast<Eigen::Index>(noncat.size()), 0.5 * std::sqrt(d));
    hp.cat_weights = Vec::Ones(static_cast<Eigen::Index>(cat.size()));
    hp.scale = 1.0;
    hp.scale_sum = 1.0;
    hp.noise = 1e-3;
    if (spec.scale_mode == ScaleMode::FixedOne) hp.scale = 1.0;
    return hp;
}

// ---- priors ----------------------------------------------------------------

PriorSpec gamma_from_quantiles(double p1, double p2, double q1, double q2) {
    if (!(q1 > 0.0 && q1 < q2)) throw DomainError("gamma_from_quantiles requires 0 < q1 < q2");
    if (!(p1 > 0.0 && p1 < p2 && p2 < 1.0)) throw DomainError("gamma_from_quantiles requires 0 < p1 < p2 < 1");

    // For each shape, the rate matching F(q2) = p2 is the Gamma(shape,1)
    // quantile divided by q2; bisect the shape so F(q1) = p1 as well.
    auto mismatch = [&](double shape) {
        const double rate = boost::math::gamma_p_inv(shape, p2) / q2;
        return boost::math::gamma_p(shape, rate * q1) - p1;
    };
    double lo = 1e-3, hi = 1.0;
    while (mismatch(hi) > 0.0 && hi < 1e6) hi *= 2.0;
    while (mismatch(lo) < 0.0 && lo > 1e-9) lo *= 0.5;
    double flo = mismatch(lo), fhi = mismatch(hi);
    if (flo * fhi > 0.0) throw NumericError("gamma_from_quantiles: no shape bracket found");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = mismatch(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    PriorSpec out;
    out.family = PriorSpec::Family::Gamma;
    out.a = 0.5 * (lo + hi);
    out.b = boost::math::gamma_p_inv(out.a, p2) / q2;
    // defining property, checked to the contract tolerance
    if (std::abs(boost::math::gamma_p(out.a, out.b * q1) - p1) > 1e-6 ||
        std::abs(boost::math::gamma_p(out.a, out.b * q2) - p2) > 1e-6)
        throw NumericError("gamma_from_quantiles: root search did not converge");
    return out;
}

double prior_log_density(const PriorSpec& prior, double v) {
    if (!(v > 0.0)) throw DomainError("prior_log_density requires v > 0");
    if (prior.family == PriorSpec::Family::Gamma) {
        return prior.a * std::log(prior.b) - std::lgamma(prior.a) + (prior.a - 1.0) * std::log(v) - prior.b * v;
    }
    const double z = (std::log(v) - prior.a) / prior.b;
    return -std::log(v) - std::log(prior.b) - 0.5 * kLog2Pi - 0.5 * z * z;
}

double prior_log_density_dlog(const PriorSpec& prior, double v) {
    if (prior.family == PriorSpec::Family::Gamma) return (prior.a - 1.0) - prior.b * v;
    const double z = (std::log(v) - prior.a) / prior.b;
    return -1.0 - z / prior.b;
}

// ---- base kernels ----------------------------------------------------------

double kernel_1d(BaseKernel base, double lengthscale, double r) {
    if (!(lengthscale > 0.0)) throw DomainError("kernel lengthscale must be positive");
    const double u = r / lengthscale;
    if (base == BaseKernel::Matern52) {
        const double t = kSqrt5 * u;
        return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
    return std::exp(-0.5 * u * u);
}

double kernel_1d_dr(BaseKernel base, double lengthscale, double r) {
    const double u = r / lengthscale;
    if (base == BaseKernel::Matern52) {
        const double t = kSqrt5 * u;
        return -(5.0 * u / 3.0) * (1.0 + t) * std::exp(-t) / lengthscale;
    }
    return -u * std::exp(-0.5 * u * u) / lengthscale;
}

double kernel_categorical(const Vec& weights, const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || static_cast<Eigen::Index>(a.size()) != weights.size())
        throw DomainError("kernel_categorical: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(weights[static_cast<Eigen::Index>(i)] > 0.0))
            throw DomainError("kernel_categorical: weights must be positive");
        if (std::round(a[i]) != std::round(b[i])) s += weights[static_cast<Eigen::Index>(i)];
    }
    return std::exp(-s);
}

NormalizedPoint kr_snap(const KernelSpec& spec, const SearchSpace& space, const NormalizedPoint& p) {
    if (spec.rounding != Rounding::KernelRound) return p;
    NormalizedPoint out = p;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& ps = space.param(i);
        if (ps.kind == ParamKind::Integer) out.coords[i] = ps.anchor(ps.nearest_level(p.coords[i]));
    }
    return out;
}

namespace {

struct SplitPoint {
    std::vector<double> noncat;  // normalized coords of non-categorical dims
    std::vector<double> cat;     // category indices
};

SplitPoint split(const SearchSpace& space, const NormalizedPoint& p) {
    SplitPoint s;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.param(i).kind == ParamKind::Categorical)
            s.cat.push_back(p.coords[i]);
        else
            s.noncat.push_back(p.coords[i]);
    }
    return s;
}

double cat_block(const HyperParams& hp, const SplitPoint& a, const SplitPoint& b) {
    if (a.cat.empty()) return 1.0;
    return kernel_categorical(hp.cat_weights, a.cat, b.cat);
}

double ard_distance(const HyperParams& hp, const SplitPoint& a, const SplitPoint& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.noncat.size(); ++i) {
        const double d = (a.noncat[i] - b.noncat[i]) / hp.lengthscales[static_cast<Eigen::Index>(i)];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double base_at(BaseKernel base, double r) {
    if (base == BaseKernel::Matern52) {
        const double t = kSqrt5 * r;
        return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
    return std::exp(-0.5 * r * r);
}

double base_at_dr(BaseKernel base, double r) {
    if (base == BaseKernel::Matern52) {
        const double t = kSqrt5 * r;
        return -(5.0 * r / 3.0) * (1.0 + t) * std::exp(-t);
    }
    return -r * std::exp(-0.5 * r * r);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                   const NormalizedPoint& p, const NormalizedPoint& q) {
    const NormalizedPoint ps = kr_snap(spec, space, p);
    const NormalizedPoint qs = kr_snap(spec, space, q);
    const SplitPoint a = split(space, ps);
    const SplitPoint b = split(space, qs);
    const std::size_t dnc = a.noncat.size();

    switch (spec.comp) {
        case Composition::Product: {
            double k = cat_block(hp, a, b);
            for (std::size_t i = 0; i < dnc; ++i)
                k *= kernel_1d(spec.base, hp.lengthscales[static_cast<Eigen::Index>(i)],
                               std::abs(a.noncat[i] - b.noncat[i]));
            return hp.scale * k;
        }
        case Composition::Sum: {
            double k = 0.0;
            for (std::size_t i = 0; i < dnc; ++i)
                k += kernel_1d(spec.base, hp.lengthscales[static_cast<Eigen::Index>(i)],
                               std::abs(a.noncat[i] - b.noncat[i]));
            if (!a.cat.empty()) k += cat_block(hp, a, b);
            return hp.scale * k;
        }
        case Composition::MetaSum: {
            const double kc = cat_block(hp, a, b);
            const double knc = dnc > 0 ? base_at(spec.base, ard_distance(hp, a, b)) : 1.0;
            double prod = 1.0, sum = 0.0;
            if (!a.cat.empty()) {
                prod *= kc;
                sum += kc;
            }
            if (dnc > 0) {
                prod *= knc;
                sum += knc;
            }
            return hp.scale * prod + hp.scale_sum * sum;
        }
    }
    throw DomainError("kernel_eval: bad composition");
}

double kernel_diag(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                   const NormalizedPoint& p) {
    return kernel_eval(spec, hp, space, p, p);
}

Mat gram(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
         const std::vector<NormalizedPoint>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n == 0) throw DomainError("gram: need at least one point");
    Mat K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = kernel_eval(spec, hp, space, points[static_cast<std::size_t>(i)],
                                         points[static_cast<std::size_t>(j)]);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Mat cross_gram(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
               const std::vector<NormalizedPoint>& train, const std::vector<NormalizedPoint>& test) {
    Mat K(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(test.size()));
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j)
            K(i, j) = kernel_eval(spec, hp, space, train[static_cast<std::size_t>(i)],
                                  test[static_cast<std::size_t>(j)]);
    return K;
}

double kernel_eval_dcoord(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                          const NormalizedPoint& p, const NormalizedPoint& q, std::size_t dim) {
    if (space.param(dim).kind == ParamKind::Categorical)
        throw DomainError("kernel_eval_dcoord: categorical dimension has no coordinate derivative");
    if (spec.rounding == Rounding::KernelRound && space.param(dim).kind == ParamKind::Integer)
        return 0.0;  // piecewise constant under rounding

    const SplitPoint a = split(space, kr_snap(spec, space, p));
    const SplitPoint b = split(space, kr_snap(spec, space, q));
    const std::size_t dnc = a.noncat.size();
    // index of `dim` among non-categorical dims
    std::size_t nci = 0;
    for (std::size_t i = 0; i < dim; ++i)
        if (space.param(i).kind != ParamKind::Categorical) ++nci;

    const double l = hp.lengthscales[static_cast<Eigen::Index>(nci)];
    const double delta = a.noncat[nci] - b.noncat[nci];

    switch (spec.comp) {
        case Composition::Product: {
            double rest = cat_block(hp, a, b);
            for (std::size_t i = 0; i < dnc; ++i) {
                if (i == nci) continue;
                rest *= kernel_1d(spec.base, hp.lengthscales[static_cast<Eigen::Index>(i)],
                                  std::abs(a.noncat[i] - b.noncat[i]));
            }
            const double sgn = delta >= 0.0 ? 1.0 : -1.0;
            return hp.scale * rest * kernel_1d_dr(spec.base, l, std::abs(delta)) * sgn;
        }
        case Composition::Sum: {
            const double sgn = delta >= 0.0 ? 1.0 : -1.0;
            return hp.scale * kernel_1d_dr(spec.base, l, std::abs(delta)) * sgn;
        }
        case Composition::MetaSum: {
            const double r = ard_distance(hp, a, b);
            const double kc = cat_block(hp, a, b);
            double coeff = hp.scale_sum;
            if (!a.cat.empty())
                coeff = hp.scale * kc + hp.scale_sum;
            else
                coeff = hp.scale + hp.scale_sum;
            // d base(r)/d coord = base'(r) * delta / (l^2 r); finite limit at r=0
            double dr_dc;
            if (r < 1e-14) {
                dr_dc = 0.0;
            } else {
                dr_dc = base_at_dr(spec.base, r) * delta / (l * l * r);
            }
            return coeff * dr_dc;
        }
    }
    throw DomainError("kernel_eval_dcoord: bad composition");
}

}  // namespace mixbo
