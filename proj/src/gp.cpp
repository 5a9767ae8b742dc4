#include "mixbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mixbo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNoiseFloor = 1e-6;
constexpr double kBaseJitter = 1e-6;
constexpr double kMaxJitter = 1e-4;
const double kSqrt5 = std::sqrt(5.0);

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

// d k1d / d lengthscale at fixed separation r (k1d takes u = r/l).
double kernel_1d_dl(BaseKernel base, double l, double r) {
    const double u = r / l;
    if (base == BaseKernel::Matern52) {
        const double t = kSqrt5 * u;
        return (5.0 * u * u / 3.0) * (1.0 + t) * std::exp(-t) / l;
    }
    return std::exp(-0.5 * u * u) * u * u / l;
}

struct ParamLayout {
    std::size_t n_ls = 0;
    std::size_t n_cat = 0;
    bool free_scale = false;
    bool meta = false;  // second scale present
    std::size_t total = 0;

    static ParamLayout of(const KernelSpec& spec, const SearchSpace& space) {
        ParamLayout lo;
        lo.n_ls = space.non_categorical_dims().size();
        lo.n_cat = space.dims_of(ParamKind::Categorical).size();
        lo.free_scale = spec.scale_mode == ScaleMode::Free;
        lo.meta = spec.comp == Composition::MetaSum;
        lo.total = lo.n_ls + lo.n_cat + (lo.free_scale ? (lo.meta ? 2 : 1) : 0) + 1;  // + noise
        return lo;
    }

    Vec pack(const HyperParams& hp) const {
        Vec z(static_cast<Eigen::Index>(total));
        Eigen::Index k = 0;
        for (std::size_t i = 0; i < n_ls; ++i) z(k++) = std::log(hp.lengthscales[static_cast<Eigen::Index>(i)]);
        for (std::size_t i = 0; i < n_cat; ++i) z(k++) = std::log(hp.cat_weights[static_cast<Eigen::Index>(i)]);
        if (free_scale) {
            z(k++) = std::log(hp.scale);
            if (meta) z(k++) = std::log(hp.scale_sum);
        }
        z(k++) = std::log(hp.noise);
        return z;
    }

    HyperParams unpack(const Vec& z, const KernelSpec& spec, const SearchSpace& space) const {
        HyperParams hp = HyperParams::defaults(spec, space);
        Eigen::Index k = 0;
        for (std::size_t i = 0; i < n_ls; ++i) hp.lengthscales[static_cast<Eigen::Index>(i)] = std::exp(z(k++));
        for (std::size_t i = 0; i < n_cat; ++i) hp.cat_weights[static_cast<Eigen::Index>(i)] = std::exp(z(k++));
        if (free_scale) {
            hp.scale = std::exp(z(k++));
            if (meta) hp.scale_sum = std::exp(z(k++));
        } else {
            hp.scale = 1.0;
            hp.scale_sum = 1.0;
        }
        hp.noise = std::max(std::exp(z(k++)), kNoiseFloor);
        return hp;
    }
};

// Gram matrix of the scaled kernel plus its derivatives with respect to each
// log hyperparameter (noise excluded; its derivative is noise * I).
struct GramWithGrads {
    Mat K;
    std::vector<Mat> dK;  // order matches ParamLayout (without noise)
};

GramWithGrads gram_with_grads(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                              const std::vector<NormalizedPoint>& pts, const ParamLayout& lo) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto noncat = space.non_categorical_dims();
    const auto catdims = space.dims_of(ParamKind::Categorical);

    std::vector<NormalizedPoint> snapped(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) snapped[i] = kr_snap(spec, space, pts[i]);

    // per-dimension separations
    std::vector<Mat> sep(lo.n_ls);
    for (std::size_t d = 0; d < lo.n_ls; ++d) {
        sep[d].resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                sep[d](i, j) = std::abs(snapped[static_cast<std::size_t>(i)].coords[noncat[d]] -
                                        snapped[static_cast<std::size_t>(j)].coords[noncat[d]]);
    }
    // categorical mismatch indicators and the Hamming block
    std::vector<Mat> mism(lo.n_cat);
    Mat cat = Mat::Ones(n, n);
    for (std::size_t c = 0; c < lo.n_cat; ++c) {
        mism[c].resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                mism[c](i, j) = std::round(snapped[static_cast<std::size_t>(i)].coords[catdims[c]]) ==
                                        std::round(snapped[static_cast<std::size_t>(j)].coords[catdims[c]])
                                    ? 0.0
                                    : 1.0;
    }
    if (lo.n_cat > 0) {
        Mat s = Mat::Zero(n, n);
        for (std::size_t c = 0; c < lo.n_cat; ++c) s += hp.cat_weights[static_cast<Eigen::Index>(c)] * mism[c];
        cat = (-s.array()).exp();
    }

    GramWithGrads out;
    out.dK.resize(lo.total - 1);

    if (spec.comp == Composition::Product || spec.comp == Composition::Sum) {
        std::vector<Mat> k1(lo.n_ls);
        for (std::size_t d = 0; d < lo.n_ls; ++d) {
            const double l = hp.lengthscales[static_cast<Eigen::Index>(d)];
            k1[d] = sep[d].unaryExpr([&](double r) { return kernel_1d(spec.base, l, r); });
        }
        Mat corr;
        if (spec.comp == Composition::Product) {
            // prefix/suffix products give leave-one-out products without division
            std::vector<Mat> prefix(lo.n_ls + 1), suffix(lo.n_ls + 1);
            prefix[0] = Mat::Ones(n, n);
            for (std::size_t d = 0; d < lo.n_ls; ++d) prefix[d + 1] = prefix[d].cwiseProduct(k1[d]);
            suffix[lo.n_ls] = Mat::Ones(n, n);
            for (std::size_t d = lo.n_ls; d-- > 0;) suffix[d] = suffix[d + 1].cwiseProduct(k1[d]);
            corr = prefix[lo.n_ls].cwiseProduct(cat);
            for (std::size_t d = 0; d < lo.n_ls; ++d) {
                const double l = hp.lengthscales[static_cast<Eigen::Index>(d)];
                Mat dk1 = sep[d].unaryExpr([&](double r) { return kernel_1d_dl(spec.base, l, r); });
                out.dK[d] = hp.scale * l * cat.cwiseProduct(prefix[d].cwiseProduct(suffix[d + 1]).cwiseProduct(dk1));
            }
            for (std::size_t c = 0; c < lo.n_cat; ++c) {
                const double w = hp.cat_weights[static_cast<Eigen::Index>(c)];
                out.dK[lo.n_ls + c] = -hp.scale * w * prefix[lo.n_ls].cwiseProduct(cat).cwiseProduct(mism[c]);
            }
        } else {
            corr = Mat::Zero(n, n);
            for (std::size_t d = 0; d < lo.n_ls; ++d) corr += k1[d];
            if (lo.n_cat > 0) corr += cat;
            for (std::size_t d = 0; d < lo.n_ls; ++d) {
                const double l = hp.lengthscales[static_cast<Eigen::Index>(d)];
                Mat dk1 = sep[d].unaryExpr([&](double r) { return kernel_1d_dl(spec.base, l, r); });
                out.dK[d] = hp.scale * l * dk1;
            }
            for (std::size_t c = 0; c < lo.n_cat; ++c) {
                const double w = hp.cat_weights[static_cast<Eigen::Index>(c)];
                out.dK[lo.n_ls + c] = -hp.scale * w * cat.cwiseProduct(mism[c]);
            }
        }
        out.K = hp.scale * corr;
        if (lo.free_scale) out.dK[lo.n_ls + lo.n_cat] = out.K;
        return out;
    }

    // MetaSum: scale * (cat .* ard) + scale_sum * (cat + ard)
    Mat r2 = Mat::Zero(n, n);
    for (std::size_t d = 0; d < lo.n_ls; ++d) {
        const double l = hp.lengthscales[static_cast<Eigen::Index>(d)];
        r2 += (sep[d] / l).array().square().matrix();
    }
    Mat r = r2.array().sqrt();
    Mat ard = lo.n_ls > 0 ? Mat(r.unaryExpr([&](double rr) { return base_at(spec.base, rr); })) : Mat::Ones(n, n);
    const bool has_cat = lo.n_cat > 0;
    const bool has_nc = lo.n_ls > 0;
    Mat prod = Mat::Ones(n, n), sum = Mat::Zero(n, n);
    if (has_cat) {
        prod = prod.cwiseProduct(cat);
        sum += cat;
    }
    if (has_nc) {
        prod = prod.cwiseProduct(ard);
        sum += ard;
    }
    out.K = hp.scale * prod + hp.scale_sum * sum;

    Mat dard_dr = r.unaryExpr([&](double rr) { return base_at_dr(spec.base, rr); });
    for (std::size_t d = 0; d < lo.n_ls; ++d) {
        const double l = hp.lengthscales[static_cast<Eigen::Index>(d)];
        // dr/dl_d = -sep_d^2 / (l^3 r); guard r = 0 where the derivative vanishes
        Mat dr = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (r(i, j) > 1e-14)
                    dr(i, j) = -sep[d](i, j) * sep[d](i, j) / (l * l * l * r(i, j));
        Mat dard = dard_dr.cwiseProduct(dr);
        Mat coeff = has_cat ? Mat(hp.scale * cat + Mat::Constant(n, n, hp.scale_sum))
                            : Mat::Constant(n, n, hp.scale + hp.scale_sum);
        out.dK[d] = l * coeff.cwiseProduct(dard);
    }
    for (std::size_t c = 0; c < lo.n_cat; ++c) {
        const double w = hp.cat_weights[static_cast<Eigen::Index>(c)];
        Mat dcat = -cat.cwiseProduct(mism[c]);
        Mat coeff = has_nc ? Mat(hp.scale * ard + Mat::Constant(n, n, hp.scale_sum))
                           : Mat::Constant(n, n, hp.scale + hp.scale_sum);
        out.dK[lo.n_ls + c] = w * coeff.cwiseProduct(dcat);
    }
    if (lo.free_scale) {
        out.dK[lo.n_ls + lo.n_cat] = hp.scale * prod;
        out.dK[lo.n_ls + lo.n_cat + 1] = hp.scale_sum * sum;
    }
    return out;
}

struct PriorSet {
    std::optional<PriorSpec> lengthscale;
    std::optional<PriorSpec> scale;
};

PriorSet build_priors(const KernelSpec& spec, const SearchSpace& space, const Dataset& data) {
    PriorSet ps;
    switch (spec.ls_prior) {
        case LengthscalePrior::None:
            break;
        case LengthscalePrior::GammaQuantile:
            // quantile anchors at 5% and 50% of the normalized per-dimension range
            ps.lengthscale = gamma_from_quantiles(0.05, 0.5, 0.05, 0.5);
            break;
        case LengthscalePrior::LogNormalDim: {
            PriorSpec p;
            p.family = PriorSpec::Family::LogNormal;
            p.a = std::sqrt(2.0) + 0.5 * std::log(static_cast<double>(space.size()));
            p.b = std::sqrt(3.0);
            ps.lengthscale = p;
            break;
        }
    }
    if (spec.scale_prior == ScalePrior::GammaYRange && spec.scale_mode == ScaleMode::Free) {
        const double range = std::max(data.y_std.maxCoeff() - data.y_std.minCoeff(), 1e-3);
        PriorSpec p;
        p.family = PriorSpec::Family::Gamma;
        p.a = 2.0;
        p.b = std::pow(1.0 / (2.0 * range), 2);
        ps.scale = p;
    }
    return ps;
}

}  // namespace

Dataset Dataset::from_raw(std::vector<NormalizedPoint> X, std::vector<double> y) {
    if (X.size() != y.size()) throw DomainError("Dataset: |X| != |y|");
    Dataset d;
    d.X = std::move(X);
    d.y_raw = std::move(y);
    const auto n = static_cast<Eigen::Index>(d.y_raw.size());
    Vec yv = Eigen::Map<const Vec>(d.y_raw.data(), n);
    d.y_mean = n > 0 ? yv.mean() : 0.0;
    const double var = n > 0 ? (yv.array() - d.y_mean).square().mean() : 0.0;
    d.y_sd = std::sqrt(var);
    if (!(d.y_sd > 1e-12)) d.y_sd = 1.0;
    d.y_std = (yv.array() - d.y_mean) / d.y_sd;
    return d;
}

std::pair<Mat, double> chol_with_jitter(Mat K, double noise) {
    const auto n = K.rows();
    for (double jitter = kBaseJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
        Mat Kn = K + (noise + jitter) * Mat::Identity(n, n);
        Eigen::LLT<Mat> llt(Kn);
        if (llt.info() == Eigen::Success) return {Mat(llt.matrixL()), jitter};
    }
    throw NumericError("Cholesky factorization failed after jitter escalation to 1e-4");
}

GpModel::GpModel(KernelSpec spec, SearchSpace space, HyperParams hp, Dataset data)
    : spec_(std::move(spec)), space_(std::move(space)), hp_(std::move(hp)), data_(std::move(data)) {
    if (data_.size() == 0) throw DomainError("GpModel: empty dataset");
    const Mat K = gram(spec_, hp_, space_, data_.X);
    auto [L, jit] = chol_with_jitter(K, hp_.noise);
    chol_ = std::move(L);
    jitter_ = jit;
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.y_std);
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
}

PosteriorResult GpModel::posterior(const std::vector<NormalizedPoint>& test, bool full_cov) const {
    const auto m = static_cast<Eigen::Index>(test.size());
    const Mat Ks = cross_gram(spec_, hp_, space_, data_.X, test);
    const Mat V = chol_.triangularView<Eigen::Lower>().solve(Ks);

    PosteriorResult out;
    out.mean = Ks.transpose() * alpha_;
    out.var.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double prior = kernel_diag(spec_, hp_, space_, test[static_cast<std::size_t>(j)]);
        out.var(j) = std::max(prior - V.col(j).squaredNorm(), 0.0);
    }
    if (full_cov) {
        Mat Kss(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                Kss(i, j) = kernel_eval(spec_, hp_, space_, test[static_cast<std::size_t>(i)],
                                        test[static_cast<std::size_t>(j)]);
        out.cov = Kss - V.transpose() * V;
    }
    return out;
}

GpModel::PosteriorGrad GpModel::posterior_with_grad(const std::vector<NormalizedPoint>& test,
                                                    const std::vector<std::size_t>& grad_dims) const {
    const auto m = static_cast<Eigen::Index>(test.size());
    const auto g = static_cast<Eigen::Index>(grad_dims.size());
    const Mat Ks = cross_gram(spec_, hp_, space_, data_.X, test);
    const Mat V = chol_.triangularView<Eigen::Lower>().solve(Ks);
    const Mat B = chol_.transpose().triangularView<Eigen::Upper>().solve(V);  // (K+noise)^-1 k*

    PosteriorGrad out;
    out.mean = Ks.transpose() * alpha_;
    out.var.resize(m);
    out.dmean.resize(m, g);
    out.dvar.resize(m, g);
    const auto n = static_cast<Eigen::Index>(data_.size());
    Vec dks(n);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& tp = test[static_cast<std::size_t>(j)];
        out.var(j) = std::max(kernel_diag(spec_, hp_, space_, tp) - V.col(j).squaredNorm(), 0.0);
        for (Eigen::Index d = 0; d < g; ++d) {
            for (Eigen::Index i = 0; i < n; ++i)
                dks(i) = kernel_eval_dcoord(spec_, hp_, space_, tp, data_.X[static_cast<std::size_t>(i)],
                                            grad_dims[static_cast<std::size_t>(d)]);
            out.dmean(j, d) = dks.dot(alpha_);
            out.dvar(j, d) = -2.0 * dks.dot(B.col(j));
        }
    }
    return out;
}

double log_marginal_likelihood(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                               const Dataset& data) {
    const Mat K = gram(spec, hp, space, data.X);
    auto [L, jit] = chol_with_jitter(K, hp.noise);
    (void)jit;
    Vec a = L.triangularView<Eigen::Lower>().solve(data.y_std);
    const double quad = a.squaredNorm();
    const double logdet = L.diagonal().array().log().sum();
    const auto n = static_cast<double>(data.size());
    return -0.5 * quad - logdet - 0.5 * n * kLog2Pi;
}

std::pair<double, Vec> log_marginal_likelihood_grad(const KernelSpec& spec, const HyperParams& hp,
                                                    const SearchSpace& space, const Dataset& data) {
    const ParamLayout lo = ParamLayout::of(spec, space);
    GramWithGrads gg = gram_with_grads(spec, hp, space, data.X, lo);
    auto [L, jit] = chol_with_jitter(gg.K, hp.noise);
    (void)jit;
    const auto n = static_cast<Eigen::Index>(data.size());
    Vec a = L.triangularView<Eigen::Lower>().solve(data.y_std);
    const double lml = -0.5 * a.squaredNorm() - L.diagonal().array().log().sum() -
                       0.5 * static_cast<double>(n) * kLog2Pi;
    Vec alpha = L.transpose().triangularView<Eigen::Upper>().solve(a);
    // M = alpha alpha^T - K^-1; dLML/dtheta = 0.5 tr(M dK)
    Mat Kinv = L.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
    Kinv = L.transpose().triangularView<Eigen::Upper>().solve(Kinv);
    const Mat M = alpha * alpha.transpose() - Kinv;

    Vec grad(static_cast<Eigen::Index>(lo.total));
    for (std::size_t p = 0; p + 1 < lo.total; ++p)
        grad(static_cast<Eigen::Index>(p)) = 0.5 * M.cwiseProduct(gg.dK[p]).sum();
    grad(static_cast<Eigen::Index>(lo.total - 1)) = 0.5 * hp.noise * M.trace();
    return {lml, grad};
}

GpModel fit_map(const KernelSpec& spec, const SearchSpace& space, const Dataset& data, const FitOptions& opts) {
    if (data.size() < 2) throw DomainError("fit_map: need at least 2 observations");
    spec.validate_for_space(space);
    const ParamLayout lo = ParamLayout::of(spec, space);
    const PriorSet priors = build_priors(spec, space, data);

    auto objective = [&](const Vec& z, Vec* grad_out) -> double {
        const HyperParams hp = lo.unpack(z, spec, space);
        auto [lml, grad] = log_marginal_likelihood_grad(spec, hp, space, data);
        double obj = lml;
        if (priors.lengthscale) {
            for (std::size_t i = 0; i < lo.n_ls; ++i) {
                const double l = hp.lengthscales[static_cast<Eigen::Index>(i)];
                obj += prior_log_density(*priors.lengthscale, l);
                grad(static_cast<Eigen::Index>(i)) += prior_log_density_dlog(*priors.lengthscale, l);
            }
        }
        if (priors.scale && lo.free_scale) {
            obj += prior_log_density(*priors.scale, hp.scale);
            grad(static_cast<Eigen::Index>(lo.n_ls + lo.n_cat)) += prior_log_density_dlog(*priors.scale, hp.scale);
            if (lo.meta) {
                obj += prior_log_density(*priors.scale, hp.scale_sum);
                grad(static_cast<Eigen::Index>(lo.n_ls + lo.n_cat + 1)) +=
                    prior_log_density_dlog(*priors.scale, hp.scale_sum);
            }
        }
        if (grad_out) *grad_out = grad;
        return obj;
    };

    std::mt19937_64 rng(derive_seed(opts.seed, 0x6f69744d41504649ull));
    std::uniform_real_distribution<double> uls(std::log(0.05), std::log(2.0));
    std::uniform_real_distribution<double> usc(std::log(0.1), std::log(3.0));

    double best_obj = -std::numeric_limits<double>::infinity();
    Vec best_z;
    const double log_noise_floor = std::log(kNoiseFloor);

    for (int restart = 0; restart < std::max(opts.restarts, 1); ++restart) {
        HyperParams hp0 = HyperParams::defaults(spec, space);
        hp0.noise = opts.noise_init;
        if (restart > 0) {
            for (Eigen::Index i = 0; i < hp0.lengthscales.size(); ++i) hp0.lengthscales(i) = std::exp(uls(rng));
            for (Eigen::Index i = 0; i < hp0.cat_weights.size(); ++i) hp0.cat_weights(i) = std::exp(uls(rng));
            if (lo.free_scale) {
                hp0.scale = std::exp(usc(rng));
                if (lo.meta) hp0.scale_sum = std::exp(usc(rng));
            }
        }
        Vec z = lo.pack(hp0);
        Vec m = Vec::Zero(z.size()), v = Vec::Zero(z.size());
        double b1t = 1.0, b2t = 1.0;
        for (int step = 0; step <= opts.steps; ++step) {
            Vec grad;
            double obj;
            try {
                obj = objective(z, &grad);
            } catch (const NumericError&) {
                break;  // abandon this restart, keep its best-so-far
            }
            if (std::isfinite(obj) && obj > best_obj) {
                best_obj = obj;
                best_z = z;
            }
            if (step == opts.steps) break;
            b1t *= 0.9;
            b2t *= 0.999;
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v.array() + 0.001 * grad.array().square();
            const Vec mh = m / (1.0 - b1t);
            const Vec vh = v / (1.0 - b2t);
            z += opts.lr * (mh.array() / (vh.array().sqrt() + 1e-8)).matrix();
            // noise floor in log space
            Eigen::Index noise_idx = static_cast<Eigen::Index>(lo.total) - 1;
            z(noise_idx) = std::max(z(noise_idx), log_noise_floor);
        }
    }
    if (!best_z.size()) throw NumericError("fit_map: every restart failed to produce a finite objective");
    return GpModel(spec, space, lo.unpack(best_z, spec, space), data);
}

}  // namespace mixbo
