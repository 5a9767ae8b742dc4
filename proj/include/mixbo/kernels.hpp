#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixbo/common.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

enum class BaseKernel { Matern52, RBF };

/// How per-dimension parts combine into the full covariance:
///  - Product: product of one-dimensional base kernels, times the Hamming
///    block for categorical dimensions.
///  - Sum: sum of one-dimensional base kernels, plus the Hamming block.
///  - MetaSum: scale_a * (ard * hamming) + scale_b * (ard + hamming), where
///    ard is a single ARD base kernel over all non-categorical dimensions.
enum class Composition { Product, Sum, MetaSum };

enum class ScaleMode { Free, FixedOne };
enum class LengthscalePrior { None, GammaQuantile, LogNormalDim };
enum class ScalePrior { None, GammaYRange };
enum class Rounding { Off, KernelRound };

struct KernelSpec {
    std::string name = "custom";
    BaseKernel base = BaseKernel::Matern52;
    Composition comp = Composition::Product;
    ScaleMode scale_mode = ScaleMode::Free;
    LengthscalePrior ls_prior = LengthscalePrior::None;
    ScalePrior scale_prior = ScalePrior::None;
    Rounding rounding = Rounding::Off;

    /// Named presets: meta_off, hvafner_fixed, KR_on_gam_Mat52, BOSS_off_RBF,
    /// BOSS_off_Mat52, BOSS_off_Mat52_sum, BOSS_on_gam_Mat52,
    /// BOSS_on_LN_Mat52, BOSS_on_gam_fixed_Mat52.
    static KernelSpec preset(const std::string& name);
    static const std::vector<std::string>& preset_names();

    /// Kernel rounding needs integer dimensions and tolerates neither
    /// discrete nor categorical ones.
    void validate_for_space(const SearchSpace& space) const;
};

struct HyperParams {
    Vec lengthscales;      // one per non-categorical dimension
    Vec cat_weights;       // one per categorical dimension
    double scale = 1.0;    // output variance (product/sum), or product-block scale
    double scale_sum = 1.0;  // sum-block scale, MetaSum only
    double noise = 1e-3;   // observation noise variance

    static HyperParams defaults(const KernelSpec& spec, const SearchSpace& space);
};

// ---- priors ---------------------------------------------------------------

struct PriorSpec {
    enum class Family { Gamma, LogNormal } family = Family::Gamma;
    // Gamma: a = shape, b = rate.  LogNormal: a = log-mean, b = log-std.
    double a = 1.0;
    double b = 1.0;
};

/// Gamma(shape, rate) whose CDF passes through (q1, p1) and (q2, p2),
/// found by a 1-d root search over the shape with the rate matched per shape.
PriorSpec gamma_from_quantiles(double p1, double p2, double q1, double q2);

double prior_log_density(const PriorSpec& prior, double v);
/// d log pdf / d log v, used by the MAP fit in log-parameter space.
double prior_log_density_dlog(const PriorSpec& prior, double v);

// ---- kernel evaluation ----------------------------------------------------

/// One-dimensional base kernel at normalized distance r, unit diagonal.
double kernel_1d(BaseKernel base, double lengthscale, double r);
/// Derivative of kernel_1d with respect to r.
double kernel_1d_dr(BaseKernel base, double lengthscale, double r);

/// Hamming ARD kernel over category index vectors: exp(-sum_i w_i [a_i != b_i]).
double kernel_categorical(const Vec& weights, const std::vector<double>& a, const std::vector<double>& b);

/// Full covariance between two points of the same space.
double kernel_eval(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                   const NormalizedPoint& p, const NormalizedPoint& q);

Mat gram(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
         const std::vector<NormalizedPoint>& points);

/// Cross-covariance matrix, rows = train points, cols = test points.
Mat cross_gram(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
               const std::vector<NormalizedPoint>& train, const std::vector<NormalizedPoint>& test);

/// Prior variance k(x, x) at a point (constant except for KR snapping).
double kernel_diag(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                   const NormalizedPoint& p);

/// Apply the kernel-rounding transform: snap integer coordinates to the
/// nearest level anchor.  Identity when rounding is off.
NormalizedPoint kr_snap(const KernelSpec& spec, const SearchSpace& space, const NormalizedPoint& p);

/// d k(p, q) / d p[dim] for a non-categorical dimension of p.
double kernel_eval_dcoord(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                          const NormalizedPoint& p, const NormalizedPoint& q, std::size_t dim);

}  // namespace mixbo
