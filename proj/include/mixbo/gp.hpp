#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mixbo/common.hpp"
#include "mixbo/kernels.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

/// Observed data in normalized inputs, with raw and z-scored objective views.
struct Dataset {
    std::vector<NormalizedPoint> X;
    std::vector<double> y_raw;
    Vec y_std;
    double y_mean = 0.0;
    double y_sd = 1.0;  // 1 when all observations are equal

    static Dataset from_raw(std::vector<NormalizedPoint> X, std::vector<double> y);
    std::size_t size() const { return X.size(); }
};

struct PosteriorResult {
    Vec mean;  // standardized scale
    Vec var;   // clamped at 0
    std::optional<Mat> cov;
};

struct FitOptions {
    double noise_init = 1e-3;
    int restarts = 5;
    int steps = 200;
    double lr = 0.05;
    std::uint64_t seed = 0;
};

class GpModel {
public:
    GpModel(KernelSpec spec, SearchSpace space, HyperParams hp, Dataset data);

    const KernelSpec& spec() const { return spec_; }
    const SearchSpace& space() const { return space_; }
    const HyperParams& hp() const { return hp_; }
    const Dataset& data() const { return data_; }
    const Mat& chol() const { return chol_; }
    double jitter() const { return jitter_; }

    PosteriorResult posterior(const std::vector<NormalizedPoint>& test, bool full_cov = false) const;

    /// Posterior plus derivatives of mean/var with respect to the listed
    /// (non-categorical) coordinates of each test point.
    struct PosteriorGrad {
        Vec mean, var;
        Mat dmean;  // test points x grad dims
        Mat dvar;
    };
    PosteriorGrad posterior_with_grad(const std::vector<NormalizedPoint>& test,
                                      const std::vector<std::size_t>& grad_dims) const;

    double mean_to_raw(double m) const { return m * data_.y_sd + data_.y_mean; }
    double var_to_raw(double v) const { return v * data_.y_sd * data_.y_sd; }

private:
    KernelSpec spec_;
    SearchSpace space_;
    HyperParams hp_;
    Dataset data_;
    Mat chol_;
    Vec alpha_;
    double jitter_ = 1e-6;
};

/// Log marginal likelihood of the standardized observations under (spec, hp).
double log_marginal_likelihood(const KernelSpec& spec, const HyperParams& hp, const SearchSpace& space,
                               const Dataset& data);

/// LML plus its gradient with respect to the log hyperparameters, in the
/// same order used by the MAP fit: log lengthscales, log categorical
/// weights, log scale(s) when free, log noise.
std::pair<double, Vec> log_marginal_likelihood_grad(const KernelSpec& spec, const HyperParams& hp,
                                                    const SearchSpace& space, const Dataset& data);

/// MAP estimate: maximize LML + log prior densities via Adam in log space,
/// best of `restarts` seeded initializations.  Deterministic given the seed.
GpModel fit_map(const KernelSpec& spec, const SearchSpace& space, const Dataset& data,
                const FitOptions& opts = {});

/// Cholesky of K + noise*I + jitter*I with jitter escalation 1e-6 -> 1e-4.
std::pair<Mat, double> chol_with_jitter(Mat K, double noise);

}  // namespace mixbo
