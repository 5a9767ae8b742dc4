#pragma once

#include <memory>
#include <vector>

#include "mixbo/common.hpp"
#include "mixbo/gp.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

enum class AfKind { EI, LCB, MaxVariance };

struct PenaltySpec {
    bool enabled = false;
    double value = 1e6;  // must dominate any standardized posterior mean
};

struct MafSpec {
    bool enabled = false;
    double threshold = 0.1;  // normalized-coordinate distance
};

struct AcquisitionSpec {
    AfKind kind = AfKind::EI;
    double lcb_weight = 2.0;
    PenaltySpec penalty;
    MafSpec maf;
};

/// Expected improvement for minimization: u = (f_best - mu) / sigma,
/// EI = (f_best - mu) Phi(u) + sigma phi(u); at sigma = 0 the limit
/// max(f_best - mu, 0).
double expected_improvement(double mu, double sigma, double f_best);

/// mu - w * sigma; lower is more attractive.
double lower_confidence_bound(double mu, double sigma, double w);

/// Resampling penalty: shifts the posterior mean by +value when the
/// candidate exactly matches a sampled point (non-continuous coordinates
/// equal, continuous within 1e-9 normalized).
double apply_penalty(double mu, const NormalizedPoint& candidate, const SearchSpace& space,
                     const std::vector<NormalizedPoint>& sampled, double value = 1e6);

bool matches_sampled(const NormalizedPoint& candidate, const SearchSpace& space,
                     const std::vector<NormalizedPoint>& sampled);

/// Scalar "attractiveness" the acquisition optimizer maximizes, uniform
/// across AF kinds: EI stays as is, LCB enters negated, MaxVariance is the
/// posterior variance.
class AcquisitionFunction {
public:
    virtual ~AcquisitionFunction() = default;
    virtual Vec value(const std::vector<NormalizedPoint>& pts) const = 0;
    /// Value plus d value / d coords for the listed non-categorical dims.
    virtual std::pair<Vec, Mat> value_with_grad(const std::vector<NormalizedPoint>& pts,
                                                const std::vector<std::size_t>& grad_dims) const = 0;
};

/// GP-backed acquisition: posterior -> penalty on the mean -> AF formula.
class GpAcquisition : public AcquisitionFunction {
public:
    GpAcquisition(const GpModel& model, AcquisitionSpec spec, AfKind active_kind);

    Vec value(const std::vector<NormalizedPoint>& pts) const override;
    std::pair<Vec, Mat> value_with_grad(const std::vector<NormalizedPoint>& pts,
                                        const std::vector<std::size_t>& grad_dims) const override;

    AfKind kind() const { return kind_; }

private:
    const GpModel& model_;
    AcquisitionSpec spec_;
    AfKind kind_;
    double f_best_ = 0.0;  // standardized incumbent minimum
};

struct Proposal {
    Candidate candidate;
    double af_value = 0.0;
    bool used_exploration = false;
    double min_distance_to_data = 0.0;
};

/// Near-duplicate watchdog: after a proposal lands within the distance
/// threshold of existing data, the next iteration runs pure exploration.
/// The exploration iteration itself never re-triggers.
class MafController {
public:
    explicit MafController(AcquisitionSpec spec) : spec_(std::move(spec)) {}

    AfKind next_kind() const { return explore_next_ ? AfKind::MaxVariance : spec_.kind; }
    void observe(const Proposal& p);

private:
    AcquisitionSpec spec_;
    bool explore_next_ = false;
};

}  // namespace mixbo
