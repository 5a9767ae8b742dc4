#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mixbo/acquisition.hpp"
#include "mixbo/common.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

/// Continuous parameters of the reparameterized acquisition problem:
/// one coordinate in [0,1] per continuous dimension, one scalar per ordinal
/// dimension (index space [0, L-1] for integer, level-value space [d_1, d_D]
/// for discrete), and one logit vector per categorical dimension.
///
/// A degenerate vector pins every non-continuous dimension to a single
/// level/category with probability one; it is how an already-known candidate
/// enters the optimizer as a restart.
struct ThetaVector {
    Vec cont;
    Vec ord;
    std::vector<Vec> cat;
    bool degenerate = false;

    static ThetaVector degenerate_at(const SearchSpace& space, const Candidate& c);
};

/// Finite distribution over one dimension's levels (ordinal: two adjacent
/// levels, or one under a point mass) or categories.
struct DiscreteDistribution {
    std::vector<double> support;  // level values, or category indices
    std::vector<double> probs;

    static DiscreteDistribution point_mass(double v) { return {{v}, {1.0}}; }
    void validate() const;
};

struct PrSettings {
    double tau = 0.1;
    int restarts = 20;
    int steps = 100;
    double lr = 0.025;
    int n_samples = 32;    // final candidate draws
    int mc_size = 128;     // Monte Carlo fallback sample count
    std::size_t enum_cap = 1024;
    bool cat_softmax_divide_tau = true;  // softmax((theta-0.5)/tau) vs *tau
    std::uint64_t seed = 0;
};

/// Table-style reparameterization of one ordinal dimension: theta selects a
/// bracket of two adjacent levels [d_i, d_{i+1}] and the upper level gets
/// probability sigmoid((theta - d_i - (d_{i+1}-d_i)/2) / tau).  Integer
/// dimensions use index space, so the binary special case reduces to
/// sigmoid((theta - 1/2)/tau).
DiscreteDistribution transform_ordinal(const ParameterSpec& p, double theta, double tau);

/// Softmax((logits - 0.5)/tau) over the categories (or * tau when configured).
DiscreteDistribution transform_categorical(const ParameterSpec& p, const Vec& logits, double tau,
                                           bool divide_tau = true);

/// Per-dimension distributions for all non-continuous dimensions, in space
/// order.  Honors the degenerate flag.
std::vector<DiscreteDistribution> theta_distributions(const SearchSpace& space, const ThetaVector& theta,
                                                      const PrSettings& s);

enum class PoMode { Auto, Exact, MonteCarlo };

/// Probabilistic objective: expectation of the acquisition value over the
/// joint (independent) distribution induced by theta.  Exact mode enumerates
/// the joint support; MC mode averages seeded samples.
double probabilistic_objective(const AcquisitionFunction& af, const SearchSpace& space,
                               const ThetaVector& theta, const PrSettings& s, PoMode mode = PoMode::Auto);

struct PoGradient {
    double po = 0.0;
    Vec dcont;
    Vec dord;
    std::vector<Vec> dcat;
};

/// PO with its analytic gradient: multilinearity in the per-dimension
/// probabilities gives the theta part, the GP posterior gives the x part.
PoGradient po_gradient(const AcquisitionFunction& af, const SearchSpace& space, const ThetaVector& theta,
                       const PrSettings& s, PoMode mode = PoMode::Auto);

struct PrResult {
    ThetaVector theta;
    double po = -std::numeric_limits<double>::infinity();
};

/// Multi-restart projected Adam ascent on the PO.  Restart starting points
/// spread by Sobol; an optional incumbent candidate is seeded as a
/// degenerate restart so the returned PO never falls below its value.
PrResult optimize_acquisition_pr(const AcquisitionFunction& af, const SearchSpace& space, const PrSettings& s,
                                 const std::optional<Candidate>& incumbent = std::nullopt);

/// Draw n_samples joint configurations from p(Q|theta), evaluate the
/// acquisition on each paired with theta's continuous part, return the best.
Candidate sample_candidates(const AcquisitionFunction& af, const SearchSpace& space, const ThetaVector& theta,
                            const PrSettings& s);

/// Pure-exploration proposal: argmax of the posterior variance, found with
/// the same PR optimizer.
Candidate max_variance_candidate(const GpModel& model, const AcquisitionSpec& spec, const PrSettings& s);

}  // namespace mixbo
