#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mixbo/common.hpp"

namespace mixbo {

enum class ParamKind { Continuous, Integer, Discrete, Categorical };

/// One dimension of the mixed search domain.
///
/// Continuous dimensions carry real bounds; integer dimensions carry a
/// consecutive level list; discrete dimensions a strictly increasing
/// (possibly non-equidistant) one; categorical dimensions an unordered
/// label list.  Binary variables are integer dimensions with levels {0,1}.
struct ParameterSpec {
    std::string name;
    ParamKind kind = ParamKind::Continuous;
    double low = 0.0;
    double high = 1.0;
    std::vector<double> levels;         // integer / discrete
    std::vector<std::string> categories;  // categorical

    static ParameterSpec continuous(std::string name, double low, double high);
    static ParameterSpec integer(std::string name, int low, int high);
    static ParameterSpec binary(std::string name);
    static ParameterSpec discrete(std::string name, std::vector<double> levels);
    static ParameterSpec categorical(std::string name, std::vector<std::string> categories);

    bool is_ordinal() const { return kind == ParamKind::Integer || kind == ParamKind::Discrete; }
    std::size_t level_count() const {
        return kind == ParamKind::Categorical ? categories.size() : levels.size();
    }
    /// Normalized anchor of level index i: (level - low) / (high - low).
    double anchor(std::size_t i) const;
    /// Index of the level whose anchor is nearest to normalized coordinate u.
    std::size_t nearest_level(double u) const;

    void validate() const;
};

/// Raw-unit point: level values for ordinals, category index for categoricals.
struct Candidate {
    std::vector<double> values;

    bool operator==(const Candidate&) const = default;
};

/// Model-space point: non-categorical coords in [0,1], categorical coords
/// carried through as the category index.
struct NormalizedPoint {
    std::vector<double> coords;

    bool operator==(const NormalizedPoint&) const = default;
};

class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<ParameterSpec> params);

    std::size_t size() const { return params_.size(); }
    const ParameterSpec& param(std::size_t i) const { return params_[i]; }
    const std::vector<ParameterSpec>& params() const { return params_; }

    bool has_continuous() const;
    bool has_categorical() const;
    bool has_discrete() const;
    std::vector<std::size_t> dims_of(ParamKind kind) const;
    std::vector<std::size_t> non_categorical_dims() const;

    void validate_candidate(const Candidate& c) const;

    NormalizedPoint normalize(const Candidate& c) const;
    /// Inverse of normalize.  Ordinal coords must sit on a level anchor
    /// (tolerance 1e-9); off-anchor coords are a caller bug, not a value to
    /// round away, so they raise DomainError.
    Candidate denormalize(const NormalizedPoint& p) const;

    /// Full cartesian product of levels/categories in lexicographic order
    /// (first dimension most significant).  Requires a fully non-continuous
    /// space and a support not exceeding `cap`.
    std::vector<Candidate> enumerate_support(std::size_t cap = 1000000) const;
    std::size_t support_size() const;

    /// Euclidean distance over normalized non-categorical coordinates;
    /// each differing categorical dimension contributes 1 to the squared sum.
    double distance(const Candidate& a, const Candidate& b) const;

private:
    std::vector<ParameterSpec> params_;
};

}  // namespace mixbo
