#include "mixbo/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mixbo {

namespace {
constexpr double kAnchorTol = 1e-9;
}

ParameterSpec ParameterSpec::continuous(std::string name, double low, double high) {
    ParameterSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::Continuous;
    p.low = low;
    p.high = high;
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::integer(std::string name, int low, int high) {
    ParameterSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::Integer;
    for (int v = low; v <= high; ++v) p.levels.push_back(static_cast<double>(v));
    if (!p.levels.empty()) {
        p.low = p.levels.front();
        p.high = p.levels.back();
    }
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::binary(std::string name) { return integer(std::move(name), 0, 1); }

ParameterSpec ParameterSpec::discrete(std::string name, std::vector<double> levels) {
    ParameterSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::Discrete;
    p.levels = std::move(levels);
    if (!p.levels.empty()) {
        p.low = p.levels.front();
        p.high = p.levels.back();
    }
    p.validate();
    return p;
}

ParameterSpec ParameterSpec::categorical(std::string name, std::vector<std::string> categories) {
    ParameterSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::Categorical;
    p.categories = std::move(categories);
    p.validate();
    return p;
}

void ParameterSpec::validate() const {
    switch (kind) {
        case ParamKind::Continuous:
            if (!(low < high)) throw DomainError("parameter '" + name + "': continuous bounds require low < high");
            break;
        case ParamKind::Integer: {
            if (levels.size() < 2) throw DomainError("parameter '" + name + "': integer needs >= 2 levels");
            for (std::size_t i = 1; i < levels.size(); ++i) {
                if (levels[i] != levels[i - 1] + 1.0)
                    throw DomainError("parameter '" + name + "': integer levels must be consecutive");
            }
            break;
        }
        case ParamKind::Discrete: {
            if (levels.size() < 2) throw DomainError("parameter '" + name + "': discrete needs >= 2 levels");
            for (std::size_t i = 1; i < levels.size(); ++i) {
                if (!(levels[i] > levels[i - 1]))
                    throw DomainError("parameter '" + name + "': discrete levels must be strictly increasing");
            }
            break;
        }
        case ParamKind::Categorical:
            if (categories.size() < 2) throw DomainError("parameter '" + name + "': categorical needs >= 2 categories");
            break;
    }
}

double ParameterSpec::anchor(std::size_t i) const {
    if (kind == ParamKind::Categorical) return static_cast<double>(i);
    return (levels.at(i) - low) / (high - low);
}

std::size_t ParameterSpec::nearest_level(double u) const {
    std::size_t best = 0;
    double best_gap = std::abs(u - anchor(0));
    for (std::size_t i = 1; i < level_count(); ++i) {
        const double gap = std::abs(u - anchor(i));
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return best;
}

SearchSpace::SearchSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
    std::set<std::string> seen;
    for (const auto& p : params_) {
        p.validate();
        if (!seen.insert(p.name).second) throw DomainError("duplicate parameter name '" + p.name + "'");
    }
}

bool SearchSpace::has_continuous() const {
    return std::any_of(params_.begin(), params_.end(),
                       [](const auto& p) { return p.kind == ParamKind::Continuous; });
}

bool SearchSpace::has_categorical() const {
    return std::any_of(params_.begin(), params_.end(),
                       [](const auto& p) { return p.kind == ParamKind::Categorical; });
}

bool SearchSpace::has_discrete() const {
    return std::any_of(params_.begin(), params_.end(),
                       [](const auto& p) { return p.kind == ParamKind::Discrete; });
}

std::vector<std::size_t> SearchSpace::dims_of(ParamKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].kind == kind) out.push_back(i);
    return out;
}

std::vector<std::size_t> SearchSpace::non_categorical_dims() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].kind != ParamKind::Categorical) out.push_back(i);
    return out;
}

void SearchSpace::validate_candidate(const Candidate& c) const {
    if (c.values.size() != params_.size())
        throw DomainError("candidate has " + std::to_string(c.values.size()) + " values, space has " +
                          std::to_string(params_.size()) + " dimensions");
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& p = params_[i];
        const double v = c.values[i];
        switch (p.kind) {
            case ParamKind::Continuous:
                if (!(v >= p.low && v <= p.high))
                    throw DomainError("dimension '" + p.name + "': value out of bounds");
                break;
            case ParamKind::Integer:
            case ParamKind::Discrete: {
                const bool hit = std::any_of(p.levels.begin(), p.levels.end(),
                                             [v](double l) { return std::abs(l - v) <= kAnchorTol; });
                if (!hit) throw DomainError("dimension '" + p.name + "': value is not an allowed level");
                break;
            }
            case ParamKind::Categorical: {
                const double r = std::round(v);
                if (std::abs(v - r) > kAnchorTol || r < 0.0 || r >= static_cast<double>(p.categories.size()))
                    throw DomainError("dimension '" + p.name + "': invalid category index");
                break;
            }
        }
    }
}

NormalizedPoint SearchSpace::normalize(const Candidate& c) const {
    validate_candidate(c);
    NormalizedPoint out;
    out.coords.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& p = params_[i];
        if (p.kind == ParamKind::Categorical) {
            out.coords[i] = std::round(c.values[i]);
        } else {
            out.coords[i] = (c.values[i] - p.low) / (p.high - p.low);
        }
    }
    return out;
}

Candidate SearchSpace::denormalize(const NormalizedPoint& p) const {
    if (p.coords.size() != params_.size()) throw DomainError("normalized point has wrong dimension");
    Candidate out;
    out.values.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& spec = params_[i];
        const double u = p.coords[i];
        switch (spec.kind) {
            case ParamKind::Continuous:
                if (u < -kAnchorTol || u > 1.0 + kAnchorTol)
                    throw DomainError("dimension '" + spec.name + "': coordinate outside [0,1]");
                out.values[i] = spec.low + std::clamp(u, 0.0, 1.0) * (spec.high - spec.low);
                break;
            case ParamKind::Integer:
            case ParamKind::Discrete: {
                const std::size_t idx = spec.nearest_level(u);
                if (std::abs(u - spec.anchor(idx)) > kAnchorTol)
                    throw DomainError("dimension '" + spec.name +
                                      "': coordinate is not on a level anchor (go through the sampler, not rounding)");
                out.values[i] = spec.levels[idx];
                break;
            }
            case ParamKind::Categorical: {
                const double r = std::round(u);
                if (std::abs(u - r) > kAnchorTol || r < 0.0 || r >= static_cast<double>(spec.categories.size()))
                    throw DomainError("dimension '" + spec.name + "': invalid category index");
                out.values[i] = r;
                break;
            }
        }
    }
    return out;
}

std::size_t SearchSpace::support_size() const {
    std::size_t total = 1;
    for (const auto& p : params_) {
        if (p.kind == ParamKind::Continuous)
            throw UnsupportedError("enumerate_support: space contains continuous dimension '" + p.name + "'");
        total *= p.level_count();
    }
    return total;
}

std::vector<Candidate> SearchSpace::enumerate_support(std::size_t cap) const {
    const std::size_t total = support_size();
    if (total > cap)
        throw UnsupportedError("enumerate_support: support size " + std::to_string(total) +
                               " exceeds cap " + std::to_string(cap));
    std::vector<Candidate> out;
    out.reserve(total);
    Candidate cur;
    cur.values.resize(params_.size());
    // odometer over level indices, first dimension most significant
    std::vector<std::size_t> idx(params_.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const auto& p = params_[i];
            cur.values[i] = p.kind == ParamKind::Categorical ? static_cast<double>(idx[i]) : p.levels[idx[i]];
        }
        out.push_back(cur);
        for (std::size_t i = params_.size(); i-- > 0;) {
            if (++idx[i] < params_[i].level_count()) break;
            idx[i] = 0;
        }
    }
    return out;
}

double SearchSpace::distance(const Candidate& a, const Candidate& b) const {
    const NormalizedPoint pa = normalize(a);
    const NormalizedPoint pb = normalize(b);
    double sq = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].kind == ParamKind::Categorical) {
            if (std::round(pa.coords[i]) != std::round(pb.coords[i])) sq += 1.0;
        } else {
            const double d = pa.coords[i] - pb.coords[i];
            sq += d * d;
        }
    }
    return std::sqrt(sq);
}

}  // namespace mixbo
