#include "mixbo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mixbo {

namespace {
constexpr double kBsShift = 3.38763191;
constexpr double kBsOffset = 12.4180436;

const char* bundled_dust1() {
    static const char* text =
#include "dust1_plateaus.inc"
        ;
    return text;
}
const char* bundled_dust2() {
    static const char* text =
#include "dust2_plateaus.inc"
        ;
    return text;
}
}  // namespace

// ---- Butternut-squash-style quartic ----------------------------------------

double bs_raw(const std::vector<double>& x) {
    const auto d = static_cast<double>(x.size());
    double quartic = 0.0;
    for (const double xi : x) quartic += 0.15 * xi * xi * xi * xi - 3.0 * xi * xi + 3.0 * xi;
    double asym = 0.0;
    // odd coordinates (1-based) carry the asymmetry term
    for (std::size_t k = 0; 2 * k < x.size(); ++k) {
        const double t = x[2 * k] + kBsShift;
        asym += 0.5 * t * t;
    }
    return (quartic + asym) / (2.0 * d) + kBsOffset;
}

BsVariant BsVariant::make(int dim, std::string pattern) {
    if (dim < 1 || static_cast<int>(pattern.size()) != dim)
        throw DomainError("BsVariant: pattern length must equal dim");
    for (char c : pattern)
        if (c != 'c' && c != 'i' && c != 'd')
            throw DomainError("BsVariant: pattern characters must be from {c,i,d}");
    return {dim, std::move(pattern)};
}

std::vector<BsVariant> BsVariant::grid() {
    std::vector<BsVariant> out;
    for (int d = 2; d <= 6; ++d) {
        const int half = d / 2;
        out.push_back(make(d, std::string(half, 'c') + std::string(d - half, 'i')));
        out.push_back(make(d, std::string(half, 'i') + std::string(d - half, 'd')));
        out.push_back(make(d, std::string(d, 'i')));
        out.push_back(make(d, std::string(d, 'd')));
    }
    return out;
}

SearchSpace BsVariant::space() const {
    std::vector<ParameterSpec> params;
    for (int i = 0; i < dim; ++i) {
        const std::string name = "x" + std::to_string(i + 1);
        switch (pattern[static_cast<std::size_t>(i)]) {
            case 'c': params.push_back(ParameterSpec::continuous(name, -5.0, 5.0)); break;
            case 'i': params.push_back(ParameterSpec::integer(name, 0, 10)); break;
            case 'd': params.push_back(ParameterSpec::discrete(name, {0, 1, 3, 4, 7, 9})); break;
        }
    }
    return SearchSpace(std::move(params));
}

std::pair<int, int> BsVariant::budget() const {
    switch (dim) {
        case 2: return {5, 35};
        case 3: return {10, 80};
        case 4: return {20, 100};
        case 5: return {40, 160};
        case 6: return {60, 220};
        default: throw DomainError("BsVariant: no budget defined for dim " + std::to_string(dim));
    }
}

double bs_eval(const BsVariant& variant, const Candidate& c) {
    const SearchSpace sp = variant.space();
    sp.validate_candidate(c);
    std::vector<double> x(c.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        // ordinal encodings 0..10 / {0,1,3,4,7,9} live on the shifted axis
        x[i] = variant.pattern[i] == 'c' ? c.values[i] : c.values[i] - 5.0;
    }
    return bs_raw(x);
}

// ---- DUST step landscapes ---------------------------------------------------

DustSpec DustSpec::bundled(const std::string& name) {
    if (name == "dust1") return parse(bundled_dust1());
    if (name == "dust2") return parse(bundled_dust2());
    throw DomainError("unknown bundled landscape '" + name + "'");
}

DustSpec DustSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open plateau table: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

DustSpec DustSpec::parse(const std::string& text) {
    DustSpec spec;
    std::istringstream in(text);
    std::string line;
    Slice* cur = nullptr;
    bool have_version = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "version") {
            int v;
            ls >> v;
            if (v != 1) throw DomainError("plateau table: unsupported version");
            have_version = true;
        } else if (tok == "name") {
            ls >> spec.name;
        } else if (tok == "continuous") {
            ls >> spec.cont_low >> spec.cont_high;
        } else if (tok == "binary") {
            // fixed {0,1}; values ignored
        } else if (tok == "discrete") {
            double v;
            while (ls >> v) spec.discrete_levels.push_back(v);
        } else if (tok == "global_min") {
            ls >> spec.global_min;
        } else if (tok == "slice") {
            Slice s;
            ls >> s.binary >> s.discrete;
            spec.slices.push_back(s);
            cur = &spec.slices.back();
        } else if (tok == "seg") {
            if (!cur) throw DomainError("plateau table: seg before slice");
            Segment seg{};
            if (!(ls >> seg.x0 >> seg.x1 >> seg.y0)) throw DomainError("plateau table: bad segment");
            if (ls >> seg.y1) {
                seg.sloped = seg.y1 != seg.y0;
            } else {
                seg.y1 = seg.y0;
                seg.sloped = false;
            }
            cur->segments.push_back(seg);
        } else {
            throw DomainError("plateau table: unknown directive '" + tok + "'");
        }
    }
    if (!have_version) throw DomainError("plateau table: missing version line");
    spec.validate();
    return spec;
}

void DustSpec::validate() const {
    if (discrete_levels.size() < 2) throw DomainError("plateau table: need >= 2 discrete levels");
    if (!(cont_low < cont_high)) throw DomainError("plateau table: bad continuous bounds");
    if (slices.size() != 2 * discrete_levels.size())
        throw DomainError("plateau table: expected one slice per (binary, discrete) pair");
    int global_cells = 0;
    for (const auto& s : slices) {
        if (s.binary != 0 && s.binary != 1) throw DomainError("plateau table: binary level must be 0/1");
        if (!std::count(discrete_levels.begin(), discrete_levels.end(), s.discrete))
            throw DomainError("plateau table: slice references unknown discrete level");
        double x = cont_low;
        for (const auto& seg : s.segments) {
            if (std::abs(seg.x0 - x) > 1e-9) throw DomainError("plateau table: segments must tile the range");
            if (!(seg.x1 > seg.x0)) throw DomainError("plateau table: empty segment");
            if (std::min(seg.y0, seg.y1) < global_min)
                throw DomainError("plateau table: segment dips below the declared global minimum");
            if (!seg.sloped && seg.y0 == global_min) ++global_cells;
            x = seg.x1;
        }
        if (std::abs(x - cont_high) > 1e-9) throw DomainError("plateau table: segments must reach the upper bound");
    }
    if (global_cells != 1) throw DomainError("plateau table: exactly one flat global-minimum cell required");
}

SearchSpace DustSpec::space() const {
    std::vector<ParameterSpec> params;
    params.push_back(ParameterSpec::continuous("x", cont_low, cont_high));
    params.push_back(ParameterSpec::binary("b"));
    params.push_back(ParameterSpec::discrete("d", discrete_levels));
    return SearchSpace(std::move(params));
}

std::pair<int, int> DustSpec::budget() const {
    if (name == "dust1") return {6, 94};
    if (name == "dust2") return {12, 128};
    return {6, 94};
}

double dust_eval(const DustSpec& spec, const Candidate& c) {
    spec.space().validate_candidate(c);
    const double x = c.values[0];
    const int b = static_cast<int>(std::llround(c.values[1]));
    const double d = c.values[2];
    for (const auto& s : spec.slices) {
        if (s.binary != b || std::abs(s.discrete - d) > 1e-9) continue;
        for (std::size_t k = 0; k < s.segments.size(); ++k) {
            const auto& seg = s.segments[k];
            const bool last = k + 1 == s.segments.size();
            if (x >= seg.x0 && (x < seg.x1 || (last && x <= seg.x1 + 1e-12))) {
                if (!seg.sloped) return seg.y0;
                const double t = (x - seg.x0) / (seg.x1 - seg.x0);
                return seg.y0 + t * (seg.y1 - seg.y0);
            }
        }
    }
    throw DomainError("dust_eval: point not covered by the plateau table");
}

// ---- brute force oracle ------------------------------------------------------

Optimum brute_force_optimum(const Objective& f, const SearchSpace& space, int grid_density, std::size_t cap) {
    std::vector<std::size_t> cont_dims = space.dims_of(ParamKind::Continuous);
    // cartesian product over the non-continuous dims
    std::vector<std::size_t> nc_dims;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.param(i).kind == ParamKind::Continuous) continue;
        nc_dims.push_back(i);
        combos *= space.param(i).level_count();
    }
    std::size_t grid_total = combos;
    for (std::size_t k = 0; k < cont_dims.size(); ++k) grid_total *= static_cast<std::size_t>(grid_density);
    if (grid_total > cap)
        throw UnsupportedError("brute_force_optimum: grid of " + std::to_string(grid_total) +
                               " points exceeds cap");

    Optimum best;
    best.value = std::numeric_limits<double>::infinity();
    best.y_min = std::numeric_limits<double>::infinity();
    best.y_max = -std::numeric_limits<double>::infinity();

    Candidate c;
    c.values.resize(space.size());
    std::vector<std::size_t> idx(nc_dims.size(), 0);
    std::vector<int> gidx(cont_dims.size(), 0);

    const std::size_t cont_combos =
        cont_dims.empty() ? 1
                          : static_cast<std::size_t>(std::pow(static_cast<double>(grid_density),
                                                              static_cast<double>(cont_dims.size())));
    for (std::size_t n = 0; n < combos; ++n) {
        for (std::size_t k = 0; k < nc_dims.size(); ++k) {
            const auto& p = space.param(nc_dims[k]);
            c.values[nc_dims[k]] =
                p.kind == ParamKind::Categorical ? static_cast<double>(idx[k]) : p.levels[idx[k]];
        }
        std::fill(gidx.begin(), gidx.end(), 0);
        for (std::size_t g = 0; g < cont_combos; ++g) {
            for (std::size_t k = 0; k < cont_dims.size(); ++k) {
                const auto& p = space.param(cont_dims[k]);
                c.values[cont_dims[k]] =
                    p.low + (p.high - p.low) * static_cast<double>(gidx[k]) / (grid_density - 1.0);
            }
            const double v = f(c);
            best.y_min = std::min(best.y_min, v);
            best.y_max = std::max(best.y_max, v);
            if (v < best.value) {
                best.value = v;
                best.arg = c;
            }
            for (std::size_t k = cont_dims.size(); k-- > 0;) {
                if (++gidx[k] < grid_density) break;
                gidx[k] = 0;
            }
        }
        for (std::size_t k = nc_dims.size(); k-- > 0;) {
            if (++idx[k] < space.param(nc_dims[k]).level_count()) break;
            idx[k] = 0;
        }
    }

    // coordinate-descent refinement on the continuous dims around the grid argmin
    if (!cont_dims.empty()) {
        Candidate cur = best.arg;
        double step0 = 0.0;
        for (const auto dim : cont_dims) {
            const auto& p = space.param(dim);
            step0 = std::max(step0, (p.high - p.low) / (grid_density - 1.0));
        }
        for (double step = step0; step > 1e-12; step *= 0.5) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (const auto dim : cont_dims) {
                    const auto& p = space.param(dim);
                    for (const double sgn : {-1.0, 1.0}) {
                        Candidate trial = cur;
                        trial.values[dim] = std::clamp(trial.values[dim] + sgn * step, p.low, p.high);
                        const double v = f(trial);
                        if (v < best.value - 1e-15) {
                            best.value = v;
                            best.arg = trial;
                            cur = trial;
                            improved = true;
                        }
                    }
                }
            }
        }
        best.y_min = std::min(best.y_min, best.value);
    }
    return best;
}

}  // namespace mixbo
