#pragma once

#include <string>
#include <vector>

#include "mixbo/common.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

/// One variant of the synthetic quartic benchmark: a per-dimension type
/// pattern over {c, i, d}.  Continuous dimensions live on [-5, 5]; ordinal
/// dimensions are encoded 0..10 (integer) or on the level set
/// {0, 1, 3, 4, 7, 9} (discrete) and map to raw coordinates via v - 5.
struct BsVariant {
    int dim = 2;
    std::string pattern = "ci";

    static BsVariant make(int dim, std::string pattern);
    /// The benchmark grid: for every dimension 2..6 the four families
    /// half-continuous/half-integer, integer+discrete, fully integer and
    /// fully discrete (20 variants total).
    static std::vector<BsVariant> grid();

    SearchSpace space() const;
    std::string id() const { return "bs" + std::to_string(dim) + "_" + pattern; }
    /// (initial points, iteration budget) for this dimensionality.
    std::pair<int, int> budget() const;
};

double bs_eval(const BsVariant& variant, const Candidate& c);
/// The quartic objective on raw coordinates (all dimensions continuous).
double bs_raw(const std::vector<double>& x);

/// Step-landscape benchmark assembled from a plateau table: one continuous
/// dimension, one binary dimension, one discrete dimension.  Landscapes are
/// piecewise constant in the continuous coordinate within each
/// (binary, discrete) slice except for designated sloped segments.
struct DustSpec {
    struct Segment {
        double x0, x1, y0, y1;
        bool sloped;
    };
    struct Slice {
        int binary;
        double discrete;
        std::vector<Segment> segments;
    };

    std::string name;
    double cont_low = 0.0, cont_high = 1.0;
    std::vector<double> discrete_levels;
    std::vector<Slice> slices;
    double global_min = -30.0;

    static DustSpec bundled(const std::string& name);  // "dust1" or "dust2"
    static DustSpec from_file(const std::string& path);
    static DustSpec parse(const std::string& text);

    SearchSpace space() const;
    std::pair<int, int> budget() const;
    void validate() const;
};

double dust_eval(const DustSpec& spec, const Candidate& c);

/// Exhaustive minimum: cartesian product of ordinal/categorical supports
/// crossed with a continuous grid, then a local refinement on the
/// continuous dimensions.
struct Optimum {
    Candidate arg;
    double value = 0.0;
    double y_min = 0.0;  // objective range over the domain, for tolerance checks
    double y_max = 0.0;
};

using Objective = std::function<double(const Candidate&)>;

Optimum brute_force_optimum(const Objective& f, const SearchSpace& space, int grid_density = 401,
                            std::size_t cap = 10000000);

}  // namespace mixbo
