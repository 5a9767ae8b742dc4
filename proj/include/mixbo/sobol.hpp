#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixbo/common.hpp"
#include "mixbo/search_space.hpp"

namespace mixbo {

/// Direction-number table for the Sobol sequence.  The bundled table covers
/// dimensions up to 16; a custom table can be loaded from a file in the
/// documented text format (dim, s, a, m_1..m_s per line).
class SobolDirections {
public:
    static const SobolDirections& bundled();
    static SobolDirections from_file(const std::string& path);
    static SobolDirections parse(const std::string& text);

    std::size_t max_dim() const { return 1 + rows_.size(); }
    /// 32-bit direction integers V[0..31] for 1-based dimension `dim`.
    std::vector<std::uint32_t> directions(std::size_t dim) const;

private:
    struct Row {
        std::size_t dim, s;
        std::uint32_t a;
        std::vector<std::uint32_t> m;
    };
    std::vector<Row> rows_;
};

/// First n points of the Sobol sequence in Gray-code order with the zero
/// point skipped, after additionally skipping `skip` points.  Values lie
/// in [0,1)^dim.
std::vector<std::vector<double>> sobol_sequence(std::size_t dim, std::size_t n, std::size_t skip = 0,
                                                const SobolDirections& dirs = SobolDirections::bundled());

/// Sobol design over a search space: continuous coordinates stay as drawn,
/// ordinal coordinates snap to the nearest level anchor, categorical
/// coordinates stratify into category indices.  Seed k skips k*n points.
std::vector<Candidate> sobol_candidates(const SearchSpace& space, std::size_t n, std::size_t skip = 0);

}  // namespace mixbo
