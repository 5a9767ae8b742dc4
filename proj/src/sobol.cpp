#include "mixbo/sobol.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mixbo {

namespace {
constexpr int kBits = 32;

const char* bundled_text() {
    static const char* text =
#include "sobol_directions.inc"
        ;
    return text;
}
}  // namespace

const SobolDirections& SobolDirections::bundled() {
    static const SobolDirections table = parse(bundled_text());
    return table;
}

SobolDirections SobolDirections::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open direction-number file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

SobolDirections SobolDirections::parse(const std::string& text) {
    SobolDirections out;
    std::istringstream in(text);
    std::string line;
    std::size_t expected = 2;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Row row;
        if (!(ls >> row.dim >> row.s >> row.a)) continue;
        if (row.dim != expected)
            throw DomainError("direction table: expected dimension " + std::to_string(expected));
        row.m.resize(row.s);
        for (auto& m : row.m) {
            if (!(ls >> m) || m % 2 == 0) throw DomainError("direction table: m_i must be odd integers");
        }
        out.rows_.push_back(std::move(row));
        ++expected;
    }
    if (out.rows_.empty()) throw DomainError("direction table: no entries");
    return out;
}

std::vector<std::uint32_t> SobolDirections::directions(std::size_t dim) const {
    if (dim == 0 || dim > max_dim())
        throw UnsupportedError("Sobol dimension " + std::to_string(dim) + " exceeds direction table (max " +
                               std::to_string(max_dim()) + ")");
    std::vector<std::uint32_t> V(kBits + 1, 0);
    if (dim == 1) {
        for (int k = 1; k <= kBits; ++k) V[k] = 1u << (kBits - k);
        return V;
    }
    const Row& row = rows_[dim - 2];
    const int s = static_cast<int>(row.s);
    for (int k = 1; k <= s && k <= kBits; ++k) V[k] = row.m[k - 1] << (kBits - k);
    for (int k = s + 1; k <= kBits; ++k) {
        V[k] = V[k - s] ^ (V[k - s] >> s);
        for (int i = 1; i < s; ++i) {
            if ((row.a >> (s - 1 - i)) & 1u) V[k] ^= V[k - i];
        }
    }
    return V;
}

std::vector<std::vector<double>> sobol_sequence(std::size_t dim, std::size_t n, std::size_t skip,
                                                const SobolDirections& dirs) {
    std::vector<std::vector<std::uint32_t>> V;
    V.reserve(dim);
    for (std::size_t j = 1; j <= dim; ++j) V.push_back(dirs.directions(j));

    std::vector<std::uint32_t> x(dim, 0);
    std::vector<std::vector<double>> out;
    out.reserve(n);
    const std::size_t total = skip + n;
    for (std::size_t i = 1; i <= total; ++i) {
        // Gray-code update: flip by the direction of the lowest zero bit of i-1.
        std::size_t c = 1;
        std::size_t v = i - 1;
        while (v & 1u) {
            v >>= 1;
            ++c;
        }
        for (std::size_t j = 0; j < dim; ++j) x[j] ^= V[j][c];
        if (i > skip) {
            std::vector<double> pt(dim);
            for (std::size_t j = 0; j < dim; ++j) pt[j] = x[j] / std::pow(2.0, kBits);
            out.push_back(std::move(pt));
        }
    }
    return out;
}

std::vector<Candidate> sobol_candidates(const SearchSpace& space, std::size_t n, std::size_t skip) {
    const auto raw = sobol_sequence(space.size(), n, skip);
    std::vector<Candidate> out;
    out.reserve(n);
    for (const auto& u : raw) {
        Candidate c;
        c.values.resize(space.size());
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto& p = space.param(i);
            switch (p.kind) {
                case ParamKind::Continuous:
                    c.values[i] = p.low + u[i] * (p.high - p.low);
                    break;
                case ParamKind::Integer:
                case ParamKind::Discrete:
                    c.values[i] = p.levels[p.nearest_level(u[i])];
                    break;
                case ParamKind::Categorical: {
                    auto idx = static_cast<std::size_t>(u[i] * static_cast<double>(p.categories.size()));
                    if (idx >= p.categories.size()) idx = p.categories.size() - 1;
                    c.values[i] = static_cast<double>(idx);
                    break;
                }
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace mixbo
