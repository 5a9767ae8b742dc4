#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mixbo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Invalid value for a search-space dimension, bad candidate, bad config.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear algebra / root finding failure that survived all recovery attempts.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation requested on a space it does not support (size caps, wrong kinds).
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// splitmix64; used to derive independent RNG streams from (seed, tag) pairs.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream * 0x100000001b3ull + 0xcbf29ce484222325ull));
}

}  // namespace mixbo
