#pragma once

#include <random>
#include <vector>

#include "ekm/motion.hpp"

namespace ekm::bench {

/// Smooth random walk, row-major length x dim.
inline std::vector<double> walk(std::size_t length, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 0.1);
    std::vector<double> v(length * dim, 0.0);
    for (std::size_t t = 1; t < length; ++t)
        for (std::size_t c = 0; c < dim; ++c) v[t * dim + c] = v[(t - 1) * dim + c] + step(rng);
    return v;
}

}  // namespace ekm::bench
