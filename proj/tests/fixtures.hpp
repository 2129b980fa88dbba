#pragma once

#include <vector>

#include "opinion_lab/ensemble.hpp"

namespace fixtures {

// Equal masses at midpoint indices.
inline opinion_lab::Ensemble equal_mass(std::vector<double> x, double t = 0.0) {
    const std::size_t n = x.size();
    std::vector<double> a(n), m(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) a[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return {a, std::move(x), m, t};
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace fixtures
