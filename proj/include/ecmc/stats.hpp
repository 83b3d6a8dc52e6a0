#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ecmc/common.hpp"

namespace ecmc {

// Percentile with linear interpolation between order statistics: for
// q in [0, 1] over n sorted values, the rank position is q * (n - 1).
inline double percentile_linear(const std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty()) {
        throw ContractViolation("percentile of an empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw ContractViolation("percentile rank outside [0, 1]");
    }
    const std::size_t n = sorted_values.size();
    const double position = q * static_cast<double>(n - 1);
    const auto lower = static_cast<std::size_t>(std::floor(position));
    if (lower + 1 >= n) {
        return sorted_values[n - 1];
    }
    const double fraction = position - static_cast<double>(lower);
    return sorted_values[lower] + fraction * (sorted_values[lower + 1] - sorted_values[lower]);
}

// Evenly spaced interior percentile boundaries: count=3 gives quartile edges,
// count=7 gives octile edges.
inline std::vector<double> interior_percentile_edges(const std::vector<double>& sorted_values,
                                                     int count) {
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) {
        edges.push_back(percentile_linear(
            sorted_values, static_cast<double>(k) / static_cast<double>(count + 1)));
    }
    return edges;
}

// Bin index in [0, edges.size()]: the number of edges strictly below the
// value. Values equal to a collapsed edge fall in the lower bin, so a
// degenerate sample maps entirely to bin 0.
inline int bin_by_edges(double value, const std::vector<double>& edges) {
    int bin = 0;
    for (double edge : edges) {
        if (edge < value) {
            ++bin;
        }
    }
    return bin;
}

}  // namespace ecmc
