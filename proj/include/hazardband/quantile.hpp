#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hazardband {

/// Order statistic at 1-based index ceil(level * B) of the sorted draws.
double order_statistic_quantile(std::vector<double> draws, double level);

/// Same, for a strided column of a row-major draw matrix.
double order_statistic_quantile(std::span<const double> matrix, std::size_t stride, std::size_t column,
                                double level);

/// 1-based index ceil(level * count), clamped to [1, count].
std::size_t quantile_rank(std::size_t count, double level);

}  // namespace hazardband
