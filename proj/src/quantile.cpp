#include "hazardband/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hazardband {

std::size_t quantile_rank(std::size_t count, double level) {
  if (count == 0) throw std::invalid_argument("quantile of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  // The small offset keeps products like 0.95 * 1000 from rounding up a rank.
  const double raw = std::ceil(level * static_cast<double>(count) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, count);
}

double order_statistic_quantile(std::vector<double> draws, double level) {
  const std::size_t rank = quantile_rank(draws.size(), level);
  auto nth = draws.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(draws.begin(), nth, draws.end());
  return *nth;
}

double order_statistic_quantile(std::span<const double> matrix, std::size_t stride, std::size_t column,
                                double level) {
  std::vector<double> col;
  col.reserve(matrix.size() / stride);
  for (std::size_t i = column; i < matrix.size(); i += stride) col.push_back(matrix[i]);
  return order_statistic_quantile(std::move(col), level);
}

}  // namespace hazardband
