#pragma once

#include <cstddef>
#include <vector>

#include "defmag/grid.hpp"

namespace defmag {

/// Laplacian pyramid of one grid. levels[0] is the finest detail band and
/// levels.back() the coarsest Gaussian level. Level k has dimensions
/// ceil(level k-1 / 2).
struct Pyramid {
  std::vector<Grid> levels;

  std::size_t size() const { return levels.size(); }
};

/// Largest level count whose coarsest level keeps both dimensions >= 2.
std::size_t max_pyramid_levels(std::size_t rows, std::size_t cols);

/// Separable 5-tap binomial blur with edge replication.
Grid blur(const Grid& in);
/// Blur then keep even rows and columns.
Grid reduce(const Grid& in);
/// Burt-Adelson expansion to (rows, cols); preserves constant grids.
Grid expand(const Grid& in, std::size_t rows, std::size_t cols);

/// Throws UsageError naming the maximum feasible count when `levels` is 0
/// or too large for the grid.
Pyramid build_pyramid(const Grid& grid, std::size_t levels);

/// Inverse of build_pyramid. Throws DataError when adjacent levels do not
/// follow the ceil-halving rule.
Grid collapse_pyramid(const Pyramid& pyramid);

}  // namespace defmag
