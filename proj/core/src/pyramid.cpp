#include "defmag/pyramid.hpp"

#include <algorithm>
#include <string>

#include "defmag/error.hpp"

namespace defmag {
namespace {

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

std::size_t half_up(std::size_t n) { return (n + 1) / 2; }

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

// Weights of the expansion filter for fine index i: even i sits on a coarse
// sample (taps 1,6,1 / 8), odd i between two (taps 4,4 / 8).
template <class F>
void expand_taps(std::size_t i, F&& emit) {
  const auto j = static_cast<std::ptrdiff_t>(i / 2);
  if (i % 2 == 0) {
    emit(j - 1, 1.0 / 8);
    emit(j, 6.0 / 8);
    emit(j + 1, 1.0 / 8);
  } else {
    emit(j, 4.0 / 8);
    emit(j + 1, 4.0 / 8);
  }
}

}  // namespace

std::size_t max_pyramid_levels(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) return rows >= 1 && cols >= 1 ? 1 : 0;
  std::size_t levels = 1;
  while (half_up(rows) >= 2 && half_up(cols) >= 2) {
    rows = half_up(rows);
    cols = half_up(cols);
    ++levels;
  }
  return levels;
}

Grid blur(const Grid& in) {
  const auto rows = in.rows(), cols = in.cols();
  Grid tmp(rows, cols), out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) {
        s += kBinomial[k + 2] * in(r, clamp_index(static_cast<std::ptrdiff_t>(c) + k, cols));
      }
      tmp(r, c) = s;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) {
        s += kBinomial[k + 2] * tmp(clamp_index(static_cast<std::ptrdiff_t>(r) + k, rows), c);
      }
      out(r, c) = s;
    }
  }
  return out;
}

Grid reduce(const Grid& in) {
  const Grid b = blur(in);
  Grid out(half_up(in.rows()), half_up(in.cols()));
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = b(2 * r, 2 * c);
  }
  return out;
}

Grid expand(const Grid& in, std::size_t rows, std::size_t cols) {
  if (half_up(rows) != in.rows() || half_up(cols) != in.cols()) {
    throw DataError("cannot expand " + std::to_string(in.rows()) + "x" + std::to_string(in.cols()) +
                    " to " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Grid tmp(in.rows(), cols), out(rows, cols);
  for (std::size_t r = 0; r < in.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      expand_taps(c, [&](std::ptrdiff_t j, double w) { s += w * in(r, clamp_index(j, in.cols())); });
      tmp(r, c) = s;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      expand_taps(r, [&](std::ptrdiff_t j, double w) { s += w * tmp(clamp_index(j, in.rows()), c); });
      out(r, c) = s;
    }
  }
  return out;
}

Pyramid build_pyramid(const Grid& grid, std::size_t levels) {
  const auto max_levels = max_pyramid_levels(grid.rows(), grid.cols());
  if (levels < 1 || levels > max_levels) {
    throw UsageError("a " + std::to_string(grid.rows()) + "x" + std::to_string(grid.cols()) +
                     " grid supports between 1 and " + std::to_string(max_levels) +
                     " pyramid levels, got " + std::to_string(levels));
  }
  Pyramid p;
  p.levels.reserve(levels);
  Grid current = grid;
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    Grid coarse = reduce(current);
    const Grid up = expand(coarse, current.rows(), current.cols());
    auto detail = current.values();
    const auto u = up.values();
    for (std::size_t i = 0; i < detail.size(); ++i) detail[i] -= u[i];
    p.levels.push_back(std::move(current));
    current = std::move(coarse);
  }
  p.levels.push_back(std::move(current));
  return p;
}

Grid collapse_pyramid(const Pyramid& pyramid) {
  if (pyramid.levels.empty()) throw DataError("cannot collapse an empty pyramid");
  Grid current = pyramid.levels.back();
  for (std::size_t k = pyramid.levels.size() - 1; k-- > 0;) {
    const Grid& detail = pyramid.levels[k];
    Grid up = expand(current, detail.rows(), detail.cols());
    auto u = up.values();
    const auto d = detail.values();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += d[i];
    current = std::move(up);
  }
  return current;
}

}  // namespace defmag
