#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "defmag/dsf.hpp"

namespace defmag {

/// Block layout for spatial pooling: `angle_blocks` x `radius_blocks`.
struct PoolGrid {
  std::size_t angle_blocks = 20;
  std::size_t radius_blocks = 5;
};

/// Parses "AxR", e.g. "20x5". Throws UsageError.
PoolGrid parse_pool(std::string_view text);

/// Time average of chi, flattened angle-major. Throws DataError on an
/// empty sequence.
Eigen::VectorXd mean_deformation(const DsfSequence& seq);

/// Per-frame block means. Block a spans rows [floor(a*R/A), floor((a+1)*R/A)),
/// so every block is non-empty when the pool fits the grid.
std::vector<Eigen::VectorXd> frame_features(const DsfSequence& seq, const PoolGrid& pool);

}  // namespace defmag
