#include "defmag/features.hpp"

#include <charconv>
#include <string>

#include "defmag/error.hpp"

namespace defmag {

PoolGrid parse_pool(std::string_view text) {
  const auto x = text.find_first_of("xX");
  PoolGrid pool;
  auto parse = [&](std::string_view s, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && out > 0;
  };
  if (x == std::string_view::npos || !parse(text.substr(0, x), pool.angle_blocks) ||
      !parse(text.substr(x + 1), pool.radius_blocks)) {
    throw UsageError("pool must look like 20x5, got '" + std::string(text) + "'");
  }
  return pool;
}

Eigen::VectorXd mean_deformation(const DsfSequence& seq) {
  if (seq.frames.empty()) throw DataError("mean deformation of an empty sequence");
  seq.validate();
  const auto n = static_cast<Eigen::Index>(seq.frames.front().grid.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& f : seq.frames) {
    mean += Eigen::Map<const Eigen::VectorXd>(f.grid.values().data(), n);
  }
  mean /= static_cast<double>(seq.frames.size());
  return mean;
}

std::vector<Eigen::VectorXd> frame_features(const DsfSequence& seq, const PoolGrid& pool) {
  seq.validate();
  const auto rows = seq.num_curves(), cols = seq.samples();
  if (pool.angle_blocks == 0 || pool.radius_blocks == 0 || pool.angle_blocks > rows ||
      pool.radius_blocks > cols) {
    throw UsageError("pool " + std::to_string(pool.angle_blocks) + "x" +
                     std::to_string(pool.radius_blocks) + " does not fit a " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  auto bounds = [](std::size_t blocks, std::size_t n) {
    std::vector<std::size_t> b(blocks + 1);
    for (std::size_t i = 0; i <= blocks; ++i) b[i] = i * n / blocks;
    return b;
  };
  const auto rb = bounds(pool.angle_blocks, rows);
  const auto cb = bounds(pool.radius_blocks, cols);

  std::vector<Eigen::VectorXd> out;
  out.reserve(seq.num_frames());
  for (const auto& f : seq.frames) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(pool.angle_blocks * pool.radius_blocks));
    for (std::size_t a = 0; a < pool.angle_blocks; ++a) {
      for (std::size_t r = 0; r < pool.radius_blocks; ++r) {
        double s = 0.0;
        for (auto i = rb[a]; i < rb[a + 1]; ++i) {
          for (auto j = cb[r]; j < cb[r + 1]; ++j) s += f.grid(i, j);
        }
        const auto count = (rb[a + 1] - rb[a]) * (cb[r + 1] - cb[r]);
        v[static_cast<Eigen::Index>(a * pool.radius_blocks + r)] = s / static_cast<double>(count);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace defmag
