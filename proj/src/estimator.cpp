#include "bsv/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bsv/errors.hpp"
#include "bsv/random.hpp"

namespace bsv {

namespace {

struct BlockSums {
  double a = 0;   // numerator terms (s1*s2, or n(n-1))
  double b = 0;   // channel-1 terms
  double c = 0;   // channel-2 terms
  double count = 0;
};

// Ratio-of-means over a set of blocks.
double ratio(const std::vector<BlockSums>& blocks) {
  double a = 0, b = 0, c = 0, count = 0;
  for (const auto& blk : blocks) {
    a += blk.a;
    b += blk.b;
    c += blk.c;
    count += blk.count;
  }
  const double mb = b / count;
  const double mc = c / count;
  if (mb == 0.0 || mc == 0.0) {
    throw EstimatorError("undefined estimator: zero mean signal");
  }
  return (a / count) / (mb * mc);
}

G2Estimate bootstrap(const std::vector<BlockSums>& blocks) {
  G2Estimate est;
  est.g2 = ratio(blocks);

  const auto n_blocks = blocks.size();
  if (n_blocks < 2) {
    est.std_error = 0.0;
    return est;
  }
  // Fixed internal stream keeps the estimator a pure function of its input.
  RngStream rng(0x5eedb007u, n_blocks);
  double sum = 0, sum2 = 0;
  int valid = 0;
  std::vector<BlockSums> resample(n_blocks);
  for (int r = 0; r < kBootstrapResamples; ++r) {
    for (std::size_t i = 0; i < n_blocks; ++i) {
      const auto pick = static_cast<std::size_t>(rng.u01() * n_blocks);
      resample[i] = blocks[pick < n_blocks ? pick : n_blocks - 1];
    }
    double g2;
    try {
      g2 = ratio(resample);
    } catch (const EstimatorError&) {
      continue;  // degenerate resample; skip
    }
    sum += g2;
    sum2 += g2 * g2;
    ++valid;
  }
  if (valid > 1) {
    const double mean = sum / valid;
    const double var = std::max(sum2 / valid - mean * mean, 0.0);
    est.std_error = std::sqrt(var * valid / (valid - 1.0));
  }
  return est;
}

template <typename TermFn>
std::vector<BlockSums> accumulate_blocks(std::int64_t count, TermFn&& term) {
  const auto n_blocks =
      static_cast<std::int64_t>(std::min<std::int64_t>(kBootstrapBlocks, count));
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  for (std::int64_t blk = 0; blk < n_blocks; ++blk) {
    const std::int64_t lo = blk * count / n_blocks;
    const std::int64_t hi = (blk + 1) * count / n_blocks;
    auto& sums = blocks[static_cast<std::size_t>(blk)];
    for (std::int64_t i = lo; i < hi; ++i) term(i, sums);
    sums.count = static_cast<double>(hi - lo);
  }
  return blocks;
}

}  // namespace

G2Estimate estimate_g2(const Eigen::ArrayXd& s1, const Eigen::ArrayXd& s2) {
  if (s1.size() != s2.size()) {
    throw std::invalid_argument("channel lengths differ");
  }
  if (s1.size() < 2) {
    throw std::invalid_argument("need at least 2 records");
  }
  const auto blocks = accumulate_blocks(s1.size(), [&](std::int64_t i, BlockSums& b) {
    b.a += s1[i] * s2[i];
    b.b += s1[i];
    b.c += s2[i];
  });
  return bootstrap(blocks);
}

G2Estimate estimate_g2(std::span<const PulseRecord> records) {
  return estimate_g2(records, NoiseCorrection{});
}

G2Estimate estimate_g2(std::span<const PulseRecord> records,
                       const NoiseCorrection& corr) {
  if (records.size() < 2) {
    throw std::invalid_argument("need at least 2 records");
  }
  const auto blocks = accumulate_blocks(
      static_cast<std::int64_t>(records.size()),
      [&](std::int64_t i, BlockSums& b) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        const double v1 = rec.s1 - corr.pedestal1;
        const double v2 = rec.s2 - corr.pedestal2;
        b.a += v1 * v2 - corr.covariance;
        b.b += v1;
        b.c += v2;
      });
  return bootstrap(blocks);
}

G2Estimate estimate_g2_photons(const Eigen::ArrayXd& n) {
  if (n.size() < 2) throw std::invalid_argument("need at least 2 records");
  const auto blocks = accumulate_blocks(n.size(), [&](std::int64_t i, BlockSums& b) {
    b.a += n[i] * (n[i] - 1.0);
    b.b += n[i];
    b.c += n[i];
  });
  return bootstrap(blocks);
}

}  // namespace bsv
