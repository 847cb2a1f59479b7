#pragma once

#include <cstdint>

namespace scoco {

// Counter-based pseudo-random stream. A stream is identified by a seed plus up
// to three stream ids (e.g. regime-scenario index, path index, factor id);
// distinct ids give statistically independent streams, and a stream's output
// depends only on (seed, ids, draw index). This makes simulations reproducible
// for a fixed seed regardless of thread count or evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t id0 = 0,
                     std::uint64_t id1 = 0, std::uint64_t id2 = 0);

  std::uint64_t next_u64();

  // Uniform draw strictly inside (0, 1).
  double uniform();

  // Standard normal via Box-Muller; draws are cached in pairs.
  double normal();

  // Gamma(shape, 1) for shape > 0. Marsaglia-Tsang squeeze for shape >= 1,
  // boosting (Gamma(shape+1) * U^(1/shape)) for shape < 1.
  double gamma(double shape);

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace scoco
