#pragma once

#include <cstdint>
#include <random>

namespace mixreg {

/// Identifies one reproducible random stream. Parallel work must use disjoint
/// stream indices; the stream a value comes from never depends on scheduling.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// MT19937-64 keyed by std::seed_seq over the 32-bit halves of
/// (master, stream[, substream]). Both the engine and seed_seq are fully
/// specified by the standard, so streams are portable across toolchains.
///
/// Variates are produced by our own fixed transforms rather than the
/// implementation-defined std distributions:
///   uniform()  : top 53 bits of one draw, in [0, 1)
///   normal()   : Marsaglia polar method, pairs cached
///   laplace(b) : inverse CDF
class Rng {
 public:
  explicit Rng(Seed seed);
  Rng(Seed seed, std::uint64_t substream);

  double uniform();
  /// Strictly inside (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double laplace(double scale);
  /// +1 or -1 with equal probability.
  double rademacher();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mixreg
