#pragma once

#include <array>
#include <cstdint>

namespace ppmc {

/// Counter-based random stream (Philox4x32-10). A stream is fully determined
/// by (seed, stream_id): the same pair always reproduces the same sequence,
/// and distinct stream_ids give independent sequences, so per-individual
/// streams can be consumed from any thread without affecting the results.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform draw on the open interval (0,1).
  double uniform();

  /// Standard normal draw (inverse-CDF transform of uniform()).
  double normal();

  /// Gamma(shape, 1) draw, shape > 0. Marsaglia-Tsang squeeze.
  double gamma(double shape);

  /// Chi-squared draw with df > 0 degrees of freedom.
  double chisq(double df);

  /// Integer in {0,...,n-1} proportional to weights[0..n-1] (need not sum to 1).
  int categorical(const double* weights, int n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Raw 4x32-bit Philox block for the given counter; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& ctr,
                                                 const std::array<std::uint32_t, 2>& key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  std::array<double, 2> buf_{};
  int buf_pos_ = 2;  // empty
};

}  // namespace ppmc
