#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace ri {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

/// Counter-based stream keyed by (master_seed, stream_index). Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class RngStream {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kAlgorithm = "philox4x32-10";

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Exact uniform integer in [0, n), n >= 1.
  std::uint32_t below(std::uint32_t n);
  /// Poisson variate by inversion (chunked for large means).
  std::uint64_t poisson(double mean);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace ri
