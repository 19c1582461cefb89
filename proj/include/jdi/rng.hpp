#pragma once

#include <array>
#include <cstdint>

namespace jdi {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32-10 bijection (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

/// Counter-based stream for one (seed, path, step) triple. Cheap to construct;
/// the same triple always yields the same sequence.
class RngStream {
 public:
  static constexpr std::uint32_t kInitialStep = 0xffffffffu;

  RngStream(std::uint64_t seed, std::uint64_t path, std::uint32_t step);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal by Box-Muller.
  double normal();

 private:
  PhiloxKey key_;
  PhiloxCounter ctr_;
  PhiloxCounter block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jdi
