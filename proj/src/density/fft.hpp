#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace jdi::detail {

std::size_t next_pow2(std::size_t n);

/// out[i] = sum_j taps[i - j - kmin] * q[j] for i, j in [0, n): linear convolution of a
/// length-n signal with taps covering offsets kmin .. kmin + taps.size() - 1.
class Convolver {
 public:
  Convolver(const std::vector<double>& taps, long kmin, std::size_t n);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  struct Buffers;
  /// Scratch space for one thread.
  std::unique_ptr<Buffers, void (*)(Buffers*)> make_buffers() const;
  void apply(const double* q, double* out, Buffers& buf) const;

 private:
  std::size_t n_, N_;
  long kmin_;
  std::vector<std::complex<double>> spectrum_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

/// In-place complex DFT of length N (sign -1 forward, +1 backward, unnormalised).
void complex_dft(std::vector<std::complex<double>>& data, int sign);

}  // namespace jdi::detail
