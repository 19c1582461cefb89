#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace jdi::detail {

namespace {
// FFTW's planner is not thread-safe; execution of a finished plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct Convolver::Buffers {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
};

namespace {
void free_buffers(Convolver::Buffers* b) {
  fftw_free(b->real);
  fftw_free(b->spec);
  delete b;
}
}  // namespace

Convolver::Convolver(const std::vector<double>& taps, long kmin, std::size_t n)
    : n_(n), N_(next_pow2(n + taps.size())), kmin_(kmin) {
  const std::size_t H = N_ / 2 + 1;
  auto* in = fftw_alloc_real(N_);
  auto* out = fftw_alloc_complex(H);
  {
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(N_), in, out, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(N_), out, in, FFTW_ESTIMATE);
  }
  std::memset(in, 0, sizeof(double) * N_);
  for (std::size_t k = 0; k < taps.size(); ++k) in[k] = taps[k];
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), in, out);
  spectrum_.resize(H);
  for (std::size_t k = 0; k < H; ++k) spectrum_[k] = {out[k][0] / N_, out[k][1] / N_};
  fftw_free(in);
  fftw_free(out);
}

Convolver::~Convolver() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

std::unique_ptr<Convolver::Buffers, void (*)(Convolver::Buffers*)> Convolver::make_buffers() const {
  auto* b = new Buffers;
  b->real = fftw_alloc_real(N_);
  b->spec = fftw_alloc_complex(N_ / 2 + 1);
  return {b, &free_buffers};
}

void Convolver::apply(const double* q, double* out, Buffers& buf) const {
  std::memcpy(buf.real, q, sizeof(double) * n_);
  std::memset(buf.real + n_, 0, sizeof(double) * (N_ - n_));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), buf.real, buf.spec);
  for (std::size_t k = 0; k < spectrum_.size(); ++k) {
    const double re = buf.spec[k][0], im = buf.spec[k][1];
    buf.spec[k][0] = re * spectrum_[k].real() - im * spectrum_[k].imag();
    buf.spec[k][1] = re * spectrum_[k].imag() + im * spectrum_[k].real();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), buf.spec, buf.real);
  // c[m] = sum_j q_j taps[m - j]; out[i] = c[i - kmin]
  for (std::size_t i = 0; i < n_; ++i) {
    const long m = static_cast<long>(i) - kmin_;
    out[i] = (m >= 0 && m < static_cast<long>(N_)) ? buf.real[m] : 0.0;
  }
}

void complex_dft(std::vector<std::complex<double>>& data, int sign) {
  const int N = static_cast<int>(data.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(N, ptr, ptr, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace jdi::detail
