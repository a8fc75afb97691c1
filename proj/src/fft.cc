// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "mave/error.h"

namespace mave {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "FFT size 0");
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  std::lock_guard<std::mutex> lock(PlannerMutex());
  // FFTW_ESTIMATE keeps plans (and therefore results) independent of timing.
  forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec,
                                  FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_,
                                  FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) {
  std::fill(real_, real_ + n_, 0.0);
  std::copy_n(in.begin(), std::min(in.size(), n_), real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const auto* spec = static_cast<const Complex*>(spec_);
  std::copy_n(spec, std::min(out.size(), bins()), out.begin());
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) {
  auto* spec = static_cast<Complex*>(spec_);
  std::fill(spec, spec + bins(), Complex{});
  std::copy_n(in.begin(), std::min(in.size(), bins()), spec);
  fftw_execute(static_cast<fftw_plan>(inverse_));
  const double scale = 1.0 / static_cast<double>(n_);
  const std::size_t count = std::min(out.size(), n_);
  for (std::size_t i = 0; i < count; ++i) out[i] = real_[i] * scale;
}

std::size_t FastFftSize(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(FastFftSize(out_len));
  std::vector<Complex> fa(fft.bins()), fb(fft.bins());
  fft.Forward(a, fa);
  fft.Forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out(out_len);
  fft.Inverse(fa, out);
  return out;
}

}  // namespace mave
