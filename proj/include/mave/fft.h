// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_FFT_H_
#define MAVE_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mave {

using Complex = std::complex<double>;

// Real-input DFT of fixed size n backed by FFTW. Plan creation is
// serialized internally; an instance itself must not be shared between
// threads while transforming.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // X[k] = sum_t x[t] exp(-j 2 pi k t / n); in.size() <= n (zero padded).
  void Forward(std::span<const double> in, std::span<Complex> out);
  // x[t] = (1/n) sum_k X[k] exp(+j 2 pi k t / n); out.size() <= n.
  void Inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_;
  void* spec_;
  void* forward_;
  void* inverse_;
};

// Smallest 2^a 3^b 5^c >= n.
std::size_t FastFftSize(std::size_t n);

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b);

}  // namespace mave

#endif  // MAVE_FFT_H_
