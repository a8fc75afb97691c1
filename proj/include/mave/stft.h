// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_STFT_H_
#define MAVE_STFT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mave/fft.h"

namespace mave {

// Hann-windowed STFT; defaults are 25 ms / 10 ms / 512 at 16 kHz.
struct StftParams {
  std::size_t window_len = 400;
  std::size_t hop = 160;
  std::size_t fft_size = 512;

  std::size_t bins() const { return fft_size / 2 + 1; }
  // Frames produced for a signal of |samples| samples.
  std::size_t FramesFor(std::size_t samples) const;
  // Throws NonColaParams unless hop <= window_len <= fft_size and the squared
  // window overlap-adds to a strictly positive envelope, which is what the
  // normalized inverse needs for exact reconstruction.
  void Validate() const;
  friend bool operator==(const StftParams&, const StftParams&) = default;
};

// Periodic Hann window of length n.
std::vector<double> HannWindow(std::size_t n);

class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(StftParams params, std::size_t frames,
                     std::size_t channel_id = 0);

  const StftParams& params() const { return params_; }
  std::size_t bins() const { return params_.bins(); }
  std::size_t frames() const { return frames_; }
  std::size_t channel_id() const { return channel_id_; }

  Complex& at(std::size_t f, std::size_t n) { return data_[f * frames_ + n]; }
  const Complex& at(std::size_t f, std::size_t n) const {
    return data_[f * frames_ + n];
  }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  bool SameShape(const ComplexSpectrogram& other) const {
    return params_ == other.params_ && frames_ == other.frames_;
  }

 private:
  StftParams params_;
  std::size_t frames_ = 0;
  std::size_t channel_id_ = 0;
  std::vector<Complex> data_;  // [bins][frames]
};

// Frames are centered: frame n covers samples [n*hop - window_len/2,
// n*hop + window_len/2), zero outside the signal.
ComplexSpectrogram Stft(std::span<const double> signal,
                        const StftParams& params = {},
                        std::size_t channel_id = 0);

// Weighted overlap-add with the analysis window, divided by the summed
// squared window. Output has exactly |out_len| samples.
std::vector<double> Istft(const ComplexSpectrogram& spec, std::size_t out_len);

}  // namespace mave

#endif  // MAVE_STFT_H_
