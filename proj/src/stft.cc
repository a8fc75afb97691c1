// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/stft.h"

#include <cmath>
#include <numbers>
#include <string>

#include "mave/error.h"

namespace mave {

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

std::size_t StftParams::FramesFor(std::size_t samples) const {
  return (samples + window_len / 2) / hop + 1;
}

void StftParams::Validate() const {
  if (hop == 0 || hop > window_len || window_len > fft_size)
    throw Error(ErrorCode::kNonColaParams,
                "need 0 < hop <= window_len <= fft_size");
  const auto w = HannWindow(window_len);
  std::vector<double> envelope(hop, 0.0);
  for (std::size_t i = 0; i < window_len; ++i) envelope[i % hop] += w[i] * w[i];
  for (double e : envelope)
    if (e < 1e-6)
      throw Error(ErrorCode::kNonColaParams,
                  "window/hop overlap-add envelope vanishes (hop " +
                      std::to_string(hop) + ", window " +
                      std::to_string(window_len) + ")");
}

ComplexSpectrogram::ComplexSpectrogram(StftParams params, std::size_t frames,
                                       std::size_t channel_id)
    : params_(params),
      frames_(frames),
      channel_id_(channel_id),
      data_(params.bins() * frames) {}

ComplexSpectrogram Stft(std::span<const double> signal,
                        const StftParams& params, std::size_t channel_id) {
  params.Validate();
  const std::size_t frames = params.FramesFor(signal.size());
  ComplexSpectrogram spec(params, frames, channel_id);
  const auto window = HannWindow(params.window_len);
  RealFft fft(params.fft_size);
  std::vector<double> frame(params.window_len);
  std::vector<Complex> bins(params.bins());
  const long long half = static_cast<long long>(params.window_len / 2);
  const long long total = static_cast<long long>(signal.size());
  for (std::size_t n = 0; n < frames; ++n) {
    const long long start = static_cast<long long>(n * params.hop) - half;
    for (std::size_t i = 0; i < params.window_len; ++i) {
      const long long t = start + static_cast<long long>(i);
      frame[i] = (t >= 0 && t < total)
                     ? signal[static_cast<std::size_t>(t)] * window[i]
                     : 0.0;
    }
    fft.Forward(frame, bins);
    for (std::size_t f = 0; f < bins.size(); ++f) spec.at(f, n) = bins[f];
  }
  return spec;
}

std::vector<double> Istft(const ComplexSpectrogram& spec, std::size_t out_len) {
  const auto& params = spec.params();
  params.Validate();
  const auto window = HannWindow(params.window_len);
  RealFft fft(params.fft_size);
  std::vector<Complex> bins(params.bins());
  std::vector<double> frame(params.window_len);
  std::vector<double> out(out_len, 0.0), norm(out_len, 0.0);
  const long long half = static_cast<long long>(params.window_len / 2);
  const long long total = static_cast<long long>(out_len);
  for (std::size_t n = 0; n < spec.frames(); ++n) {
    for (std::size_t f = 0; f < bins.size(); ++f) bins[f] = spec.at(f, n);
    fft.Inverse(bins, frame);
    const long long start = static_cast<long long>(n * params.hop) - half;
    for (std::size_t i = 0; i < params.window_len; ++i) {
      const long long t = start + static_cast<long long>(i);
      if (t < 0 || t >= total) continue;
      out[static_cast<std::size_t>(t)] += frame[i] * window[i];
      norm[static_cast<std::size_t>(t)] += window[i] * window[i];
    }
  }
  for (std::size_t t = 0; t < out_len; ++t)
    out[t] = norm[t] > 1e-10 ? out[t] / norm[t] : 0.0;
  return out;
}

}  // namespace mave
