// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_WAVE_IO_H_
#define MAVE_WAVE_IO_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mave {

inline constexpr int kSampleRate = 16000;

// M channels x T frames of real samples at 16 kHz, stored channel-major.
// Amplitudes are nominally within +-1.0 but are not clipped in memory.
class MultichannelWave {
 public:
  MultichannelWave() = default;
  // Zero-initialized buffer; channels >= 1 and frames >= 1.
  MultichannelWave(std::size_t channels, std::size_t frames);
  // One vector per channel; all must have the same non-zero length.
  explicit MultichannelWave(const std::vector<std::vector<double>>& channels);

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  int sample_rate() const { return kSampleRate; }
  bool empty() const { return channels_ == 0; }

  std::span<const double> channel(std::size_t m) const {
    return {data_.data() + m * frames_, frames_};
  }
  std::span<double> channel(std::size_t m) {
    return {data_.data() + m * frames_, frames_};
  }
  double at(std::size_t m, std::size_t t) const {
    return data_[m * frames_ + t];
  }
  double& at(std::size_t m, std::size_t t) { return data_[m * frames_ + t]; }

  // Single-channel view copied out as its own wave.
  MultichannelWave Channel(std::size_t m) const;
  // New wave with channels reordered: out[k] = in[order[k]].
  MultichannelWave Permuted(std::span<const std::size_t> order) const;

  friend bool operator==(const MultichannelWave&,
                         const MultichannelWave&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::vector<double> data_;
};

enum class SampleFormat { kPcm16, kFloat32 };

// Reads a 16-bit PCM or 32-bit IEEE float RIFF/WAVE file (WAVE_FORMAT_
// EXTENSIBLE accepted). Anything but 16 kHz is rejected; no resampling.
MultichannelWave ReadWav(const std::filesystem::path& path);

// Writes interleaved little-endian samples. Values beyond +-1 are clipped
// and counted; the count is returned and a warning goes to stderr when
// non-zero. The file is written to a temporary name and renamed into place.
std::size_t WriteWav(const MultichannelWave& wave,
                     const std::filesystem::path& path,
                     SampleFormat format = SampleFormat::kFloat32);

}  // namespace mave

#endif  // MAVE_WAVE_IO_H_
