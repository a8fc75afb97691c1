// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/wave_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "mave/error.h"
#include "mave/fs_util.h"

namespace mave {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

MultichannelWave::MultichannelWave(std::size_t channels, std::size_t frames)
    : channels_(channels), frames_(frames), data_(channels * frames, 0.0) {
  if (channels == 0 || frames == 0)
    throw Error(ErrorCode::kInvalidArgument,
                "wave needs at least one channel and one frame");
}

MultichannelWave::MultichannelWave(
    const std::vector<std::vector<double>>& channels) {
  if (channels.empty() || channels.front().empty())
    throw Error(ErrorCode::kInvalidArgument,
                "wave needs at least one channel and one frame");
  channels_ = channels.size();
  frames_ = channels.front().size();
  data_.reserve(channels_ * frames_);
  for (const auto& ch : channels) {
    if (ch.size() != frames_)
      throw Error(ErrorCode::kInvalidArgument, "channels differ in length");
    data_.insert(data_.end(), ch.begin(), ch.end());
  }
}

MultichannelWave MultichannelWave::Channel(std::size_t m) const {
  MultichannelWave out(1, frames_);
  std::ranges::copy(channel(m), out.channel(0).begin());
  return out;
}

MultichannelWave MultichannelWave::Permuted(
    std::span<const std::size_t> order) const {
  if (order.size() != channels_)
    throw Error(ErrorCode::kInvalidArgument, "permutation size mismatch");
  MultichannelWave out(channels_, frames_);
  for (std::size_t k = 0; k < channels_; ++k)
    std::ranges::copy(channel(order[k]), out.channel(k).begin());
  return out;
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T Load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void Append(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

MultichannelWave ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto malformed = [&](const std::string& why) {
    return Error(ErrorCode::kMalformedFile, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    throw malformed("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = Load<std::uint32_t>(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size())
        throw malformed("truncated fmt chunk");
      format = Load<std::uint16_t>(bytes.data() + body);
      channels = Load<std::uint16_t>(bytes.data() + body + 2);
      rate = Load<std::uint32_t>(bytes.data() + body + 4);
      bits = Load<std::uint16_t>(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw malformed("truncated extensible fmt chunk");
        format = Load<std::uint16_t>(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw malformed("missing fmt chunk");
  if (data == nullptr) throw malformed("missing data chunk");
  if (channels == 0) throw malformed("zero channels");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw malformed("only 16-bit PCM and 32-bit float are supported");
  if (rate != static_cast<std::uint32_t>(kSampleRate))
    throw Error(ErrorCode::kUnsupportedSampleRate,
                path.string() + ": " + std::to_string(rate) + " Hz");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  if (frames == 0) throw malformed("no audio frames");
  MultichannelWave wave(channels, frames);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < channels; ++m) {
      const char* p = data + (t * channels + m) * width;
      wave.at(m, t) = pcm16 ? Load<std::int16_t>(p) / 32768.0
                            : static_cast<double>(Load<float>(p));
    }
  }
  return wave;
}

std::size_t WriteWav(const MultichannelWave& wave,
                     const std::filesystem::path& path, SampleFormat format) {
  if (wave.empty())
    throw Error(ErrorCode::kInvalidArgument, "cannot write an empty wave");
  const std::size_t channels = wave.channels();
  const std::size_t frames = wave.frames();
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint32_t block = static_cast<std::uint32_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * block);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  Append<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  Append<std::uint32_t>(out, 16);
  Append<std::uint16_t>(
      out, format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  Append<std::uint16_t>(out, static_cast<std::uint16_t>(channels));
  Append<std::uint32_t>(out, kSampleRate);
  Append<std::uint32_t>(out, kSampleRate * block);
  Append<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  Append<std::uint16_t>(out, bits);
  out += "data";
  Append<std::uint32_t>(out, data_size);

  std::size_t clipped = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < channels; ++m) {
      double v = wave.at(m, t);
      if (!std::isfinite(v))
        throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
      if (std::abs(v) > 1.0) {
        ++clipped;
        v = std::clamp(v, -1.0, 1.0);
      }
      if (format == SampleFormat::kPcm16) {
        const long q = std::lround(v * 32768.0);
        Append<std::int16_t>(
            out, static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L)));
      } else {
        Append<float>(out, static_cast<float>(v));
      }
    }
  }
  if (clipped > 0)
    std::cerr << "warning: " << path.string() << ": clipped " << clipped
              << " samples to +-1.0\n";
  WriteFileAtomic(path, out);
  return clipped;
}

}  // namespace mave
