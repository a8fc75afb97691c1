// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mave/error.h"
#include "mave/wave_io.h"
#include "support/checks.h"
#include "support/temp_dir.h"

using mave::ErrorCode;
using mave::MultichannelWave;
using mave::SampleFormat;
using mave::test::CodeOf;

namespace {

MultichannelWave RandomWave(std::size_t channels, std::size_t frames,
                            unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  MultichannelWave w(channels, frames);
  for (std::size_t m = 0; m < channels; ++m)
    for (double& v : w.channel(m)) v = u(rng);
  return w;
}

// Minimal 16-bit mono WAV header with an arbitrary sample rate.
std::string PcmHeader(std::uint32_t rate, std::uint32_t data_bytes) {
  std::string h = "RIFF";
  const auto put32 = [&](std::uint32_t v) { h.append(reinterpret_cast<char*>(&v), 4); };
  const auto put16 = [&](std::uint16_t v) { h.append(reinterpret_cast<char*>(&v), 2); };
  put32(36 + data_bytes);
  h += "WAVEfmt ";
  put32(16);
  put16(1);
  put16(1);
  put32(rate);
  put32(rate * 2);
  put16(2);
  put16(16);
  h += "data";
  put32(data_bytes);
  return h;
}

}  // namespace

TEST_CASE("silent mono file reads back as zeros") {
  mave::test::TempDir dir;
  const auto path = dir.path() / "silence.wav";
  mave::WriteWav(MultichannelWave(1, 16000), path, SampleFormat::kPcm16);
  const auto w = mave::ReadWav(path);
  CHECK(w.channels() == 1);
  CHECK(w.frames() == 16000);
  for (double v : w.channel(0)) CHECK(v == 0.0);
}

TEST_CASE("16-bit round trip stays within one quantization step") {
  mave::test::TempDir dir;
  const auto path = dir.path() / "pcm.wav";
  const auto w = RandomWave(4, 5000, 1);
  mave::WriteWav(w, path, SampleFormat::kPcm16);
  const auto r = mave::ReadWav(path);
  REQUIRE(r.channels() == 4);
  REQUIRE(r.frames() == 5000);
  double worst = 0.0;
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t t = 0; t < 5000; ++t)
      worst = std::max(worst, std::abs(r.at(m, t) - w.at(m, t)));
  CHECK(worst <= std::ldexp(1.0, -15));
}

TEST_CASE("float32 round trip is bit exact for float-representable samples") {
  mave::test::TempDir dir;
  const auto path = dir.path() / "f32.wav";
  auto w = RandomWave(3, 777, 2);
  for (std::size_t m = 0; m < 3; ++m)
    for (double& v : w.channel(m)) v = static_cast<float>(v);
  mave::WriteWav(w, path);
  CHECK(mave::ReadWav(path) == w);
}

TEST_CASE("channel order is preserved") {
  mave::test::TempDir dir;
  MultichannelWave w(3, 4);
  for (std::size_t m = 0; m < 3; ++m) w.at(m, 0) = 0.25 * static_cast<double>(m + 1);
  mave::WriteWav(w, dir.path() / "order.wav");
  const auto r = mave::ReadWav(dir.path() / "order.wav");
  CHECK(r.at(0, 0) == 0.25);
  CHECK(r.at(1, 0) == 0.5);
  CHECK(r.at(2, 0) == 0.75);
}

TEST_CASE("out-of-range samples are clipped and counted") {
  mave::test::TempDir dir;
  MultichannelWave w(1, 3);
  w.at(0, 0) = 1.5;
  w.at(0, 1) = -0.5;
  const auto clipped = mave::WriteWav(w, dir.path() / "clip.wav");
  CHECK(clipped == 1);
  const auto r = mave::ReadWav(dir.path() / "clip.wav");
  CHECK(r.at(0, 0) == 1.0);
  CHECK(r.at(0, 1) == -0.5);
}

TEST_CASE("44.1 kHz input is rejected") {
  mave::test::TempDir dir;
  const auto path = dir.path() / "cd.wav";
  std::ofstream(path, std::ios::binary) << PcmHeader(44100, 4) << std::string(4, '\0');
  CHECK(CodeOf([&] { mave::ReadWav(path); }) == ErrorCode::kUnsupportedSampleRate);
}

TEST_CASE("malformed files are rejected") {
  mave::test::TempDir dir;
  const auto path = dir.path() / "junk.wav";
  std::ofstream(path, std::ios::binary) << "not a wav file at all";
  CHECK(CodeOf([&] { mave::ReadWav(path); }) == ErrorCode::kMalformedFile);
  CHECK(CodeOf([&] { mave::ReadWav(dir.path() / "missing.wav"); }) ==
        ErrorCode::kIoFailure);
}

TEST_CASE("non-finite samples cannot be written") {
  mave::test::TempDir dir;
  MultichannelWave w(1, 2);
  w.at(0, 1) = std::nan("");
  CHECK_THROWS_AS(mave::WriteWav(w, dir.path() / "nan.wav"), mave::Error);
}

TEST_CASE("Permuted and Channel copy the right data") {
  MultichannelWave w({{1, 2}, {3, 4}, {5, 6}});
  const std::size_t order[] = {2, 0, 1};
  const auto p = w.Permuted(order);
  CHECK(p.at(0, 1) == 6);
  CHECK(p.at(1, 0) == 1);
  CHECK(w.Channel(1).at(0, 1) == 4);
  CHECK_THROWS_AS(MultichannelWave(0, 5), mave::Error);
}
