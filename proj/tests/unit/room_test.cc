// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <vector>

#include "mave/room.h"
#include "support/checks.h"
#include "support/oracles.h"

using mave::ErrorCode;
using mave::MultichannelWave;
using mave::RoomSpec;
using mave::Vec3;
using mave::test::CodeOf;

namespace {

RoomSpec Room(double x, double y, double z, double t60) {
  RoomSpec r;
  r.dimensions = {x, y, z};
  r.t60 = t60;
  return r;
}

mave::RirOptions Anechoic() {
  mave::RirOptions o;
  o.absorption = 1.0;
  o.max_order = 0;
  o.high_pass = false;
  return o;
}

}  // namespace

TEST_CASE("Sabine inversion for the 7x8x3 room at 0.5 s") {
  const double volume = 7.0 * 8.0 * 3.0;
  const double surface = 2.0 * (7.0 * 8.0 + 7.0 * 3.0 + 8.0 * 3.0);
  CHECK(mave::T60ToAbsorption(Room(7, 8, 3, 0.5)) ==
        doctest::Approx(0.161 * volume / (surface * 0.5)).epsilon(1e-9));
  CHECK(mave::T60ToAbsorption(Room(7, 8, 3, 0.5)) ==
        doctest::Approx(0.267802).epsilon(1e-5));
}

TEST_CASE("Sabine inversion rejects impossible rooms and tends to zero") {
  CHECK(CodeOf([] { mave::T60ToAbsorption(Room(2, 2, 2, 0.05)); }) ==
        ErrorCode::kAbsorptionOutOfRange);
  CHECK(mave::T60ToAbsorption(Room(7, 8, 3, 1e6)) < 1e-6);
}

TEST_CASE("calibrated absorption stays inside (0, 1) and falls with T60") {
  const double fast = mave::CalibratedAbsorption(Room(7, 8, 3, 0.2));
  const double slow = mave::CalibratedAbsorption(Room(7, 8, 3, 1.0));
  CHECK(fast > 0.0);
  CHECK(fast < 1.0);
  CHECK(slow > 0.0);
  CHECK(slow < fast);
}

TEST_CASE("RIR length is ceil(1.2 T60 fs)") {
  CHECK(mave::RirLength(Room(7, 8, 3, 0.5)) == 9600);
  CHECK(mave::RirLength(Room(7, 8, 3, 0.33)) == 6336);
}

TEST_CASE("anechoic RIR is a single 1/d peak at the geometric delay") {
  const auto room = Room(10, 8, 3, 0.5);
  const Vec3 src{2.0, 4.0, 1.5};
  const Vec3 mic{5.43, 4.0, 1.5};  // 3.43 m: 160 samples at 343 m/s
  const auto rir = mave::SimulateRir(room, src, mic, Anechoic());
  CHECK(mave::oracle::ArgMaxAbs(rir) == 160);
  CHECK(rir[160] == doctest::Approx(1.0 / 3.43).epsilon(1e-9));
  double rest = 0.0;
  for (std::size_t i = 0; i < rir.size(); ++i)
    if (i != 160) rest = std::max(rest, std::abs(rir[i]));
  CHECK(rest < 1e-12);
}

TEST_CASE("doubling the distance halves the direct-path amplitude") {
  const auto room = Room(12, 9, 3, 0.5);
  const Vec3 src{2.0, 4.5, 1.5};
  // 80 and 160 samples of propagation: both peaks fall on integer samples.
  const auto near = mave::SimulateRir(room, src, {3.715, 4.5, 1.5}, Anechoic());
  const auto far = mave::SimulateRir(room, src, {5.43, 4.5, 1.5}, Anechoic());
  const double a = std::abs(near[mave::oracle::ArgMaxAbs(near)]);
  const double b = std::abs(far[mave::oracle::ArgMaxAbs(far)]);
  CHECK(b / a == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("invalid geometry is rejected") {
  const auto room = Room(7, 8, 3, 0.5);
  CHECK(CodeOf([&] { mave::SimulateRir(room, {-1, 1, 1}, {2, 2, 1}); }) ==
        ErrorCode::kGeometryError);
  CHECK(CodeOf([&] { mave::SimulateRir(room, {2, 2, 1}, {2.05, 2, 1}); }) ==
        ErrorCode::kGeometryError);
}

TEST_CASE("head-frame microphones follow yaw and translation") {
  mave::ArrayGeometry g;
  g.mic_positions = mave::DefaultGlassesArray();
  g.head_position = {3, 4, 1.6};
  g.head_yaw = std::numbers::pi / 2;
  // Front (+y) of the head turns to -x in the room.
  const Vec3 front = mave::DefaultGlassesArray()[0];
  const Vec3 abs = g.AbsoluteMic(0);
  CHECK(abs.x == doctest::Approx(3.0 - front.y));
  CHECK(abs.y == doctest::Approx(4.0 + front.x));
  CHECK(abs.z == doctest::Approx(1.6));
}

TEST_CASE("spatialize with identity and shifted kernels") {
  MultichannelWave dry(1, 50);
  for (std::size_t t = 0; t < 50; ++t) dry.at(0, t) = std::sin(0.3 * t);
  std::vector<std::vector<double>> identity(4, std::vector<double>{1.0});
  const auto same = mave::Spatialize(dry, identity);
  CHECK(same.channels() == 4);
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t t = 0; t < 50; ++t)
      CHECK(same.at(m, t) == doctest::Approx(dry.at(0, t)).epsilon(1e-12));

  std::vector<std::vector<double>> shift(1, std::vector<double>(8, 0.0));
  shift[0][7] = 1.0;
  const auto delayed = mave::Spatialize(dry, shift);
  CHECK(delayed.frames() == 57);
  for (std::size_t t = 0; t < 50; ++t)
    CHECK(delayed.at(0, t + 7) == doctest::Approx(dry.at(0, t)).epsilon(1e-12));
}

TEST_CASE("spatialize matches direct convolution for a long RIR") {
  const auto x = mave::test::Gaussian(16000, 3);
  const auto h = mave::test::Gaussian(4800, 4, 0.1);
  MultichannelWave dry({x});
  std::vector<std::vector<double>> rirs{h};
  const auto fast = mave::Spatialize(dry, rirs);
  const auto slow = mave::oracle::DirectConvolve(x, h);
  REQUIRE(fast.frames() == slow.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < slow.size(); ++t)
    worst = std::max(worst, std::abs(fast.at(0, t) - slow[t]));
  CHECK(worst <= 1e-6);
  CHECK(CodeOf([&] { mave::Spatialize(MultichannelWave(2, 10), rirs); }) ==
        ErrorCode::kChannelMismatch);
}

TEST_CASE("mixing gains follow the energy-ratio definition") {
  MultichannelWave target({mave::test::Gaussian(4000, 5)});
  MultichannelWave interf({mave::test::Gaussian(4000, 6)});
  // Rescale the interferer to the target's energy at mic 1.
  const double s = std::sqrt(mave::Energy(target.channel(0)) /
                             mave::Energy(interf.channel(0)));
  for (double& v : interf.channel(0)) v *= s;
  std::vector<MultichannelWave> list{interf};
  CHECK(mave::MixAtSnr(target, list, 0.0, -40.0, 1).applied_gain ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mave::MixAtSnr(target, list, -10.0, -40.0, 1).applied_gain ==
        doctest::Approx(3.16228).epsilon(1e-6));
}

TEST_CASE("mixture is target plus scaled interference plus noise") {
  MultichannelWave target({mave::test::Gaussian(3000, 7), mave::test::Gaussian(3000, 8)});
  MultichannelWave interf({mave::test::Gaussian(3000, 9), mave::test::Gaussian(3000, 10)});
  std::vector<MultichannelWave> list{interf};
  const auto mix = mave::MixAtSnr(target, list, 5.0, -40.0, 42);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t t = 0; t < 3000; ++t)
      CHECK(mix.mixture.at(m, t) ==
            target.at(m, t) + mix.scaled_interference.at(m, t) + mix.noise.at(m, t));
  const double noise_db = 10.0 * std::log10(mave::Energy(mix.noise.channel(0)) /
                                            mave::Energy(target.channel(0)));
  CHECK(noise_db == doctest::Approx(-40.0).epsilon(0.01));
  CHECK(mave::MixAtSnr(target, list, 5.0, -40.0, 42).mixture == mix.mixture);
}

TEST_CASE("silent signals cannot be mixed") {
  MultichannelWave silent(1, 100);
  MultichannelWave loud({mave::test::Gaussian(100, 11)});
  std::vector<MultichannelWave> loud_list{loud}, silent_list{silent};
  CHECK(CodeOf([&] { mave::MixAtSnr(silent, loud_list, 0, -40, 1); }) ==
        ErrorCode::kZeroEnergy);
  CHECK(CodeOf([&] { mave::MixAtSnr(loud, silent_list, 0, -40, 1); }) ==
        ErrorCode::kZeroEnergy);
}
